"""Finite-alphabet probability engine.

Pmfs and channels are plain numpy arrays validated on entry; joint laws are
:class:`JointDist` objects carrying one label per axis.  All information
measures are in bits, with the convention ``0 log 0 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch

PMF_TOL = 1e-12
INFO_TOL = 1e-10
MARKOV_TOL = 1e-9

# axis order of the eight-variable joint built by chain_join
AXES = ("X", "Y1", "Y2", "E", "U1", "U2", "V1", "V2")

Labels = Union[str, Iterable[str]]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_pmf(probs, name: str = "pmf", tol: float = PMF_TOL) -> np.ndarray:
    """Validate a probability vector and return a read-only, exactly normalized copy."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError(f"{name}: expected a non-empty vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name}: non-finite entry")
    neg = np.flatnonzero(p < 0)
    if neg.size:
        raise ValueError(f"{name}: negative entry at index {neg[0]}")
    s = p.sum()
    if abs(s - 1.0) > tol:
        raise ValueError(f"{name}: entries sum to {s!r}, not 1")
    return _readonly(p / s)


def as_cond(rows, name: str = "channel", tol: float = PMF_TOL) -> np.ndarray:
    """Validate a row-stochastic matrix (row i = law of the output given input i)."""
    m = np.asarray(rows, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name}: expected a non-empty matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name}: non-finite entry")
    bad = np.argwhere(m < 0)
    if bad.size:
        r, c = bad[0]
        raise ValueError(f"{name}: negative entry at row {r}, column {c}")
    sums = m.sum(axis=1)
    off = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if off.size:
        r = off[0]
        raise ValueError(f"{name}: row {r} sums to {sums[r]!r}, not 1")
    return _readonly(m / sums[:, None])


def identity_channel(k: int) -> np.ndarray:
    return _readonly(np.eye(k))


def constant_channel(k: int, m: int = 1, letter: int = 0) -> np.ndarray:
    """Channel from a k-letter alphabet that always outputs ``letter`` of m."""
    out = np.zeros((k, m))
    out[:, letter] = 1.0
    return _readonly(out)


def bsc(p: float) -> np.ndarray:
    return _readonly([[1.0 - p, p], [p, 1.0 - p]])


def h2(p: float) -> float:
    """Binary entropy in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def _labels(x: Labels) -> tuple:
    if isinstance(x, str):
        return (x,)
    return tuple(x)


def _plogp_sum(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True, eq=False)
class JointDist:
    """Dense joint pmf over labelled finite alphabets."""

    table: np.ndarray
    axes: tuple
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        axes = tuple(self.axes)
        if t.ndim != len(axes):
            raise DimensionMismatch(f"table has {t.ndim} dimensions but {len(axes)} axis labels")
        if len(set(axes)) != len(axes):
            raise ValueError(f"duplicate axis labels in {axes}")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValueError("joint table has negative or non-finite entries")
        mass = t.sum()
        if abs(mass - 1.0) > PMF_TOL:
            raise ValueError(f"joint table has total mass {mass!r}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "axes", axes)

    @property
    def shape(self) -> dict:
        return dict(zip(self.axes, self.table.shape))

    def index(self, label: str) -> int:
        try:
            return self.axes.index(label)
        except ValueError:
            raise KeyError(f"unknown axis label {label!r}; axes are {self.axes}") from None

    def _marginal_array(self, keep: tuple) -> np.ndarray:
        idx = [self.index(k) for k in keep]
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        m = self.table.sum(axis=drop) if drop else self.table
        # sum keeps the original axis order; reorder to the requested order
        kept_sorted = sorted(idx)
        perm = [kept_sorted.index(i) for i in idx]
        return np.transpose(m, perm) if perm != list(range(len(perm))) else m

    def joint_entropy(self, labels: Labels) -> float:
        key = frozenset(_labels(labels))
        for k in key:
            self.index(k)
        if key not in self._cache:
            # table order, not set order: set iteration varies with the string hash seed
            ordered = tuple(sorted(key, key=self.index))
            self._cache[key] = 0.0 if not ordered else _plogp_sum(self._marginal_array(ordered).ravel())
        return self._cache[key]


def marginal(joint: JointDist, keep: Labels) -> JointDist:
    """Sum out every axis not in ``keep``; axes keep the order given."""
    keep = _labels(keep)
    for k in keep:
        joint.index(k)
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate labels in {keep}")
    return JointDist(joint._marginal_array(keep), keep)


def entropy(joint: JointDist, vars: Labels, given: Labels = ()) -> float:
    """H(vars | given) in bits."""
    a, g = set(_labels(vars)), set(_labels(given))
    if a & g:
        raise ValueError(f"vars and given overlap on {sorted(a & g)}")
    return joint.joint_entropy(a | g) - joint.joint_entropy(g)


def mutual_info(joint: JointDist, a: Labels, b: Labels, given: Labels = ()) -> float:
    """I(a; b | given) in bits."""
    sa, sb, sg = set(_labels(a)), set(_labels(b)), set(_labels(given))
    if sa & sb or sa & sg or sb & sg:
        raise ValueError("a, b and given must be pairwise disjoint")
    h = joint.joint_entropy
    return h(sa | sg) + h(sb | sg) - h(sa | sb | sg) - h(sg)


def markov_gap(joint: JointDist, chain: Sequence[Labels]) -> float:
    """Largest I(past; future | middle) over the interior groups of ``chain``."""
    groups = [_labels(g) for g in chain]
    worst = 0.0
    for i in range(1, len(groups) - 1):
        past = [lab for g in groups[:i] for lab in g]
        future = [lab for g in groups[i + 1:] for lab in g]
        worst = max(worst, mutual_info(joint, past, future, groups[i]))
    return worst


def check_markov(joint: JointDist, chain: Sequence[Labels], tol: float = MARKOV_TOL) -> bool:
    """True iff the groups form a Markov chain in the given order."""
    return markov_gap(joint, chain) < tol


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """Discrete memoryless source p(x)p(y1|x)p(y2|x)p(e|x) with a distortion matrix.

    ``distortion[x, xhat]``; the reconstruction alphabet is the column index set
    and defaults to the source alphabet.
    """

    px: np.ndarray
    py1_x: np.ndarray
    py2_x: np.ndarray
    pe_x: np.ndarray
    distortion: np.ndarray = None
    d_max: float = None

    def __post_init__(self):
        px = as_pmf(self.px, "px")
        nx = px.size
        chans = {}
        for name in ("py1_x", "py2_x", "pe_x"):
            c = as_cond(getattr(self, name), name)
            if c.shape[0] != nx:
                raise DimensionMismatch(f"{name} has {c.shape[0]} rows but |X| = {nx}")
            chans[name] = c
        d = self.distortion
        d = 1.0 - np.eye(nx) if d is None else np.array(d, dtype=float)
        if d.ndim != 2 or d.shape[0] != nx or d.shape[1] < 1:
            raise DimensionMismatch(f"distortion has shape {d.shape}, expected ({nx}, |Xhat|)")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distortion entries must be finite and non-negative")
        d_max = float(d.max()) if self.d_max is None else float(self.d_max)
        if d.max() > d_max:
            raise ValueError(f"distortion entry {d.max()} exceeds d_max = {d_max}")
        object.__setattr__(self, "px", px)
        for name, c in chans.items():
            object.__setattr__(self, name, c)
        object.__setattr__(self, "distortion", _readonly(d))
        object.__setattr__(self, "d_max", d_max)

    @property
    def sizes(self) -> dict:
        return {"X": self.px.size, "Y1": self.py1_x.shape[1], "Y2": self.py2_x.shape[1],
                "E": self.pe_x.shape[1], "Xhat": self.distortion.shape[1]}

    def joint(self) -> JointDist:
        t = np.einsum("x,xa,xb,xe->xabe", self.px, self.py1_x, self.py2_x, self.pe_x)
        return JointDist(t, ("X", "Y1", "Y2", "E"))


def chain_join(source: SourceSpec, aux) -> JointDist:
    """Eight-variable joint p(x)p(y1|x)p(y2|x)p(e|x)p(u1|y1)p(u2|y2)p(v1|u1)p(v2|u2).

    ``aux`` is anything with ``pu1_y1, pu2_y2, pv1_u1, pv2_u2`` channel attributes.
    """
    s = source.sizes
    pairs = [("pu1_y1", "Y1", s["Y1"]), ("pu2_y2", "Y2", s["Y2"]),
             ("pv1_u1", "U1", aux.pu1_y1.shape[1]), ("pv2_u2", "U2", aux.pu2_y2.shape[1])]
    for name, parent, size in pairs:
        rows = getattr(aux, name).shape[0]
        if rows != size:
            raise DimensionMismatch(f"{name} has {rows} rows but |{parent}| = {size}")
    t = np.einsum("x,xa,xb,xe,ac,bd,cf,dg->xabecdfg", source.px, source.py1_x,
                  source.py2_x, source.pe_x, aux.pu1_y1, aux.pu2_y2, aux.pv1_u1, aux.pv2_u2)
    return JointDist(t, AXES)
