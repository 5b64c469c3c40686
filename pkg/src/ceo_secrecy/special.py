"""One-helper special cases: agent 1 observes the source itself.

Each evaluator works from its own small joint law (built here, not through
:func:`chain_join`), so comparing it with the general inner-bound evaluator at
the matching specialization is a genuine cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, product
from typing import Optional

import numpy as np

from .errors import MarkovViolation
from .probcore import (
    JointDist,
    SourceSpec,
    check_markov,
    constant_channel,
    entropy,
    identity_channel,
    mutual_info,
)
from .regions import AuxConfig, best_xhat, corner_points, eval_inner, expected_distortion, pos


@dataclass(frozen=True, eq=False)
class HelperSpec:
    """A source whose first agent sees X directly."""

    source: SourceSpec

    def __post_init__(self):
        s = self.source
        if s.py1_x.shape[0] != s.py1_x.shape[1] or not np.array_equal(s.py1_x, np.eye(s.py1_x.shape[0])):
            raise ValueError("py1_x must be the identity channel for a helper source")

    @classmethod
    def build(cls, px, py2_x, pe_x, distortion=None, d_max=None) -> "HelperSpec":
        px = np.asarray(px, float)
        return cls(SourceSpec(px, np.eye(px.size), py2_x, pe_x, distortion, d_max))

    def without_eve(self) -> "HelperSpec":
        """Same source with Eve's observation replaced by a constant."""
        s = self.source
        return HelperSpec(SourceSpec(s.px, s.py1_x, s.py2_x, constant_channel(s.px.size), s.distortion, s.d_max))


# --------------------------------------------------------------- helper sends Y2 in the clear


@dataclass(frozen=True)
class HelperBounds:
    r1_lb: float
    d1_ub: float
    d2_ub: float
    dist: Optional[float] = None
    r2_lb: Optional[float] = None


def cor2_joint(helper: HelperSpec, pu1_x, pv1_u1) -> JointDist:
    s = helper.source
    t = np.einsum("x,xb,xe,xc,cf->xbecf", s.px, s.py2_x, s.pe_x,
                  np.asarray(pu1_x, float), np.asarray(pv1_u1, float))
    return JointDist(t, ("X", "Y2", "E", "U1", "V1"))


def cor2_from_joint(j: JointDist, xhat_u1_y2, distortion) -> HelperBounds:
    if not check_markov(j, ("V1", "U1", "X", ("E", "Y2"))):
        raise MarkovViolation("joint violates V1 - U1 - X - (E, Y2)")
    return HelperBounds(
        r1_lb=mutual_info(j, "X", "U1", "Y2"),
        d1_ub=pos(entropy(j, "X", ("V1", "E")) - mutual_info(j, "U1", "X", ("V1", "Y2"))),
        d2_ub=entropy(j, "X", ("Y2", "E")),
        dist=expected_distortion(j, xhat_u1_y2, distortion, ("U1", "Y2")),
    )


def cor2_region(helper: HelperSpec, pu1_x, pv1_u1, xhat_u1_y2) -> HelperBounds:
    """Rate, equivocations and distortion when the helper's sequence is recovered losslessly."""
    return cor2_from_joint(cor2_joint(helper, pu1_x, pv1_u1), np.asarray(xhat_u1_y2), helper.source.distortion)


def cor2_general_aux(helper: HelperSpec, pu1_x, pv1_u1, xhat_u1_y2) -> AuxConfig:
    """The general auxiliary choice behind the helper region: V2 = U2 = Y2."""
    k = helper.source.py2_x.shape[1]
    return AuxConfig(pu1_x, identity_channel(k), pv1_u1, identity_channel(k), xhat_u1_y2)


# --------------------------------------------------------------- lossless, helper sequence at the CEO


def cor3_region(helper: HelperSpec, pv1_x) -> HelperBounds:
    """Lossless reconstruction with the helper's sequence available at the CEO.

    The equivocation bound of agent 1 carries no positive part here.
    """
    s = helper.source
    t = np.einsum("x,xb,xe,xf->xbef", s.px, s.py2_x, s.pe_x, np.asarray(pv1_x, float))
    j = JointDist(t, ("X", "Y2", "E", "V1"))
    return HelperBounds(
        r1_lb=entropy(j, "X", "Y2"),
        d1_ub=mutual_info(j, "X", "Y2", "V1") - mutual_info(j, "X", "E", "V1"),
        d2_ub=entropy(j, "X", ("Y2", "E")),
        dist=0.0,
    )


def cor3_general_aux(helper: HelperSpec, pv1_x) -> AuxConfig:
    """U1 = Y1 = X, V2 = U2 = Y2."""
    s = helper.source
    nx, k = s.px.size, s.py2_x.shape[1]
    pu1 = identity_channel(nx)
    return AuxConfig(pu1, identity_channel(k), pv1_x, identity_channel(k), best_xhat(s, pu1, identity_channel(k)))


# --------------------------------------------------------------- lossless, Eve without side information


def cor4_region(helper: HelperSpec, pu2_y2) -> HelperBounds:
    """Lossless reconstruction when Eve has no side information.

    Eve's observation in ``helper`` is ignored.
    """
    s = helper.source
    t = np.einsum("x,xb,bd->xbd", s.px, s.py2_x, np.asarray(pu2_y2, float))
    j = JointDist(t, ("X", "Y2", "U2"))
    return HelperBounds(
        r1_lb=entropy(j, "X", "U2"),
        r2_lb=mutual_info(j, "Y2", "U2"),
        d1_ub=mutual_info(j, "X", "U2"),
        d2_ub=entropy(j, "X", "U2"),
        dist=0.0,
    )


def cor4_general(helper: HelperSpec, pu2_y2) -> tuple:
    """(source, aux) of the general problem that reduces to ``cor4_region``: V1, E constant, U1 = Y1 = X, V2 = U2."""
    src = helper.without_eve().source
    pu2 = np.asarray(pu2_y2, float)
    pu1 = identity_channel(src.px.size)
    aux = AuxConfig(pu1, pu2, constant_channel(src.px.size), identity_channel(pu2.shape[1]),
                    best_xhat(src, pu1, pu2))
    return src, aux


def cor4_fixed_channels(helper: HelperSpec, n_u2: int) -> dict:
    """Channels held fixed when searching the lossless no-side-information family with the general machinery."""
    nx = helper.source.px.size
    return {"pu1_y1": identity_channel(nx), "pv1_u1": constant_channel(nx),
            "pv2_u2": identity_channel(n_u2)}


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All probability vectors over k letters with entries in multiples of 1/resolution."""
    pts = []
    for c in combinations_with_replacement(range(k), resolution):
        pts.append(np.bincount(c, minlength=k))
    return np.array(sorted({tuple(p) for p in pts}), dtype=float) / resolution


def cor4_grid(helper: HelperSpec, resolution: int = 32, n_u2: Optional[int] = None) -> np.ndarray:
    """Points of the lossless no-side-information region (R1, R2, Delta1, Delta2, D) for every grid channel p(u2|y2).

    Vectorized over the product grid of row simplices; ``n_u2`` defaults to |Y2| + 1.
    """
    s = helper.source
    ny = s.py2_x.shape[1]
    k = ny + 1 if n_u2 is None else n_u2
    rows = simplex_grid(k, resolution)
    idx = np.array(list(product(range(len(rows)), repeat=ny)))
    W = rows[idx]                                            # (m, ny, k)
    pxy = s.px[:, None] * s.py2_x                            # (x, y)
    pxu = np.einsum("xy,myk->mxk", pxy, W)
    pu = pxu.sum(axis=1)
    py = pxy.sum(axis=0)
    pyu = py[None, :, None] * W

    def H(p, axes):
        q = np.where(p > 0, p, 1.0)
        return -(p * np.log2(q)).sum(axis=axes)

    hx = H(s.px, 0)
    h_xu, h_u = H(pxu, (1, 2)), H(pu, 1)
    hx_given_u = h_xu - h_u
    i_yu = H(py, 0) + h_u - H(pyu, (1, 2))
    i_xu = hx - hx_given_u
    zeros = np.zeros_like(hx_given_u)
    return np.stack([hx_given_u, i_yu, i_xu, hx_given_u, zeros], axis=1)


# --------------------------------------------------------------- one agent silent


@dataclass(frozen=True)
class ReductionReport:
    reduced: dict
    general: dict
    max_deviation: float
    absent: tuple = ("d2_ub", "dsum_ub", "d2_minus_r1_ub")

    @property
    def ok(self) -> bool:
        return self.max_deviation <= 1e-10


def cor1_reduced(source: SourceSpec, aux: AuxConfig) -> dict:
    """The inner bound with Y1 = X and V2 = U2, constraints on Delta2 removed."""
    HelperSpec(source)
    j = JointDist(np.einsum("x,xb,xe,xc,bd,cf->xbecdf", source.px, source.py2_x, source.pe_x,
                            aux.pu1_y1, aux.pu2_y2, aux.pv1_u1),
                  ("X", "Y2", "E", "U1", "U2", "V1"))
    I = lambda a, b, g=(): mutual_info(j, a, b, g)  # noqa: E731
    h = entropy(j, "X", ("V1", "E"))
    return {
        "r1_lb": I("U1", "X", "U2"),
        "r2_lb": I("U2", "Y2", "U1"),
        "sum_lb": I(("U1", "U2"), ("X", "Y2")),
        "d1_ub": pos(h - I("U1", "X", ("V1", "U2"))),
        "d1_minus_r2_ub": pos(h - I("U2", "Y2", "U1") - I("U1", "X", "V1")),
        "dist": expected_distortion(j, aux.xhat, source.distortion),
    }


def cor1_general_aux(aux: AuxConfig) -> AuxConfig:
    return AuxConfig(aux.pu1_y1, aux.pu2_y2, aux.pv1_u1, identity_channel(aux.pu2_y2.shape[1]), aux.xhat)


def cor1_reduction(source: SourceSpec, aux: AuxConfig) -> ReductionReport:
    """Compare the reduced helper bound with the general inner bound term by term.

    ``aux.pv2_u2`` is replaced by the identity so that V2 = U2.
    """
    red = cor1_reduced(source, aux)
    gen = eval_inner(source, cor1_general_aux(aux)).as_dict()
    dev = max(abs(red[k] - gen[k]) for k in red)
    return ReductionReport(red, {k: gen[k] for k in red}, dev)


# --------------------------------------------------------------- cross-checks


def cor2_deviation(helper: HelperSpec, pu1_x, pv1_u1, xhat) -> float:
    c = cor2_region(helper, pu1_x, pv1_u1, xhat)
    g = eval_inner(helper.source, cor2_general_aux(helper, pu1_x, pv1_u1, xhat))
    return max(abs(c.r1_lb - g.r1_lb), abs(c.d1_ub - g.d1_ub), abs(c.d2_ub - g.d2_ub), abs(c.dist - g.dist))


def cor3_deviation(helper: HelperSpec, pv1_x) -> float:
    c = cor3_region(helper, pv1_x)
    g = eval_inner(helper.source, cor3_general_aux(helper, pv1_x))
    return max(abs(c.r1_lb - g.r1_lb), abs(max(0.0, c.d1_ub) - g.d1_ub), abs(c.d2_ub - g.d2_ub),
               abs(c.dist - g.dist))


def cor4_deviation(helper: HelperSpec, pu2_y2) -> float:
    """Largest gap between ``cor4_region`` and corner 1 / the inner bound of its specialization."""
    c = cor4_region(helper, pu2_y2)
    src, aux = cor4_general(helper, pu2_y2)
    g = eval_inner(src, aux)
    p = corner_points(src, aux)[0].point
    return max(abs(c.r1_lb - g.r1_lb), abs(c.d1_ub - g.d1_ub), abs(c.d2_ub - g.d2_ub),
               abs(c.r1_lb - p.r1), abs(c.r2_lb - p.r2), abs(c.d1_ub - p.d1), abs(c.d2_ub - p.d2),
               abs(c.dist - p.dist))
