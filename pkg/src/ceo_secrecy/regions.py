"""Inner/outer bound evaluators for the two-agent CEO problem with an eavesdropper.

For a fixed choice of auxiliary channels the inner bound is a polytope in
(R1, R2, D1, D2, D) described by the right-hand sides collected in a
:class:`BoundEval`; the outer bound has the same rate and distortion terms but
simpler equivocation terms and no joint equivocation constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .errors import CardinalityError, DimensionMismatch, MarkovViolation
from .probcore import (
    JointDist,
    SourceSpec,
    as_cond,
    chain_join,
    check_markov,
    constant_channel,
    entropy,
    identity_channel,
    mutual_info,
)

SLACK_TOL = 1e-10


def pos(x: float) -> float:
    return x if x > 0.0 else 0.0


@dataclass(frozen=True, eq=False)
class AuxConfig:
    """Auxiliary test channels p(u1|y1), p(u2|y2), p(v1|u1), p(v2|u2) and a reconstruction table."""

    pu1_y1: np.ndarray
    pu2_y2: np.ndarray
    pv1_u1: np.ndarray
    pv2_u2: np.ndarray
    xhat: np.ndarray

    def __post_init__(self):
        for name in ("pu1_y1", "pu2_y2", "pv1_u1", "pv2_u2"):
            object.__setattr__(self, name, as_cond(getattr(self, name), name))
        if self.pv1_u1.shape[0] != self.pu1_y1.shape[1]:
            raise DimensionMismatch(f"pv1_u1 has {self.pv1_u1.shape[0]} rows but |U1| = {self.pu1_y1.shape[1]}")
        if self.pv2_u2.shape[0] != self.pu2_y2.shape[1]:
            raise DimensionMismatch(f"pv2_u2 has {self.pv2_u2.shape[0]} rows but |U2| = {self.pu2_y2.shape[1]}")
        xh = np.asarray(self.xhat)
        if xh.shape != (self.pu1_y1.shape[1], self.pu2_y2.shape[1]):
            raise DimensionMismatch(f"xhat has shape {xh.shape}, expected (|U1|, |U2|)")
        if not np.issubdtype(xh.dtype, np.integer):
            if not np.all(xh == np.round(xh)):
                raise ValueError("xhat must hold integer letters")
        xh = np.array(xh, dtype=np.int64)
        if np.any(xh < 0):
            raise ValueError("xhat holds a negative letter")
        xh.setflags(write=False)
        object.__setattr__(self, "xhat", xh)

    @property
    def sizes(self) -> dict:
        return {"U1": self.pu1_y1.shape[1], "U2": self.pu2_y2.shape[1],
                "V1": self.pv1_u1.shape[1], "V2": self.pv2_u2.shape[1]}

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist()
                for name in ("pu1_y1", "pu2_y2", "pv1_u1", "pv2_u2", "xhat")}

    @classmethod
    def from_dict(cls, d: dict) -> "AuxConfig":
        return cls(d["pu1_y1"], d["pu2_y2"], d["pv1_u1"], d["pv2_u2"], d["xhat"])

    @classmethod
    def trivial(cls, source: SourceSpec) -> "AuxConfig":
        """All auxiliaries constant, reconstruction the best constant letter."""
        s = source.sizes
        pu1, pu2 = constant_channel(s["Y1"]), constant_channel(s["Y2"])
        return cls(pu1, pu2, constant_channel(1), constant_channel(1), best_xhat(source, pu1, pu2))

    @classmethod
    def identity(cls, source: SourceSpec, secret_layer: bool = False) -> "AuxConfig":
        """U_j = Y_j; V_j constant, or V_j = U_j when ``secret_layer`` is set."""
        s = source.sizes
        pu1, pu2 = identity_channel(s["Y1"]), identity_channel(s["Y2"])
        if secret_layer:
            pv1, pv2 = identity_channel(s["Y1"]), identity_channel(s["Y2"])
        else:
            pv1, pv2 = constant_channel(s["Y1"]), constant_channel(s["Y2"])
        return cls(pu1, pu2, pv1, pv2, best_xhat(source, pu1, pu2))


def best_xhat(source: SourceSpec, pu1_y1, pu2_y2) -> np.ndarray:
    """Per-(u1, u2) letter minimizing expected distortion; ties go to the lowest index."""
    pxu = np.einsum("x,xa,xb,ac,bd->xcd", source.px, source.py1_x, source.py2_x,
                    np.asarray(pu1_y1, float), np.asarray(pu2_y2, float))
    cost = np.einsum("xcd,xk->cdk", pxu, source.distortion)
    return np.argmin(cost, axis=2)


def expected_distortion(joint: JointDist, xhat: np.ndarray, distortion: np.ndarray,
                        u_axes=("U1", "U2")) -> float:
    """E[d(X, xhat(U1, U2))]."""
    p = joint._marginal_array(("X",) + tuple(u_axes))
    d = np.asarray(distortion)[:, np.asarray(xhat)]
    return float((p * d).sum())


@dataclass(frozen=True)
class RegionPoint:
    r1: float
    r2: float
    d1: float
    d2: float
    dist: float

    def as_array(self) -> np.ndarray:
        return np.array([self.r1, self.r2, self.d1, self.d2, self.dist])

    @classmethod
    def from_array(cls, a) -> "RegionPoint":
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class BoundEval:
    """Right-hand sides of one inner- or outer-bound constraint set.

    ``dsum_ub`` is None for the outer bound, which has no joint equivocation
    constraint.
    """

    r1_lb: float
    r2_lb: float
    sum_lb: float
    d1_ub: float
    d2_ub: float
    dsum_ub: Optional[float]
    d1_minus_r2_ub: float
    d2_minus_r1_ub: float
    dist: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def violations(self, p: RegionPoint, tol: float = 1e-9) -> list:
        out = []
        checks = [
            ("R1", self.r1_lb - p.r1),
            ("R2", self.r2_lb - p.r2),
            ("R1+R2", self.sum_lb - p.r1 - p.r2),
            ("Delta1", p.d1 - self.d1_ub),
            ("Delta2", p.d2 - self.d2_ub),
            ("Delta1-R2", p.d1 - p.r2 - self.d1_minus_r2_ub),
            ("Delta2-R1", p.d2 - p.r1 - self.d2_minus_r1_ub),
            ("D", self.dist - p.dist),
        ]
        if self.dsum_ub is not None:
            checks.append(("Delta1+Delta2", p.d1 + p.d2 - self.dsum_ub))
        for name, excess in checks:
            if excess > tol:
                out.append(name)
        return out

    def admits(self, p: RegionPoint, tol: float = 1e-9) -> bool:
        return not self.violations(p, tol)

    def operating_point(self, rate_first: int = 1, equiv_first: int = 1) -> RegionPoint:
        """A point of the constraint set chosen greedily.

        The rate of agent ``rate_first`` is set to its lower bound and the other
        rate to whatever the sum constraint then needs; the equivocation of
        agent ``equiv_first`` is maximized first, then the other one.
        """
        if rate_first == 1:
            r1 = self.r1_lb
            r2 = max(self.r2_lb, self.sum_lb - r1)
        else:
            r2 = self.r2_lb
            r1 = max(self.r1_lb, self.sum_lb - r2)
        cap = np.inf if self.dsum_ub is None else self.dsum_ub
        cap1 = min(self.d1_ub, self.d1_minus_r2_ub + r2)
        cap2 = min(self.d2_ub, self.d2_minus_r1_ub + r1)
        if equiv_first == 1:
            d1 = max(0.0, min(cap1, cap))
            d2 = max(0.0, min(cap2, cap - d1))
        else:
            d2 = max(0.0, min(cap2, cap))
            d1 = max(0.0, min(cap1, cap - d2))
        return RegionPoint(r1, r2, d1, d2, self.dist)


def cardinality_violations(aux: AuxConfig, mode: str, source: SourceSpec) -> list:
    if mode not in ("inner", "outer"):
        raise ValueError(f"mode must be 'inner' or 'outer', got {mode!r}")
    a, b = (9, 5) if mode == "inner" else (7, 3)
    s, k = source.sizes, aux.sizes
    out = []
    for j in ("1", "2"):
        ny = s["Y" + j]
        if k["V" + j] > ny + a:
            out.append(f"|V{j}| = {k['V' + j]} > |Y{j}|+{a} = {ny + a}")
        if k["U" + j] > (ny + a) * (ny + b):
            out.append(f"|U{j}| = {k['U' + j]} > (|Y{j}|+{a})(|Y{j}|+{b}) = {(ny + a) * (ny + b)}")
    return out


def check_cardinality(aux: AuxConfig, mode: str, source: SourceSpec) -> bool:
    return not cardinality_violations(aux, mode, source)


def _check_aux(source: SourceSpec, aux: AuxConfig, mode: str):
    bad = cardinality_violations(aux, mode, source)
    if bad:
        raise CardinalityError(f"{mode} cardinality bound exceeded: " + "; ".join(bad))
    nxh = source.sizes["Xhat"]
    if aux.xhat.max() >= nxh:
        raise DimensionMismatch(f"xhat uses letter {aux.xhat.max()} but |Xhat| = {nxh}")
    if aux.pu1_y1.shape[0] != source.sizes["Y1"] or aux.pu2_y2.shape[0] != source.sizes["Y2"]:
        # chain_join names the axis; call it for the message
        chain_join(source, aux)


def inner_bounds(j: JointDist, xhat, distortion) -> BoundEval:
    """Inner-bound right-hand sides evaluated on an eight-variable joint."""
    I, H = (lambda a, b, g=(): mutual_info(j, a, b, g)), (lambda a, g=(): entropy(j, a, g))
    hx_v1e, hx_v2e = H("X", ("V1", "E")), H("X", ("V2", "E"))
    leak1 = I("U1", "Y1", ("V1", "X"))
    leak2 = I("U2", "Y2", ("V2", "X"))
    r1 = I("U1", "Y1", "U2")
    r2 = I("U2", "Y2", "U1")
    return BoundEval(
        r1_lb=r1,
        r2_lb=r2,
        sum_lb=I(("U1", "U2"), ("Y1", "Y2")),
        d1_ub=pos(hx_v1e - I("U1", "Y1", ("V1", "U2")) + leak1),
        d2_ub=pos(hx_v2e - I("U2", "Y2", ("V2", "U1")) + leak2),
        dsum_ub=pos(hx_v1e + hx_v2e - I(("U1", "U2"), ("Y1", "Y2"), ("V1", "V2")) + leak1 + leak2),
        d1_minus_r2_ub=pos(hx_v1e - r2 - I("U1", "Y1", "V1") + leak1),
        d2_minus_r1_ub=pos(hx_v2e - r1 - I("U2", "Y2", "V2") + leak2),
        dist=expected_distortion(j, xhat, distortion),
    )


OUTER_CHAINS = (
    ("V1", "U1", "Y1", ("X", "E", "Y2")),
    ("V2", "U2", "Y2", ("X", "E", "Y1")),
)


def outer_bounds(j: JointDist, xhat, distortion) -> BoundEval:
    """Outer-bound right-hand sides; the joint must satisfy both agent-side Markov chains."""
    for chain in OUTER_CHAINS:
        if not check_markov(j, chain):
            raise MarkovViolation(f"joint violates the Markov chain {chain}")
    I, H = (lambda a, b, g=(): mutual_info(j, a, b, g)), (lambda a, g=(): entropy(j, a, g))
    hxe = H("X", "E")
    i1, i2 = I("X", "V1", "E"), I("X", "V2", "E")
    return BoundEval(
        r1_lb=I("U1", "Y1", "U2"),
        r2_lb=I("U2", "Y2", "U1"),
        sum_lb=I(("U1", "U2"), ("Y1", "Y2")),
        d1_ub=hxe - i1,
        d2_ub=hxe - i2,
        dsum_ub=None,
        d1_minus_r2_ub=hxe - i1 - I("X", "V2", ("V1", "E")),
        d2_minus_r1_ub=hxe - i2 - I("X", "V1", ("V2", "E")),
        dist=expected_distortion(j, xhat, distortion),
    )


def eval_inner(source: SourceSpec, aux: AuxConfig) -> BoundEval:
    _check_aux(source, aux, "inner")
    return inner_bounds(chain_join(source, aux), aux.xhat, source.distortion)


def eval_outer(source: SourceSpec, aux: AuxConfig) -> BoundEval:
    _check_aux(source, aux, "outer")
    return outer_bounds(chain_join(source, aux), aux.xhat, source.distortion)


# decoding orders of the six corner points, in table order
DECODING_ORDERS = (
    ("V2", "U2", "V1", "U1"),
    ("V2", "V1", "U2", "U1"),
    ("V1", "V2", "U2", "U1"),
    ("V1", "U1", "V2", "U2"),
    ("V1", "V2", "U1", "U2"),
    ("V2", "V1", "U1", "U2"),
)


@dataclass(frozen=True)
class CornerPoint:
    order: tuple
    point: RegionPoint


def corner_points(source: SourceSpec, aux: AuxConfig) -> list:
    """The six time-sharing corner points, one per decoding order."""
    _check_aux(source, aux, "inner")
    j = chain_join(source, aux)
    I, H = (lambda a, b, g=(): mutual_info(j, a, b, g)), (lambda a, g=(): entropy(j, a, g))
    dist = expected_distortion(j, aux.xhat, source.distortion)
    hx_v1e, hx_v2e = H("X", ("V1", "E")), H("X", ("V2", "E"))
    leak1, leak2 = I("U1", "Y1", ("V1", "X")), I("U2", "Y2", ("V2", "X"))

    def eq1(cond):
        return pos(hx_v1e - I("U1", "Y1", cond) + leak1)

    def eq2(cond):
        return pos(hx_v2e - I("U2", "Y2", cond) + leak2)

    rates = [
        (I("U1", "Y1", "U2"), I("U2", "Y2")),
        (I("V1", "Y1", "V2") + I("U1", "Y1", ("V1", "U2")), I("V2", "Y2") + I("U2", "Y2", ("V1", "V2"))),
        (I("V1", "Y1") + I("U1", "Y1", ("V1", "U2")), I("U2", "Y2", "V1")),
        (I("U1", "Y1"), I("U2", "Y2", "U1")),
        (I("V1", "Y1") + I("U1", "Y1", ("V1", "V2")), I("V2", "Y2", "V1") + I("U2", "Y2", ("V2", "U1"))),
        (I("U1", "Y1", "V2"), I("V2", "Y2") + I("U2", "Y2", ("V2", "U1"))),
    ]
    equivs = [
        (eq1(("V1", "U2")), eq2("V2")),
        (eq1(("V1", "U2")), eq2(("V1", "V2"))),
        (eq1(("V1", "U2")), eq2(("V1", "V2"))),
        (eq1("V1"), eq2(("V2", "U1"))),
        (eq1(("V1", "V2")), eq2(("V2", "U1"))),
        (eq1(("V1", "V2")), eq2(("V2", "U1"))),
    ]
    return [CornerPoint(order, RegionPoint(r[0], r[1], e[0], e[1], dist))
            for order, r, e in zip(DECODING_ORDERS, rates, equivs)]


# coefficient rows over (R_V1, R_U1, R_V2, R_U2)
_SPLIT_ROWS = {
    "R1": (1, 1, 0, 0),
    "R2": (0, 0, 1, 1),
    "R1+R2": (1, 1, 1, 1),
    "RU1": (0, 1, 0, 0),
    "RU2": (0, 0, 0, 1),
    "RU1+RU2": (0, 1, 0, 1),
    "R1+RU2": (1, 1, 0, 1),
    "R2+RU1": (0, 1, 1, 1),
}


def rate_split_constraints(source: SourceSpec, aux: AuxConfig) -> dict:
    """Map constraint name -> (coefficients over (R_V1, R_U1, R_V2, R_U2), lower bound)."""
    j = chain_join(source, aux)
    I = lambda a, b, g=(): mutual_info(j, a, b, g)  # noqa: E731
    uu, yy = ("U1", "U2"), ("Y1", "Y2")
    rhs = {
        "R1": I("U1", "Y1", "U2"),
        "R2": I("U2", "Y2", "U1"),
        "R1+R2": I(uu, yy),
        "RU1": I("U1", "Y1", ("V1", "U2")),
        "RU2": I("U2", "Y2", ("V2", "U1")),
        "RU1+RU2": I(uu, yy, ("V1", "V2")),
        "R1+RU2": I(uu, yy, "V2"),
        "R2+RU1": I(uu, yy, "V1"),
    }
    return {k: (np.array(_SPLIT_ROWS[k], float), v) for k, v in rhs.items()}


def rate_split_feasible(source: SourceSpec, aux: AuxConfig, rv1: float, ru1: float,
                        rv2: float, ru2: float, tol: float = SLACK_TOL):
    """Check the layered rate split against the decoding constraints.

    Returns ``(ok, violated)`` where ``violated`` lists constraint names.
    """
    rates = np.array([rv1, ru1, rv2, ru2], float)
    if np.any(rates < 0):
        raise ValueError("rates must be non-negative")
    violated = [name for name, (c, b) in rate_split_constraints(source, aux).items()
                if c @ rates - b < -tol]
    return not violated, violated
