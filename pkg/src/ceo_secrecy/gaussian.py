"""Closed-form regions for the quadratic Gaussian CEO problem with an eavesdropper.

Observations are ``Y_j = X + N_j`` and Eve's side information is
``E = X + N_E``.  The regions are parametrized by quantization rates
``r_j = I(U_j; Y_j | X)``; for each (r1, r2) the helpers below return the
right-hand sides of the rate and equivocation constraints.  All logarithms are
base 2, including the differential-entropy constants.

Notation used throughout: ``q_j = 1 - 2^(-2 r_j)`` and ``a_j = var_nj / q_j``
(the effective noise variance of the quantized observation, infinite at
``r_j = 0``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleDistortion

INF = math.inf
LOG_2PIE = math.log2(2 * math.pi * math.e)
# relative slack when comparing a target distortion with the achievable minimum
FEAS_RTOL = 1e-12

CSV_COLUMNS = ("r1", "r2", "R1lb", "R2lb", "SUMlb", "D1ub", "D2ub", "DSUMub",
               "D1mR2ub", "D2mR1ub", "Dmin", "T1", "T2")


def _lg(x: float) -> float:
    return 0.5 * math.log2(x)


@dataclass(frozen=True)
class GaussianParams:
    var_x: float
    var_n1: float
    var_n2: float
    var_ne: float = INF

    def __post_init__(self):
        for name in ("var_x", "var_n1", "var_n2", "var_ne"):
            v = getattr(self, name)
            if not (v > 0) or math.isnan(v):
                raise ValueError(f"{name} must be positive, got {v}")
            if name != "var_ne" and math.isinf(v):
                raise ValueError(f"{name} must be finite")

    @property
    def eve_informed(self) -> bool:
        return not math.isinf(self.var_ne)

    def limit_distortion(self) -> float:
        """Distortion reached when both agents describe their observations perfectly."""
        return 1.0 / (1.0 / self.var_x + 1.0 / self.var_n1 + 1.0 / self.var_n2)


@dataclass(frozen=True)
class QuantRates:
    r1: float
    r2: float

    def __post_init__(self):
        for name in ("r1", "r2"):
            v = getattr(self, name)
            if not (v >= 0) or math.isnan(v):
                raise ValueError(f"{name} must be non-negative, got {v}")

    def q(self) -> tuple:
        # -expm1(-2 r ln2) = 1 - 2^(-2r), accurate for tiny r
        return tuple(-math.expm1(-2.0 * r * math.log(2.0)) for r in (self.r1, self.r2))


def _eff_var(var_n: float, q: float) -> float:
    return INF if q == 0.0 else var_n / q


@dataclass(frozen=True)
class GaussRegionEval:
    r1: float
    r2: float
    r1_lb: float
    r2_lb: float
    sum_lb: float
    d1_ub: float
    d2_ub: float
    dsum_ub: float
    d1_minus_r2_ub: float
    d2_minus_r1_ub: float
    d_min: float
    t1: float = 0.0
    t2: float = 0.0

    def as_row(self) -> tuple:
        return (self.r1, self.r2, self.r1_lb, self.r2_lb, self.sum_lb, self.d1_ub, self.d2_ub,
                self.dsum_ub, self.d1_minus_r2_ub, self.d2_minus_r1_ub, self.d_min, self.t1, self.t2)

    def as_dict(self) -> dict:
        return asdict(self)


def d_min(params: GaussianParams, rates: QuantRates) -> float:
    """Smallest mean-square error the CEO can reach from quantizers at rates (r1, r2)."""
    q1, q2 = rates.q()
    return 1.0 / (1.0 / params.var_x + q1 / params.var_n1 + q2 / params.var_n2)


def _check_feasible(params: GaussianParams, rates: QuantRates, D: float) -> float:
    dm = d_min(params, rates)
    if not D > 0 or D < dm * (1.0 - FEAS_RTOL):
        raise InfeasibleDistortion(
            f"target distortion {D!r} is below the minimum {dm!r} reachable at "
            f"(r1, r2) = ({rates.r1}, {rates.r2}); 1/D exceeds the bound by {1 / D - 1 / dm!r}",
            gap=1.0 / D - 1.0 / dm, limit=dm)
    return dm


def _common(params: GaussianParams, rates: QuantRates, D: float):
    dm = _check_feasible(params, rates, D)
    q1, q2 = rates.q()
    inv_x = 1.0 / params.var_x
    a1 = inv_x + q2 / params.var_n2      # precision of X given U2 only
    a2 = inv_x + q1 / params.var_n1      # precision of X given U1 only
    lgD = _lg(1.0 / D)
    return dm, inv_x, a1, a2, lgD


def region_no_si(params: GaussianParams, rates: QuantRates, D: float) -> GaussRegionEval:
    """Constraint right-hand sides when Eve has no side information."""
    dm, inv_x, p_u2, p_u1, lgD = _common(params, rates, D)
    r1, r2 = rates.r1, rates.r2
    hx = 0.5 * LOG_2PIE + _lg(params.var_x)
    return GaussRegionEval(
        r1=r1, r2=r2,
        r1_lb=r1 + lgD - _lg(p_u2),
        r2_lb=r2 + lgD - _lg(p_u1),
        sum_lb=r1 + r2 + lgD - _lg(inv_x),
        d1_ub=hx - lgD + _lg(p_u2),
        d2_ub=hx - lgD + _lg(p_u1),
        dsum_ub=LOG_2PIE - lgD - _lg(inv_x),
        d1_minus_r2_ub=0.5 * LOG_2PIE - lgD - r2,
        d2_minus_r1_ub=0.5 * LOG_2PIE - lgD - r1,
        d_min=dm,
    )


def t_terms(params: GaussianParams, rates: QuantRates) -> tuple:
    """Equivocation gains (T1, T2) from letting V_j = U_j when Eve's observation is good."""
    if not params.eve_informed or rates.r1 == 0.0 or rates.r2 == 0.0:
        return 0.0, 0.0
    q1, q2 = rates.q()
    e1, e2 = params.var_n1 / q1, params.var_n2 / q2
    s = params.var_ne
    # 1 + (e_j' - s)/(e_j + s) = (e_j + e_j')/(e_j + s)
    t1 = max(0.0, _lg((e1 + e2) / (e1 + s)))
    t2 = max(0.0, _lg((e1 + e2) / (e2 + s)))
    return t1, t2


def cross_term(params: GaussianParams, rates: QuantRates, exact: bool = False) -> float:
    """I(U1; U2) correction used when a T term is active.

    By default this is ``0.5 log((var_x + e1) / (e1 + e2))`` with ``e_j`` the
    effective noise variances.  With ``exact=True`` the mutual information of
    the two jointly Gaussian quantizer outputs is returned instead,
    ``0.5 log((var_x + e1)(var_x + e2) / (var_x (e1 + e2) + e1 e2))``, which is
    symmetric in the agents and never negative.
    """
    q1, q2 = rates.q()
    e1, e2 = _eff_var(params.var_n1, q1), _eff_var(params.var_n2, q2)
    vx = params.var_x
    if math.isinf(e1) or math.isinf(e2):
        return 0.0
    if exact:
        return _lg((vx + e1) * (vx + e2) / (vx * (e1 + e2) + e1 * e2))
    return _lg((vx + e1) / (e1 + e2))


def region_si(params: GaussianParams, rates: QuantRates, D: float,
              exact_cross_term: bool = False) -> GaussRegionEval:
    """Constraint right-hand sides when Eve observes ``E = X + N_E``.

    With ``var_ne = inf`` this returns exactly :func:`region_no_si`.
    """
    if not params.eve_informed:
        return region_no_si(params, rates, D)
    dm, inv_x, p_u2, p_u1, lgD = _common(params, rates, D)
    r1, r2 = rates.r1, rates.r2
    t1, t2 = t_terms(params, rates)
    # h(X|E) in place of h(X)
    hxe = 0.5 * LOG_2PIE - _lg(inv_x + 1.0 / params.var_ne)
    need_cross = t1 > 0 or t2 > 0
    cross = cross_term(params, rates, exact_cross_term) if need_cross else 0.0
    return GaussRegionEval(
        r1=r1, r2=r2,
        r1_lb=r1 + lgD - _lg(p_u2),
        r2_lb=r2 + lgD - _lg(p_u1),
        sum_lb=r1 + r2 + lgD - _lg(inv_x),
        d1_ub=hxe - lgD + _lg(p_u2) + t1,
        d2_ub=hxe - lgD + _lg(p_u1) + t2,
        dsum_ub=2 * hxe - lgD + _lg(inv_x) + t1 + t2 + (cross if t1 + t2 > 0 else 0.0),
        # the +0.5 log(1/var_x) term keeps the var_ne -> inf limit equal to the no-SI region
        d1_minus_r2_ub=hxe + _lg(inv_x) - lgD - r2 + t1 + (cross if t1 > 0 else 0.0),
        d2_minus_r1_ub=hxe + _lg(inv_x) - lgD - r1 + t2 + (cross if t2 > 0 else 0.0),
        d_min=dm, t1=t1, t2=t2,
    )


def region(params: GaussianParams, rates: QuantRates, D: float) -> GaussRegionEval:
    return region_si(params, rates, D) if params.eve_informed else region_no_si(params, rates, D)


def q_grid(grid: int, q_max: float, q_min: float = 1e-3) -> np.ndarray:
    """Zero followed by ``grid - 1`` log-spaced values of q in [q_min, q_max]."""
    if grid < 2:
        raise ValueError("grid must be at least 2")
    return np.concatenate([[0.0], np.geomspace(min(q_min, q_max), q_max, grid - 1)])


def rate_from_q(q: float) -> float:
    return 0.0 if q <= 0.0 else -0.5 * math.log2(1.0 - q)


def boundary_sweep(params: GaussianParams, D: float, grid: int, r_max: float = 4.0) -> list:
    """Evaluate the region on a grid of (r1, r2), keeping only pairs that reach distortion D.

    The grid is log-spaced in ``q = 1 - 2^(-2r)`` up to ``r_max``; it is
    stretched when D is so close to the two-sided limit that no pair up to
    ``r_max`` reaches it.
    """
    limit = params.limit_distortion()
    if not D > limit * (1.0 + FEAS_RTOL):
        raise InfeasibleDistortion(
            f"target distortion {D!r} is not above the limit {limit!r} reached at infinite rates",
            gap=1.0 / D - 1.0 / limit if D > 0 else INF, limit=limit)
    q_max = -math.expm1(-2.0 * r_max * math.log(2.0))
    inv_x, w1, w2 = 1.0 / params.var_x, 1.0 / params.var_n1, 1.0 / params.var_n2
    q_need = (1.0 / D - inv_x) / (w1 + w2)
    if q_need > q_max:
        q_max = 1.0 - (1.0 - q_need) / 4.0
    qs = q_grid(grid, q_max)
    rs = [rate_from_q(q) for q in qs]
    rows = []
    for q1, r1 in zip(qs, rs):
        for q2, r2 in zip(qs, rs):
            if 1.0 / D <= (inv_x + q1 * w1 + q2 * w2) * (1.0 + FEAS_RTOL):
                rows.append(region(params, QuantRates(r1, r2), D))
    if not rows:
        raise InfeasibleDistortion(f"no grid pair reaches distortion {D!r}", gap=0.0, limit=limit)
    return rows


def equiv_to_mmse(delta: float) -> float:
    """Lower bound on Eve's mean-square error implied by an equivocation of ``delta`` bits."""
    return 2.0 ** (2.0 * delta) / (2 * math.pi * math.e)


def mmse_to_equiv(theta: float) -> float:
    return 0.5 * math.log2(2 * math.pi * math.e * theta)


# --- two-dimensional projections of a sweep, used for the distortion-ordering plots ---

SLICES = ("R1,R2", "Delta1,R2", "Delta1,Delta2", "Delta2,R1")


def _arr(rows: list, name: str) -> np.ndarray:
    return np.array([getattr(r, name) for r in rows])


def slice_envelope(rows: list, slice_name: str, xs) -> np.ndarray:
    """Boundary of the projected region evaluated at abscissae ``xs``.

    ``"R1,R2"`` gives the least R2 usable with rate R1 (``inf`` where none);
    the other slices give the largest equivocation on the vertical axis
    (``-inf`` where none) with all remaining coordinates free.
    """
    xs = np.asarray(xs, dtype=float)[:, None]
    if slice_name == "R1,R2":
        r1lb, r2lb, slb = _arr(rows, "r1_lb"), _arr(rows, "r2_lb"), _arr(rows, "sum_lb")
        val = np.maximum(r2lb, slb - xs)
        val = np.where(xs >= r1lb, val, np.inf)
        return val.min(axis=1)
    if slice_name in ("Delta1,R2", "Delta2,R1"):
        a, b = ("d1_ub", "d1_minus_r2_ub") if slice_name == "Delta1,R2" else ("d2_ub", "d2_minus_r1_ub")
        lb = _arr(rows, "r2_lb" if slice_name == "Delta1,R2" else "r1_lb")
        val = np.minimum(np.minimum(_arr(rows, a), _arr(rows, b) + xs), _arr(rows, "dsum_ub"))
        val = np.where(xs >= lb, val, -np.inf)
        return val.max(axis=1)
    if slice_name == "Delta1,Delta2":
        val = np.minimum(_arr(rows, "d2_ub"), _arr(rows, "dsum_ub") - xs)
        val = np.where(xs <= _arr(rows, "d1_ub"), val, -np.inf)
        return val.max(axis=1)
    raise ValueError(f"unknown slice {slice_name!r}; choose from {SLICES}")


def slice_dominated(small: np.ndarray, large: np.ndarray, slice_name: str, tol: float = 1e-9) -> bool:
    """True when the smaller-distortion envelope never beats the larger-distortion one."""
    if slice_name == "R1,R2":
        # rates: the tighter target needs at least as much
        ok = (small >= large - tol) | np.isinf(small)
    else:
        ok = (small <= large + tol) | np.isneginf(small)
    return bool(np.all(ok))
