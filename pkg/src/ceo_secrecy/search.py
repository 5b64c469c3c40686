"""Random-restart search over auxiliary channels, frontier tracing and outer-region membership.

Objectives are ordered ``(R1, R2, Delta1, Delta2, D)``.  Rates and distortion
are to be minimized, equivocations maximized; :data:`SENSE` turns every
coordinate into a larger-is-better score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CardinalityError
from .probcore import SourceSpec, constant_channel, entropy
from .regions import (
    AuxConfig,
    BoundEval,
    RegionPoint,
    best_xhat,
    cardinality_violations,
    eval_inner,
    eval_outer,
)

OBJECTIVES = ("R1", "R2", "Delta1", "Delta2", "D")
SENSE = np.array([-1.0, -1.0, 1.0, 1.0, -1.0])
CHANNELS = ("pu1_y1", "pu2_y2", "pv1_u1", "pv2_u2")
HULL_STEPS = 64
DOM_TOL = 1e-9


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 4
    refine_iters: int = 200
    perturb_scale: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.refine_iters < 1:
            raise ValueError("restarts and refine_iters must be at least 1")
        if not 0.0 < self.perturb_scale <= 1.0:
            raise ValueError("perturb_scale must lie in (0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def objective_index(name) -> int:
    if isinstance(name, (int, np.integer)):
        if not 0 <= name < len(OBJECTIVES):
            raise ValueError(f"objective index {name} out of range")
        return int(name)
    try:
        return OBJECTIVES.index(name)
    except ValueError:
        raise ValueError(f"unknown objective {name!r}; choose from {OBJECTIVES}") from None


def default_cards(source: SourceSpec) -> dict:
    s = source.sizes
    return {"U1": s["Y1"], "U2": s["Y2"], "V1": s["Y1"], "V2": s["Y2"]}


def _rows(rng: np.random.Generator, n_in: int, n_out: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n_out), size=n_in)


def sample_aux(source: SourceSpec, cards: Optional[dict] = None, seed=0, mode: str = "inner",
               fixed: Optional[dict] = None) -> AuxConfig:
    """Draw every free channel row from a flat Dirichlet law.

    ``fixed`` maps channel names (``pu1_y1`` ...) to matrices that are used as
    given; their output sizes override ``cards``.
    """
    cards = dict(default_cards(source) if cards is None else cards)
    fixed = dict(fixed or {})
    s = source.sizes
    for name, var in zip(CHANNELS, ("U1", "U2", "V1", "V2")):
        if name in fixed:
            cards[var] = np.asarray(fixed[name]).shape[1]
    rng = np.random.default_rng(seed)
    shapes = {"pu1_y1": (s["Y1"], cards["U1"]), "pu2_y2": (s["Y2"], cards["U2"]),
              "pv1_u1": (cards["U1"], cards["V1"]), "pv2_u2": (cards["U2"], cards["V2"])}
    probe = AuxConfig(*(constant_channel(shapes[c][0], shapes[c][1]) for c in CHANNELS),
                      np.zeros((cards["U1"], cards["U2"]), int))
    bad = cardinality_violations(probe, mode, source)
    if bad:
        raise CardinalityError("requested alphabet sizes exceed the caps: " + "; ".join(bad))
    chans = {c: (np.asarray(fixed[c], float) if c in fixed else _rows(rng, *shapes[c])) for c in CHANNELS}
    return AuxConfig(**chans, xhat=best_xhat(source, chans["pu1_y1"], chans["pu2_y2"]))


def with_channel(source: SourceSpec, aux: AuxConfig, name: str, value: np.ndarray) -> AuxConfig:
    chans = {c: getattr(aux, c) for c in CHANNELS}
    chans[name] = value
    return AuxConfig(**chans, xhat=best_xhat(source, chans["pu1_y1"], chans["pu2_y2"]))


def perturb(source: SourceSpec, aux: AuxConfig, rng: np.random.Generator, scale: float,
            frozen: Sequence[str] = ()) -> AuxConfig:
    """Move one row of one free channel.

    Most moves mix the row with a fresh Dirichlet draw; one in five snaps it to
    a single letter so deterministic channels stay reachable.
    """
    free = [c for c in CHANNELS if c not in frozen and getattr(aux, c).shape[1] > 1]
    if not free:
        return aux
    name = free[rng.integers(len(free))]
    m = np.array(getattr(aux, name))
    i = rng.integers(m.shape[0])
    if rng.random() < 0.2:
        m[i] = 0.0
        m[i, rng.integers(m.shape[1])] = 1.0
    else:
        m[i] = (1.0 - scale) * m[i] + scale * rng.dirichlet(np.ones(m.shape[1]))
        m[i] /= m[i].sum()
    return with_channel(source, aux, name, m)


def operating_preferences(weights) -> tuple:
    w = np.asarray(weights, float)
    return (1 if w[0] >= w[1] else 2), (1 if w[2] >= w[3] else 2)


def score(point: RegionPoint, weights) -> float:
    return float(np.dot(np.asarray(weights, float) * SENSE, point.as_array()))


@dataclass
class OptResult:
    point: RegionPoint
    aux: AuxConfig
    bounds: BoundEval
    objective: float
    evaluations: int
    accepted: int
    restart: int
    status: str = "iterations-exhausted"


def axes_preferences(axes: tuple) -> tuple:
    """Operating-point preferences that favour the objectives being plotted."""
    rate_first = 2 if (1 in axes and 0 not in axes) else 1
    equiv_first = 2 if (3 in axes and 2 not in axes) else 1
    return rate_first, equiv_first


def scalarized_optimize(source: SourceSpec, weights, budget: SearchBudget, cards: Optional[dict] = None,
                        mode: str = "inner", fixed: Optional[dict] = None,
                        preferences: Optional[tuple] = None) -> OptResult:
    """Hill-climb a weighted score of the operating point over auxiliary channels.

    The score is ``-w0 R1 - w1 R2 + w2 Delta1 + w3 Delta2 - w4 D`` taken at the
    :meth:`BoundEval.operating_point` of each candidate, so it always refers to
    a point that the evaluated bound actually contains.  ``refine_iters``
    counts evaluations per restart, including the initial sample.
    ``preferences`` overrides the (rate_first, equiv_first) pair otherwise
    read off the weights.
    """
    w = np.asarray(weights, float)
    if w.shape != (5,) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be five finite numbers")
    evaluate = eval_inner if mode == "inner" else eval_outer
    pref = operating_preferences(w) if preferences is None else tuple(preferences)
    frozen = tuple(fixed or ())
    best: Optional[OptResult] = None
    for r in range(budget.restarts):
        aux = sample_aux(source, cards, [budget.seed, r, 0], mode, fixed)
        rng = np.random.default_rng([budget.seed, r, 1])
        b = evaluate(source, aux)
        pt = b.operating_point(*pref)
        cur = OptResult(pt, aux, b, score(pt, w), 1, 0, r)
        evals, accepted = 1, 0
        while evals < budget.refine_iters:
            cand = perturb(source, cur.aux, rng, budget.perturb_scale, frozen)
            evals += 1
            cb = evaluate(source, cand)
            cp = cb.operating_point(*pref)
            cs = score(cp, w)
            if cs >= cur.objective:
                accepted += 1
                cur = OptResult(cp, cand, cb, cs, evals, accepted, r)
        cur.evaluations, cur.accepted = evals, accepted
        if best is None or cur.objective > best.objective:
            best = cur
    return best


# ---------------------------------------------------------------- frontier


def dominates(a: np.ndarray, b: np.ndarray, tol: float = DOM_TOL) -> bool:
    """a is at least as good as b everywhere and strictly better somewhere (beyond tol)."""
    da, db = SENSE * a, SENSE * b
    return bool(np.all(da >= db - tol) and np.any(da > db + tol))


def weakly_dominates(a: np.ndarray, b: np.ndarray, tol: float = DOM_TOL) -> bool:
    return bool(np.all(SENSE * a >= SENSE * b - tol))


def pareto_filter(points: np.ndarray, tol: float = DOM_TOL) -> list:
    """Indices of points not dominated by any other point."""
    keep = []
    for i, p in enumerate(points):
        if not any(dominates(q, p, tol) for j, q in enumerate(points) if j != i):
            keep.append(i)
    return keep


def hull_filter(points: np.ndarray, steps: int = HULL_STEPS, tol: float = DOM_TOL) -> list:
    """Drop points dominated by a pairwise convex combination of the remaining ones."""
    lam = np.arange(1, steps) / steps
    alive = list(range(len(points)))
    for i in range(len(points)):
        others = [j for j in alive if j != i]
        p = points[i]
        hit = False
        for a_pos, a in enumerate(others):
            for b in others[a_pos + 1:]:
                combos = lam[:, None] * points[a] + (1 - lam[:, None]) * points[b]
                s = combos * SENSE
                ok = np.all(s >= SENSE * p - tol, axis=1) & np.any(s > SENSE * p + tol, axis=1)
                if ok.any():
                    hit = True
                    break
            if hit:
                break
        if hit:
            alive.remove(i)
    return alive


@dataclass
class FrontierPoint:
    point: RegionPoint
    config_id: str
    aux: AuxConfig
    weights: tuple


@dataclass
class Frontier:
    axes: tuple
    points: list
    hull: list = field(default_factory=list)
    mode: str = "inner"

    def slice(self, a=None, b=None) -> list:
        """Two-objective Pareto view of the hull, sorted by the first objective."""
        ia = objective_index(self.axes[0] if a is None else a)
        ib = objective_index(self.axes[1] if b is None else b)
        pts = sorted({(p.as_array()[ia], p.as_array()[ib]) for p in self.hull})
        sense = SENSE[[ia, ib]]
        out = []
        for x, y in pts:
            v = np.array([x, y]) * sense
            if not any(np.all(np.array(q) * sense >= v) and np.any(np.array(q) * sense > v)
                       for q in pts if q != (x, y)):
                out.append((x, y))
        return out

    def csv_rows(self) -> list:
        return [(*fp.point.as_array().tolist(), fp.config_id) for fp in self.points]

    def provenance(self) -> dict:
        return {
            "axes": [OBJECTIVES[i] for i in self.axes],
            "mode": self.mode,
            "configs": {fp.config_id: {"weights": list(fp.weights), "aux": fp.aux.to_dict(),
                                       "point": fp.point.as_array().tolist()} for fp in self.points},
            "hull": [p.as_array().tolist() for p in self.hull],
        }


def sweep_weights(axes: tuple, grid: int, base=None) -> list:
    """Weight vectors rotating from the first axis to the second."""
    base = np.zeros(5) if base is None else np.asarray(base, float)
    out = []
    for k in range(grid):
        theta = 0.25 * math.pi if grid == 1 else 0.5 * math.pi * k / (grid - 1)
        w = base.copy()
        w[axes[0]] = math.cos(theta)
        w[axes[1]] = math.sin(theta)
        out.append(w)
    return out


def trace_frontier(source: SourceSpec, axes, grid: int, budget: SearchBudget, cards: Optional[dict] = None,
                   mode: str = "inner", base_weights=None, fixed: Optional[dict] = None) -> Frontier:
    """Sweep weights between two objectives and keep the non-dominated results.

    ``base_weights`` sets the weight of the remaining objectives (zero by
    default).  Every weight uses the same restart seeds and the operating
    point rule depends only on ``axes``, so a one-sample budget yields a single
    point.
    """
    ax = tuple(objective_index(a) for a in axes)
    if len(ax) != 2 or ax[0] == ax[1]:
        raise ValueError("axes must name two distinct objectives")
    if grid < 1:
        raise ValueError("grid must be at least 1")
    raw: list = []
    seen = {}
    for w in sweep_weights(ax, grid, base_weights):
        res = scalarized_optimize(source, w, budget, cards, mode, fixed, axes_preferences(ax))
        key = tuple(np.round(res.point.as_array(), 12))
        if key in seen:
            continue
        seen[key] = True
        raw.append(FrontierPoint(res.point, f"cfg{len(raw):04d}", res.aux, tuple(w.tolist())))
    arr = np.array([fp.point.as_array() for fp in raw])
    kept = [raw[i] for i in pareto_filter(arr)]
    karr = np.array([fp.point.as_array() for fp in kept])
    hull = [kept[i].point for i in hull_filter(karr)]
    return Frontier(ax, kept, hull, mode)


# ---------------------------------------------------------------- outer membership


@dataclass
class Membership:
    verdict: str
    reason: str
    witness: Optional[AuxConfig] = None


def bayes_distortion(source: SourceSpec) -> float:
    """Least expected distortion of any estimate built from (Y1, Y2)."""
    pxy = np.einsum("x,xa,xb->xab", source.px, source.py1_x, source.py2_x)
    cost = np.einsum("xab,xk->abk", pxy, source.distortion)
    return float(cost.min(axis=2).sum())


def _v_constant(source: SourceSpec, pu1, pu2) -> AuxConfig:
    pu1, pu2 = np.asarray(pu1, float), np.asarray(pu2, float)
    return AuxConfig(pu1, pu2, constant_channel(pu1.shape[1]), constant_channel(pu2.shape[1]),
                     best_xhat(source, pu1, pu2))


def _excess(b: BoundEval, p: RegionPoint) -> float:
    ex = [b.r1_lb - p.r1, b.r2_lb - p.r2, b.sum_lb - p.r1 - p.r2, p.d1 - b.d1_ub, p.d2 - b.d2_ub,
          p.d1 - p.r2 - b.d1_minus_r2_ub, p.d2 - p.r1 - b.d2_minus_r1_ub, b.dist - p.dist]
    return max(ex)


def outer_membership(source: SourceSpec, point: RegionPoint, budget: SearchBudget,
                     hints: Sequence[AuxConfig] = (), tol: float = DOM_TOL) -> Membership:
    """Classify a point against the outer region.

    ``outside`` is returned only when a bound that holds for every auxiliary
    choice is violated; ``inside`` needs an explicit witness.  Witnesses are
    sought with constant V channels, which loosens every equivocation bound
    without touching the rates or the distortion.
    """
    hxe = entropy(source.joint(), "X", "E")
    p = point
    if min(p.r1, p.r2) < -tol:
        return Membership("outside", "negative rate")
    if p.d1 > hxe + tol or p.d2 > hxe + tol:
        return Membership("outside", f"equivocation above H(X|E) = {hxe:.6g}")
    if p.d1 - p.r2 > hxe + tol or p.d2 - p.r1 > hxe + tol:
        return Membership("outside", f"equivocation minus the other rate above H(X|E) = {hxe:.6g}")
    if p.dist < bayes_distortion(source) - tol:
        return Membership("outside", "distortion below the best estimate from (Y1, Y2)")

    def check(aux: AuxConfig) -> float:
        return _excess(eval_outer(source, aux), p)

    s = source.sizes
    candidates = [_v_constant(source, h.pu1_y1, h.pu2_y2) for h in hints]
    candidates += [_v_constant(source, constant_channel(s["Y1"]), constant_channel(s["Y2"])),
                   _v_constant(source, np.eye(s["Y1"]), np.eye(s["Y2"]))]
    for aux in candidates:
        if check(aux) <= tol:
            return Membership("inside", "witness found", aux)

    for r in range(budget.restarts):
        cards = default_cards(source)
        cards.update(V1=1, V2=1)
        aux = sample_aux(source, cards, [budget.seed, r, 2], "outer")
        rng = np.random.default_rng([budget.seed, r, 3])
        cur = check(aux)
        for _ in range(budget.refine_iters - 1):
            if cur <= tol:
                break
            cand = perturb(source, aux, rng, budget.perturb_scale, ("pv1_u1", "pv2_u2"))
            c = check(cand)
            if c <= cur:
                aux, cur = cand, c
        if cur <= tol:
            return Membership("inside", "witness found by search", aux)
    return Membership("unknown", "no witness found and no relaxation violated")
