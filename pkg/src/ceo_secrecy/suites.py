"""Randomized cross-module identity suites shared by the CLI and the test-suite."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .gaussian import GaussianParams, QuantRates, d_min, region_no_si, region_si
from .probcore import SourceSpec, entropy
from .regions import AuxConfig, best_xhat, corner_points, eval_inner
from .special import (
    HelperSpec,
    cor1_reduction,
    cor2_deviation,
    cor3_deviation,
    cor4_deviation,
    cor4_region,
)

SUITES = ("corners", "corollaries", "gaussian-reduction")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    cases: int

    def as_dict(self) -> dict:
        return asdict(self)


def _rows(rng, a, b):
    return rng.dirichlet(np.ones(b), size=a)


def random_binary_source(rng: np.random.Generator) -> SourceSpec:
    return SourceSpec(rng.dirichlet([1, 1]), _rows(rng, 2, 2), _rows(rng, 2, 2), _rows(rng, 2, 2))


def random_aux(rng: np.random.Generator, source: SourceSpec, max_card: int = 3) -> AuxConfig:
    s = source.sizes
    ku1, ku2, kv1, kv2 = (int(k) for k in rng.integers(1, max_card + 1, size=4))
    pu1, pu2 = _rows(rng, s["Y1"], ku1), _rows(rng, s["Y2"], ku2)
    return AuxConfig(pu1, pu2, _rows(rng, ku1, kv1), _rows(rng, ku2, kv2), best_xhat(source, pu1, pu2))


def random_helper(rng: np.random.Generator) -> HelperSpec:
    return HelperSpec.build(rng.dirichlet([1, 1]), _rows(rng, 2, 2), _rows(rng, 2, 2))


def corner_suite(seed: int, draws: int = 1000, tol: float = 1e-9, sum_tol: float = 1e-10) -> list:
    """Membership of every corner point and the corner sum-rate identity."""
    rng = np.random.default_rng([seed, 11])
    worst_member, worst_sum = 0.0, 0.0
    for _ in range(draws):
        src = random_binary_source(rng)
        aux = random_aux(rng, src)
        b = eval_inner(src, aux)
        for c in corner_points(src, aux):
            p = c.point
            excess = [b.r1_lb - p.r1, b.r2_lb - p.r2, b.sum_lb - p.r1 - p.r2, p.d1 - b.d1_ub,
                      p.d2 - b.d2_ub, p.d1 + p.d2 - b.dsum_ub, p.d1 - p.r2 - b.d1_minus_r2_ub,
                      p.d2 - p.r1 - b.d2_minus_r1_ub, b.dist - p.dist]
            worst_member = max(worst_member, max(excess))
            worst_sum = max(worst_sum, abs(p.r1 + p.r2 - b.sum_lb))
    return [SuiteResult("corner-membership", worst_member <= tol, worst_member, tol, draws),
            SuiteResult("corner-sum-rate", worst_sum <= sum_tol, worst_sum, sum_tol, draws)]


def corollary_suite(seed: int, draws: int = 1000, tol: float = 1e-10, id_tol: float = 1e-12) -> list:
    rng = np.random.default_rng([seed, 12])
    dev = {"cor1": 0.0, "cor2": 0.0, "cor3": 0.0, "cor4": 0.0, "cor4-identity": 0.0}
    for _ in range(draws):
        h = random_helper(rng)
        ku1, kv1, ku2 = (int(k) for k in rng.integers(1, 4, size=3))
        pu1, pv1 = _rows(rng, 2, ku1), _rows(rng, ku1, kv1)
        xh = rng.integers(0, 2, size=(ku1, 2))
        dev["cor2"] = max(dev["cor2"], cor2_deviation(h, pu1, pv1, xh))
        dev["cor3"] = max(dev["cor3"], cor3_deviation(h, _rows(rng, 2, kv1)))
        pu2 = _rows(rng, 2, 3)
        dev["cor4"] = max(dev["cor4"], cor4_deviation(h, pu2))
        c = cor4_region(h, pu2)
        hx = entropy(h.source.joint(), "X")
        dev["cor4-identity"] = max(dev["cor4-identity"], abs(c.d1_ub + c.d2_ub - hx))
        aux = AuxConfig(pu1, _rows(rng, 2, ku2), pv1, _rows(rng, ku2, 2), rng.integers(0, 2, size=(ku1, ku2)))
        dev["cor1"] = max(dev["cor1"], cor1_reduction(h.source, aux).max_deviation)
    return [SuiteResult(k, v <= (id_tol if k == "cor4-identity" else tol), v,
                        id_tol if k == "cor4-identity" else tol, draws) for k, v in dev.items()]


def gaussian_reduction_suite(grid: int = 50, var_ne: float = 1e9, tol: float = 1e-6,
                             sentinel_tol: float = 1e-12, params=(1.0, 1.0, 1.0), r_max: float = 3.0) -> list:
    """Eve with very noisy side information must reproduce the region without side information."""
    base = GaussianParams(*params)
    noisy = GaussianParams(*params, var_ne=var_ne)
    rs = np.linspace(0.0, r_max, grid)
    big, sent = 0.0, 0.0
    for r1 in rs:
        for r2 in rs:
            q = QuantRates(float(r1), float(r2))
            D = d_min(base, q)
            a = np.array(region_no_si(base, q, D).as_row())
            b = np.array(region_si(noisy, q, D).as_row())
            c = np.array(region_si(base, q, D).as_row())
            big = max(big, float(np.max(np.abs(a - b))))
            sent = max(sent, float(np.max(np.abs(a - c))))
    return [SuiteResult("gaussian-large-variance", big <= tol, big, tol, grid * grid),
            SuiteResult("gaussian-sentinel", sent <= sentinel_tol, sent, sentinel_tol, grid * grid)]


def run_suite(name: str, seed: int = 0, draws: int = 1000) -> list:
    if name == "corners":
        return corner_suite(seed, draws)
    if name == "corollaries":
        return corollary_suite(seed, draws)
    if name == "gaussian-reduction":
        return gaussian_reduction_suite()
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, seed, draws)]
    raise ValueError(f"unknown suite {name!r}")
