from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

import oracle
from ceo_secrecy.errors import CardinalityError
from ceo_secrecy.probcore import SourceSpec, bsc, chain_join, check_markov, constant_channel, entropy
from ceo_secrecy.regions import AuxConfig, RegionPoint, eval_inner
from ceo_secrecy.search import (
    SENSE,
    SearchBudget,
    axes_preferences,
    dominates,
    hull_filter,
    objective_index,
    outer_membership,
    pareto_filter,
    sample_aux,
    scalarized_optimize,
    trace_frontier,
)

SMALL = SearchBudget(restarts=2, refine_iters=40, seed=3)


def min_distortion_over_maps(src):
    """Exhaustive search of the 16 reconstruction maps with U_j = Y_j on binary alphabets."""
    eye = np.eye(2)
    law = oracle.eight_variable_law(src.px, src.py1_x, src.py2_x, src.pe_x, eye, eye, [[1], [1]], [[1], [1]])
    best = np.inf
    for bits in product(range(2), repeat=4):
        xhat = np.array(bits).reshape(2, 2)
        best = min(best, oracle.expected_distortion(law, xhat, src.distortion))
    return best


def test_budget_validation():
    for bad in (dict(restarts=0), dict(refine_iters=0), dict(perturb_scale=0.0), dict(perturb_scale=1.5)):
        with pytest.raises(ValueError):
            SearchBudget(**bad)


def test_sample_aux_is_deterministic(binary_source):
    a = sample_aux(binary_source, seed=11)
    b = sample_aux(binary_source, seed=11)
    assert a.to_dict() == b.to_dict()
    assert a.to_dict() != sample_aux(binary_source, seed=12).to_dict()


def test_sample_aux_all_ones_is_constant(binary_source):
    aux = sample_aux(binary_source, dict(U1=1, U2=1, V1=1, V2=1), seed=0)
    assert eval_inner(binary_source, aux) == eval_inner(binary_source, AuxConfig.trivial(binary_source))


def test_sample_aux_respects_caps(binary_source):
    with pytest.raises(CardinalityError):
        sample_aux(binary_source, dict(U1=2, U2=2, V1=10, V2=1), seed=0, mode="outer")


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4))
def test_sampled_configs_are_markov(seed, ku, kv):
    src = SourceSpec([0.3, 0.7], bsc(0.1), bsc(0.2), bsc(0.3))
    aux = sample_aux(src, dict(U1=ku, U2=ku, V1=kv, V2=kv), seed=seed)
    j = chain_join(src, aux)
    for chain in (("V1", "U1", "Y1", ("X", "E", "Y2")), ("V2", "U2", "Y2", ("X", "E", "Y1")),
                  ("U1", "Y1", "X", "Y2", "U2"), ("V1", "U1", ("Y1", "X"))):
        assert check_markov(j, chain)


def test_distortion_only_objective(binary_source):
    ref = min_distortion_over_maps(binary_source)
    assert ref == pytest.approx(0.1, abs=1e-12)
    res = scalarized_optimize(binary_source, [0, 0, 0, 0, 1], SearchBudget(4, 150, seed=1))
    assert res.point.dist <= ref + 1e-9


def test_equivocation_only_with_silent_layers(binary_source):
    fixed = {"pu1_y1": constant_channel(2), "pv1_u1": constant_channel(1)}
    res = scalarized_optimize(binary_source, [0, 0, 1, 0, 0], SMALL, fixed=fixed)
    hxe = entropy(binary_source.joint(), "X", "E")
    assert res.point.d1 == pytest.approx(hxe, abs=1e-12)


def test_single_evaluation_budget_returns_seed_sample(binary_source):
    w = [1.0, 0.5, 0.2, 0.0, 2.0]
    res = scalarized_optimize(binary_source, w, SearchBudget(1, 1, seed=9))
    seed_aux = sample_aux(binary_source, seed=[9, 0, 0])
    assert res.aux.to_dict() == seed_aux.to_dict()
    assert res.point == eval_inner(binary_source, seed_aux).operating_point(1, 1)
    assert res.evaluations == 1 and res.accepted == 0


def test_optimizer_is_deterministic(binary_source):
    a = scalarized_optimize(binary_source, [0.3, 0.3, 1, 1, 1], SMALL)
    b = scalarized_optimize(binary_source, [0.3, 0.3, 1, 1, 1], SMALL)
    assert a.point == b.point and a.aux.to_dict() == b.aux.to_dict()


def test_optimizer_rejects_bad_weights(binary_source):
    with pytest.raises(ValueError):
        scalarized_optimize(binary_source, [1, 2, 3], SMALL)
    with pytest.raises(ValueError):
        scalarized_optimize(binary_source, [1, 2, 3, np.nan, 0], SMALL)


# ------------------------------------------------------------------ frontier


@pytest.fixture(scope="module")
def frontier():
    src = SourceSpec([0.5, 0.5], bsc(0.1), bsc(0.1), bsc(0.3), 1 - np.eye(2), 1.0)
    return src, trace_frontier(src, ("Delta1", "R2"), 7, SearchBudget(2, 60, seed=0))


def test_frontier_is_deterministic(frontier):
    src, fr = frontier
    again = trace_frontier(src, ("Delta1", "R2"), 7, SearchBudget(2, 60, seed=0))
    assert again.csv_rows() == fr.csv_rows()
    assert again.provenance() == fr.provenance()


def test_frontier_points_reevaluate(frontier):
    src, fr = frontier
    pref = axes_preferences(fr.axes)
    for fp in fr.points:
        b = eval_inner(src, fp.aux)
        assert np.max(np.abs(b.operating_point(*pref).as_array() - fp.point.as_array())) <= 1e-10
        assert b.admits(fp.point)


def test_hull_points_are_mutually_undominated(frontier):
    _, fr = frontier
    arr = [p.as_array() for p in fr.hull]
    for i, a in enumerate(arr):
        for j, b in enumerate(arr):
            if i != j:
                assert not dominates(a, b)


def test_hull_contains_every_point(frontier):
    _, fr = frontier
    H = np.array([p.as_array() for p in fr.hull]) * SENSE
    n, m = H.shape
    for fp in fr.points:
        target = fp.point.as_array() * SENSE
        # largest margin s with H^T lambda >= target + s over the simplex
        res = linprog(np.r_[np.zeros(n), -1.0], A_ub=np.hstack([-H.T, np.ones((m, 1))]), b_ub=-target,
                      A_eq=np.r_[np.ones(n), 0.0][None], b_eq=[1.0], bounds=[(0, None)] * n + [(None, None)])
        assert res.status == 0
        assert -res.fun >= -1e-9, fp.config_id


def test_delta1_r2_slice_is_monotone(frontier):
    _, fr = frontier
    sl = fr.slice()
    assert sl
    d1 = [x for x, _ in sl]
    r2 = [y for _, y in sl]
    assert d1 == sorted(d1)
    assert all(b >= a - 1e-12 for a, b in zip(r2, r2[1:]))


def test_constant_source_collapses():
    src = SourceSpec([1.0], [[0.3, 0.7]], [[0.6, 0.4]], [[1.0]])
    fr = trace_frontier(src, ("Delta1", "Delta2"), 3, SearchBudget(1, 20, seed=0))
    for fp in fr.points:
        assert fp.point.d1 == pytest.approx(0.0, abs=1e-12)
        assert fp.point.d2 == pytest.approx(0.0, abs=1e-12)
        assert fp.point.dist == pytest.approx(0.0, abs=1e-12)


def test_axes_must_be_distinct(binary_source):
    with pytest.raises(ValueError):
        trace_frontier(binary_source, ("R1", "R1"), 3, SMALL)
    with pytest.raises(ValueError):
        objective_index("Delta3")


def test_pareto_and_hull_filters_on_toy_points():
    pts = np.array([
        [1.0, 1.0, 0.5, 0.5, 0.1],
        [2.0, 2.0, 0.4, 0.4, 0.2],   # dominated by the first
        [0.0, 0.0, 0.0, 0.0, 0.5],
        [0.5, 0.5, 0.25, 0.25, 0.35],  # the midpoint of rows 0 and 2 beats it
    ])
    assert pareto_filter(pts) == [0, 2, 3]
    kept = pts[[0, 2, 3]]
    assert hull_filter(kept) == [0, 1]


# ------------------------------------------------------------------ outer membership


def test_membership_excess_equivocation_is_outside(binary_source):
    hxe = entropy(binary_source.joint(), "X", "E")
    m = outer_membership(binary_source, RegionPoint(5, 5, hxe + 1e-6, 0, 1), SMALL)
    assert m.verdict == "outside"


def test_membership_trivial_corner_is_inside(binary_source):
    m = outer_membership(binary_source, RegionPoint(10, 10, 0, 0, binary_source.d_max), SMALL)
    assert m.verdict == "inside"


def test_membership_of_inner_points(binary_source):
    rng = np.random.default_rng(4)
    for k in range(5):
        aux = sample_aux(binary_source, seed=[int(rng.integers(1 << 30)), k])
        p = eval_inner(binary_source, aux).operating_point()
        assert outer_membership(binary_source, p, SMALL, hints=[aux]).verdict == "inside"
        assert outer_membership(binary_source, p, SMALL).verdict != "outside"


def test_membership_below_bayes_distortion_is_outside(binary_source):
    m = outer_membership(binary_source, RegionPoint(5, 5, 0, 0, 0.05), SMALL)
    assert m.verdict == "outside"


@settings(max_examples=20)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_membership_never_claims_outside_for_inner_points(a, b):
    src = SourceSpec([0.5, 0.5], bsc(0.1), bsc(0.1), bsc(0.3))
    pu1 = np.array([[1 - a, a], [a, 1 - a]])
    pu2 = np.array([[1 - b, b], [b, 1 - b]])
    from ceo_secrecy.regions import best_xhat
    aux = AuxConfig(pu1, pu2, constant_channel(2), constant_channel(2), best_xhat(src, pu1, pu2))
    p = eval_inner(src, aux).operating_point()
    assert outer_membership(src, p, SearchBudget(1, 5)).verdict != "outside"
