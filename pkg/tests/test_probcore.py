import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from conftest import channels, pmfs, source_and_aux, sources
from ceo_secrecy.errors import DimensionMismatch
from ceo_secrecy.probcore import (
    AXES,
    JointDist,
    SourceSpec,
    as_pmf,
    bsc,
    chain_join,
    check_markov,
    constant_channel,
    entropy,
    h2,
    identity_channel,
    marginal,
    mutual_info,
)
from ceo_secrecy.regions import AuxConfig


def bsc_pair(p):
    return SourceSpec([0.5, 0.5], bsc(p), bsc(p), bsc(p)).joint()


def test_marginal_hand_multiplication():
    j = SourceSpec([0.5, 0.5], bsc(0.1), bsc(0.2), bsc(0.3)).joint()
    m = marginal(j, ("X", "Y1"))
    assert m.table[0, 1] == pytest.approx(0.05, abs=1e-15)


def test_conditional_entropy_bsc_matches_brute_force():
    law = {(0, 0): 0.45, (0, 1): 0.05, (1, 0): 0.05, (1, 1): 0.45}
    brute = -sum(p * math.log2(p / 0.5) for p in law.values())
    j = bsc_pair(0.1)
    assert entropy(j, "Y1", "X") == pytest.approx(brute, abs=1e-12)
    assert entropy(j, "Y1", "X") == pytest.approx(0.468996, abs=1e-6)
    assert h2(0.1) == pytest.approx(brute, abs=1e-12)


def test_mutual_information_bsc():
    j = bsc_pair(0.1)
    assert mutual_info(j, "X", "Y1") == pytest.approx(0.531004, abs=1e-6)
    assert mutual_info(j, "X", "Y1") == pytest.approx(1 - h2(0.1), abs=1e-12)


def test_trivial_entropies():
    j = bsc_pair(0.1)
    assert entropy(j, "X") == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        entropy(j, "X", "X")
    with pytest.raises(ValueError):
        mutual_info(j, "X", "Y1", "X")


def test_identity_channels_pin_auxiliaries():
    src = SourceSpec([0.3, 0.7], bsc(0.2), bsc(0.1), bsc(0.4))
    aux = AuxConfig.identity(src, secret_layer=True)
    j = chain_join(src, aux)
    for y, u, v in (("Y1", "U1", "V1"), ("Y2", "U2", "V2")):
        assert entropy(j, u, y) == pytest.approx(0.0, abs=1e-12)
        assert entropy(j, v, u) == pytest.approx(0.0, abs=1e-12)
        m = marginal(j, (y, u)).table
        assert np.allclose(m, np.diag(np.diag(m)), atol=0)


def test_noiseless_source_is_diagonal():
    src = SourceSpec([0.5, 0.5], identity_channel(2), identity_channel(2), identity_channel(2))
    t = src.joint().table
    for idx in np.argwhere(t > 0):
        assert len(set(idx.tolist())) == 1
    assert np.allclose(marginal(src.joint(), "Y1").table, [0.5, 0.5], atol=1e-15)


def test_marginal_total_mass_and_unknown_axis():
    j = bsc_pair(0.2)
    assert float(marginal(j, ()).table) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(KeyError):
        marginal(j, ("Z",))


def test_chain_join_dimension_mismatch_names_axis():
    src = SourceSpec([0.5, 0.5], bsc(0.1), bsc(0.1), bsc(0.3))
    with pytest.raises(DimensionMismatch, match="U1"):
        AuxConfig(identity_channel(2), identity_channel(2), np.ones((3, 1)), constant_channel(2),
                  np.zeros((2, 2), int))
    loose = SimpleNamespace(pu1_y1=np.ones((3, 1)), pu2_y2=identity_channel(2),
                            pv1_u1=constant_channel(1), pv2_u2=constant_channel(2))
    with pytest.raises(DimensionMismatch, match="Y1"):
        chain_join(src, loose)


def test_source_rejects_mismatched_rows():
    with pytest.raises(DimensionMismatch):
        SourceSpec([0.5, 0.5], bsc(0.1), np.ones((3, 1)), bsc(0.1))
    with pytest.raises(ValueError):
        as_pmf([0.5, 0.6])


def test_cross_wired_chain_is_not_markov():
    # U1 is a copy of Y2, so V1 - U1 - Y1 - Y2 fails: given Y1, U1 still tells about Y2
    px = np.array([0.5, 0.5])
    t = np.einsum("x,xa,xb,bc->xabc", px, bsc(0.1), bsc(0.1), identity_channel(2))
    j = JointDist(t, ("X", "Y1", "Y2", "U1"))
    assert mutual_info(j, "U1", "Y2", "Y1") > 0.1
    assert not check_markov(j, ("U1", "Y1", "Y2"))


def test_single_group_chain_is_vacuous():
    assert check_markov(bsc_pair(0.1), (("X", "Y1"),))


def test_long_chain_separation():
    src = SourceSpec([0.4, 0.6], bsc(0.1), bsc(0.2), bsc(0.3))
    aux = AuxConfig(bsc(0.05), bsc(0.15), bsc(0.25), bsc(0.35), np.zeros((2, 2), int))
    j = chain_join(src, aux)
    assert mutual_info(j, "V1", "V2", "Y1") == pytest.approx(0.0, abs=1e-12)
    assert check_markov(j, ("V1", "U1", "Y1", ("X", "E", "Y2")))


# ------------------------------------------------------------------ properties


@given(source_and_aux())
def test_matches_dictionary_oracle(case):
    src, aux = case
    j = chain_join(src, aux)
    law = oracle.eight_variable_law(src.px, src.py1_x, src.py2_x, src.pe_x,
                                    aux.pu1_y1, aux.pu2_y2, aux.pv1_u1, aux.pv2_u2)
    assert entropy(j, ("U1", "X"), "V2") == pytest.approx(oracle.Hc(law, ["U1", "X"], ["V2"]), abs=1e-10)
    assert mutual_info(j, "U1", "Y1", "U2") == pytest.approx(oracle.I(law, ["U1"], ["Y1"], ["U2"]), abs=1e-10)


@given(source_and_aux())
def test_chain_rule(case):
    j = chain_join(*case)
    lhs = mutual_info(j, ("U1", "Y2"), "X")
    rhs = mutual_info(j, "U1", "X") + mutual_info(j, "Y2", "X", "U1")
    assert lhs == pytest.approx(rhs, abs=1e-10)


@given(source_and_aux(), st.sampled_from(AXES), st.sampled_from(AXES), st.sampled_from(AXES))
def test_nonnegativity(case, a, b, g):
    j = chain_join(*case)
    assert entropy(j, a) >= -1e-10
    if len({a, b, g}) == 3:
        assert mutual_info(j, a, b, g) >= -1e-10
        assert entropy(j, a, g) >= -1e-10


@given(source_and_aux())
def test_data_processing(case):
    j = chain_join(*case)
    for v, u, y in (("V1", "U1", "Y1"), ("V2", "U2", "Y2")):
        assert mutual_info(j, v, "X") <= mutual_info(j, u, "X") + 1e-10
        assert mutual_info(j, u, "X") <= mutual_info(j, y, "X") + 1e-10


@given(source_and_aux())
def test_marginal_reproduces_source(case):
    src, aux = case
    m = marginal(chain_join(src, aux), ("X", "Y1", "Y2", "E")).table
    assert np.max(np.abs(m - src.joint().table)) <= 1e-12


@given(source_and_aux())
def test_chain_join_markov_chains(case):
    j = chain_join(*case)
    assert check_markov(j, ("V1", "U1", "Y1", ("X", "E", "Y2")))
    assert check_markov(j, ("V2", "U2", "Y2", ("X", "E", "Y1")))


@given(pmfs(allow_zero=True), st.data())
def test_independent_axes_have_zero_information(p, data):
    q = data.draw(pmfs())
    j = JointDist(np.outer(p, q), ("A", "B"))
    assert abs(mutual_info(j, "A", "B")) <= 1e-12


@given(st.integers(1, 3).flatmap(lambda k: channels(k)))
def test_channel_rows_are_distributions(ch):
    assert np.allclose(ch.sum(axis=1), 1.0, atol=1e-12)
