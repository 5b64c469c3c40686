import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from ceo_secrecy.probcore import SourceSpec, bsc
from ceo_secrecy.regions import AuxConfig, best_xhat

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def _normalize(weights):
    w = np.asarray(weights, float)
    return w / w.sum()


@st.composite
def pmfs(draw, k=None, max_k=4, allow_zero=True):
    k = draw(st.integers(1, max_k)) if k is None else k
    lo = 0.0 if allow_zero else 0.01
    w = draw(st.lists(st.floats(lo, 1.0), min_size=k, max_size=k).filter(lambda v: sum(v) > 1e-3))
    return _normalize(w)


@st.composite
def channels(draw, n_in, n_out=None, max_out=3, allow_zero=True):
    n_out = draw(st.integers(1, max_out)) if n_out is None else n_out
    return np.array([draw(pmfs(n_out, allow_zero=allow_zero)) for _ in range(n_in)])


@st.composite
def sources(draw, max_k=3):
    nx = draw(st.integers(1, max_k))
    return SourceSpec(draw(pmfs(nx)), draw(channels(nx, max_out=max_k)), draw(channels(nx, max_out=max_k)),
                      draw(channels(nx, max_out=max_k)))


@st.composite
def source_and_aux(draw, max_k=3, max_card=3):
    src = draw(sources(max_k))
    s = src.sizes
    pu1 = draw(channels(s["Y1"], max_out=max_card))
    pu2 = draw(channels(s["Y2"], max_out=max_card))
    pv1 = draw(channels(pu1.shape[1], max_out=max_card))
    pv2 = draw(channels(pu2.shape[1], max_out=max_card))
    return src, AuxConfig(pu1, pu2, pv1, pv2, best_xhat(src, pu1, pu2))


def binary_fixture() -> SourceSpec:
    """Uniform binary X, both agents through BSC(0.1), Eve through BSC(0.3), Hamming distortion."""
    return SourceSpec([0.5, 0.5], bsc(0.1), bsc(0.1), bsc(0.3), 1.0 - np.eye(2), 1.0)


@pytest.fixture
def binary_source():
    return binary_fixture()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
