"""Blocklength-n simulation of the layered random-binning scheme.

Each agent owns a V codebook drawn i.i.d. from P_V and, for every V codeword,
a U codebook drawn i.i.d. from P_U (or from P_{U|V} when ``conditional_u`` is
set).  Both codebooks are split into contiguous, near-equal bins; the agent
sends the two bin indices.  The CEO scans the four received bins for a unique
jointly typical quadruple and applies the reconstruction map letter by
letter.

Randomness comes from counter-based Philox streams keyed by
``(seed, role, index...)`` so codebooks, sources and encoders can be replayed
independently of each other.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np

from .errors import EnumerationCapExceeded
from .probcore import SourceSpec, chain_join, entropy, mutual_info
from .regions import AuxConfig

# roles of the random streams
ROLE_CODE, ROLE_SOURCE, ROLE_ENCODER = 1, 2, 3

DEFAULT_CAP = 2**28
CAP_ENV = "CEO_ENUM_CAP"


def enumeration_cap() -> int:
    """Cost cap for codebook storage and exact enumeration, overridable via the environment."""
    raw = os.environ.get(CAP_ENV)
    return int(float(raw)) if raw else DEFAULT_CAP


def stream(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


@dataclass(frozen=True)
class SimConfig:
    """Simulation knobs.

    ``eps`` is the typicality slack on empirical letter frequencies;
    ``slack`` holds the four codebook/bin exponent margins (eps1..eps4),
    either shared by both agents or given per agent as a pair of 4-tuples.
    """

    n: int
    rates: tuple = (0.0, 0.0, 0.0, 0.0)
    eps: float = 0.15
    trials: int = 1000
    seed: int = 0
    slack: tuple = (0.0, 0.0, 0.0, 0.0)
    conditional_u: bool = False

    def agent_slack(self, agent: int) -> tuple:
        sl = np.asarray(self.slack, dtype=float)
        return tuple((sl if sl.ndim == 1 else sl[agent - 1]).tolist())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("blocklength must be at least 1")
        if len(self.rates) != 4 or min(self.rates) < 0:
            raise ValueError("rates must be four non-negative numbers (R_V1, R_U1, R_V2, R_U2)")
        sl = np.asarray(self.slack, dtype=float)
        if sl.shape not in ((4,), (2, 4)) or sl.min() < 0:
            raise ValueError("slack must be four non-negative numbers, or one such 4-tuple per agent")
        if not self.eps > 0:
            raise ValueError("typicality slack must be positive")
        if self.trials < 0:
            raise ValueError("trials must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def pow2_count(n: int, rate: float) -> int:
    """2^ceil(n rate), with a guard against rounding just above an integer."""
    return 2 ** max(0, math.ceil(n * rate - 1e-9))


def is_typical(counts: np.ndarray, pmf: np.ndarray, n: int, eps: float) -> np.ndarray:
    """Strong typicality of count vectors (last axis = flattened cells) against ``pmf``."""
    p = pmf.ravel()
    freq = counts / n
    ok = np.all(np.abs(freq - p) <= eps + 1e-12, axis=-1)
    return ok & np.all(counts[..., p == 0] == 0, axis=-1)


def joint_counts(cells: np.ndarray, size: int) -> np.ndarray:
    """Per-row histogram of integer cell labels; ``cells`` has shape (m, n)."""
    m = cells.shape[0]
    flat = (cells + size * np.arange(m)[:, None]).ravel()
    return np.bincount(flat, minlength=m * size).reshape(m, size)


@dataclass(frozen=True, eq=False)
class AgentCode:
    v_book: np.ndarray       # (N_V, n)
    u_book: np.ndarray       # (N_V, N_U, n)
    n_bins_v: int
    n_bins_u: int

    def __post_init__(self):
        nv, nu = self.v_book.shape[0], self.u_book.shape[1]
        if self.u_book.shape[0] != nv or self.u_book.shape[2] != self.v_book.shape[1]:
            raise ValueError("u_book must have shape (N_V, N_U, n) matching v_book")
        if not 1 <= self.n_bins_v <= nv or not 1 <= self.n_bins_u <= nu:
            raise ValueError("bin counts must lie between 1 and the codebook size")

    @property
    def sizes(self) -> tuple:
        return self.v_book.shape[0], self.u_book.shape[1]

    def bin_v(self, s: int) -> int:
        return s * self.n_bins_v // self.v_book.shape[0]

    def bin_u(self, s2: int) -> int:
        return s2 * self.n_bins_u // self.u_book.shape[1]

    @staticmethod
    def _members(b: int, nbins: int, total: int) -> np.ndarray:
        lo = -(-b * total // nbins)
        hi = -(-(b + 1) * total // nbins)
        return np.arange(lo, hi)

    def v_members(self, b: int) -> np.ndarray:
        return self._members(b, self.n_bins_v, self.v_book.shape[0])

    def u_members(self, w: int) -> np.ndarray:
        return self._members(w, self.n_bins_u, self.u_book.shape[1])


@dataclass(frozen=True, eq=False)
class CodeInstance:
    """Realized codebooks plus the single-letter laws the typicality tests refer to."""

    n: int
    agents: tuple
    p_vy: tuple              # per agent, joint of (V_j, Y_j)
    p_vuy: tuple             # per agent, joint of (V_j, U_j, Y_j)
    p_quad: np.ndarray       # joint of (V1, U1, V2, U2)
    xhat: np.ndarray
    fallback_letter: int

    @classmethod
    def from_books(cls, source: SourceSpec, aux: AuxConfig, agents) -> "CodeInstance":
        j = chain_join(source, aux)
        p_vy = (j._marginal_array(("V1", "Y1")), j._marginal_array(("V2", "Y2")))
        p_vuy = (j._marginal_array(("V1", "U1", "Y1")), j._marginal_array(("V2", "U2", "Y2")))
        p_quad = j._marginal_array(("V1", "U1", "V2", "U2"))
        n = agents[0].v_book.shape[1]
        if agents[1].v_book.shape[1] != n:
            raise ValueError("both agents need the same blocklength")
        fallback = int(np.argmin(source.px @ source.distortion))
        return cls(n, tuple(agents), p_vy, p_vuy, p_quad, aux.xhat, fallback)

    def message_sizes(self, agent: int) -> tuple:
        a = self.agents[agent - 1]
        return a.n_bins_v, a.n_bins_u


def codebook_sizes(source: SourceSpec, aux: AuxConfig, cfg: SimConfig) -> list:
    """Per agent: (N_V, N_U, bins_V, bins_U)."""
    j = chain_join(source, aux)
    out = []
    for k in (1, 2):
        e1, e2, e3, e4 = cfg.agent_slack(k)
        V, U, Y = f"V{k}", f"U{k}", f"Y{k}"
        rv, ru = cfg.rates[2 * (k - 1)], cfg.rates[2 * (k - 1) + 1]
        nv = pow2_count(cfg.n, max(0.0, mutual_info(j, V, Y)) + e1)
        nu = pow2_count(cfg.n, max(0.0, mutual_info(j, U, Y, V)) + e3)
        out.append((nv, nu, min(nv, pow2_count(cfg.n, rv + e2)), min(nu, pow2_count(cfg.n, ru + e4))))
    return out


def _draw(rng: np.random.Generator, pmf: np.ndarray, shape) -> np.ndarray:
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(shape), side="right")


def gen_code(source: SourceSpec, aux: AuxConfig, cfg: SimConfig) -> CodeInstance:
    """Draw both agents' codebooks from the seed."""
    sizes = codebook_sizes(source, aux, cfg)
    cost = sum(nv * nu * cfg.n for nv, nu, _, _ in sizes)
    cap = enumeration_cap()
    if cost > cap:
        raise EnumerationCapExceeded(f"codebooks need {cost} letters, above the cap {cap}", cost, cap)
    j = chain_join(source, aux)
    agents = []
    for k, (nv, nu, bv, bu) in zip((1, 2), sizes):
        rng = stream(cfg.seed, ROLE_CODE, k)
        pv = j._marginal_array((f"V{k}",))
        v_book = _draw(rng, pv, (nv, cfg.n))
        if cfg.conditional_u:
            pvu = j._marginal_array((f"V{k}", f"U{k}"))
            cond = pvu / np.maximum(pvu.sum(axis=1, keepdims=True), 1e-300)
            u_book = np.empty((nv, nu, cfg.n), dtype=np.int64)
            for s in range(nv):
                for i in range(cfg.n):
                    u_book[s, :, i] = _draw(rng, cond[v_book[s, i]], nu)
        else:
            u_book = _draw(rng, j._marginal_array((f"U{k}",)), (nv, nu, cfg.n))
        agents.append(AgentCode(v_book, u_book, bv, bu))
    return CodeInstance.from_books(source, aux, agents)


# ---------------------------------------------------------------- encoding


def typical_v(code: CodeInstance, agent: int, y: np.ndarray, eps: float) -> np.ndarray:
    a = code.agents[agent - 1]
    p = code.p_vy[agent - 1]
    ny = p.shape[1]
    cells = a.v_book * ny + y[None, :]
    return np.flatnonzero(is_typical(joint_counts(cells, p.size), p, code.n, eps))


def typical_u(code: CodeInstance, agent: int, s: int, y: np.ndarray, eps: float) -> np.ndarray:
    a = code.agents[agent - 1]
    p = code.p_vuy[agent - 1]
    nu, ny = p.shape[1], p.shape[2]
    cells = (a.v_book[s][None, :] * nu + a.u_book[s]) * ny + y[None, :]
    return np.flatnonzero(is_typical(joint_counts(cells, p.size), p, code.n, eps))


@dataclass(frozen=True)
class Encoding:
    b: int
    w: int
    s: int
    s2: int
    v_fallback: bool
    u_fallback: bool


def encode(y: np.ndarray, agent: int, code: CodeInstance, cfg: SimConfig,
           rng: Optional[np.random.Generator] = None) -> Encoding:
    """Pick a typical V codeword, then a typical U codeword under it; send both bin indices.

    Ties are broken uniformly at random and an empty typical set falls back
    to a uniformly random index.  ``rng`` defaults to the stream keyed by the
    configured seed, so a call is reproducible on its own.
    """
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (code.n,):
        raise ValueError(f"observation must have length {code.n}")
    rng = stream(cfg.seed, ROLE_ENCODER, 0, agent) if rng is None else rng
    a = code.agents[agent - 1]
    nv, nu = a.sizes
    tv = typical_v(code, agent, y, cfg.eps)
    v_fb = tv.size == 0
    s = int(rng.integers(nv)) if v_fb else int(tv[rng.integers(tv.size)])
    tu = typical_u(code, agent, s, y, cfg.eps)
    u_fb = tu.size == 0
    s2 = int(rng.integers(nu)) if u_fb else int(tu[rng.integers(tu.size)])
    return Encoding(a.bin_v(s), a.bin_u(s2), s, s2, v_fb, u_fb)


def encoder_law(y: np.ndarray, agent: int, code: CodeInstance, eps: float) -> dict:
    """Exact distribution of the chosen index pair (s, s') given one observation block."""
    a = code.agents[agent - 1]
    nv, nu = a.sizes
    tv = typical_v(code, agent, y, eps)
    vs = tv if tv.size else np.arange(nv)
    law = {}
    for s in vs:
        tu = typical_u(code, agent, int(s), y, eps)
        us = tu if tu.size else np.arange(nu)
        p = 1.0 / (vs.size * us.size)
        for s2 in us:
            law[(int(s), int(s2))] = p
    return law


# ---------------------------------------------------------------- decoding


@dataclass(frozen=True)
class Decoding:
    status: str                      # "ok", "ambiguous" or "none"
    indices: Optional[tuple]         # (s1, s1', s2, s2') when status is ok
    xhat: np.ndarray


def _agent_candidates(code: CodeInstance, agent: int, b: int, w: int):
    a = code.agents[agent - 1]
    vs, us = a.v_members(b), a.u_members(w)
    ss, uu = np.repeat(vs, us.size), np.tile(us, vs.size)
    nu = code.p_quad.shape[1] if agent == 1 else code.p_quad.shape[3]
    cells = a.v_book[ss] * nu + a.u_book[ss, uu]
    return ss, uu, cells


def decode(msgs: tuple, code: CodeInstance, cfg: SimConfig) -> Decoding:
    """Look for exactly one jointly typical quadruple inside the four received bins."""
    b1, w1, b2, w2 = (int(m) for m in msgs)
    s1, t1, c1 = _agent_candidates(code, 1, b1, w1)
    s2, t2, c2 = _agent_candidates(code, 2, b2, w2)
    k2 = code.p_quad.shape[2] * code.p_quad.shape[3]
    cells = (c1[:, None, :] * k2 + c2[None, :, :]).reshape(-1, code.n)
    ok = is_typical(joint_counts(cells, code.p_quad.size), code.p_quad, code.n, cfg.eps)
    hits = np.flatnonzero(ok)
    if hits.size != 1:
        status = "none" if hits.size == 0 else "ambiguous"
        return Decoding(status, None, np.full(code.n, code.fallback_letter, dtype=np.int64))
    i1, i2 = divmod(int(hits[0]), c2.shape[0])
    idx = (int(s1[i1]), int(t1[i1]), int(s2[i2]), int(t2[i2]))
    u1 = code.agents[0].u_book[idx[0], idx[1]]
    u2 = code.agents[1].u_book[idx[2], idx[3]]
    return Decoding("ok", idx, code.xhat[u1, u2])


# ---------------------------------------------------------------- trials


def sample_source(source: SourceSpec, n: int, rng: np.random.Generator) -> tuple:
    x = _draw(rng, source.px, n)
    out = [x]
    for ch in (source.py1_x, source.py2_x, source.pe_x):
        cdf = np.cumsum(ch, axis=1)
        cdf[:, -1] = 1.0
        u = rng.random(n)
        out.append((u[:, None] >= cdf[x]).sum(axis=1))
    return tuple(out)


@dataclass
class TrialRecord:
    x: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    e: np.ndarray
    msgs: tuple
    sent: tuple
    status: str
    decoded: Optional[tuple]
    xhat: np.ndarray
    distortion: float
    encoder_fallback: tuple

    @property
    def failed(self) -> bool:
        return self.status != "ok" or self.decoded != self.sent


@dataclass
class SimSummary:
    n: int
    trials: int
    mean_distortion: float
    distortion_stderr: float
    failure_rate: float
    failure_stderr: float
    fallback_rate: float
    records: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("n", "trials", "mean_distortion", "distortion_stderr",
                                              "failure_rate", "failure_stderr", "fallback_rate")}


def run_trial(source: SourceSpec, code: CodeInstance, cfg: SimConfig, t: int) -> TrialRecord:
    x, y1, y2, e = sample_source(source, cfg.n, stream(cfg.seed, ROLE_SOURCE, t))
    enc = [encode(y, k, code, cfg, stream(cfg.seed, ROLE_ENCODER, t, k)) for k, y in ((1, y1), (2, y2))]
    msgs = (enc[0].b, enc[0].w, enc[1].b, enc[1].w)
    dec = decode(msgs, code, cfg)
    dist = float(source.distortion[x, dec.xhat].mean())
    return TrialRecord(x, y1, y2, e, msgs, (enc[0].s, enc[0].s2, enc[1].s, enc[1].s2), dec.status,
                       dec.indices, dec.xhat, dist,
                       (enc[0].v_fallback or enc[0].u_fallback, enc[1].v_fallback or enc[1].u_fallback))


def run_trials(source: SourceSpec, aux: AuxConfig, cfg: SimConfig, code: Optional[CodeInstance] = None,
               keep_records: bool = True) -> SimSummary:
    """Simulate ``cfg.trials`` independent blocks through one realized code."""
    code = gen_code(source, aux, cfg) if code is None else code
    records, dists, fails, fbs = [], [], [], []
    for t in range(cfg.trials):
        rec = run_trial(source, code, cfg, t)
        dists.append(rec.distortion)
        fails.append(rec.failed)
        fbs.append(any(rec.encoder_fallback))
        if keep_records:
            records.append(rec)
    T = cfg.trials
    if T == 0:
        return SimSummary(cfg.n, 0, math.nan, math.nan, math.nan, math.nan, math.nan, records)
    d = np.array(dists)
    f = float(np.mean(fails))
    d_se = float(d.std(ddof=1) / math.sqrt(T)) if T > 1 else math.nan
    return SimSummary(cfg.n, T, float(np.mean(d)), d_se, f, math.sqrt(f * (1 - f) / T),
                      float(np.mean(fbs)), records)


# ---------------------------------------------------------------- exact enumeration


def _power_channel(ch: np.ndarray, n: int) -> np.ndarray:
    return reduce(np.kron, [ch] * n)


def _power_pmf(p: np.ndarray, n: int) -> np.ndarray:
    return reduce(np.kron, [p] * n)


def _sequences(k: int, n: int) -> np.ndarray:
    """All length-n words over k letters, in the order used by Kronecker powers."""
    return np.array(np.unravel_index(np.arange(k**n), (k,) * n)).T


def message_law(source: SourceSpec, code: CodeInstance, agent: int, eps: float,
                level: str = "both") -> np.ndarray:
    """Matrix P(message | y^n) over every observation block.

    ``level="both"`` gives the transmitted pair (b, w); ``level="v"`` gives
    the chosen V codeword index instead.
    """
    a = code.agents[agent - 1]
    ny = (source.py1_x if agent == 1 else source.py2_x).shape[1]
    ys = _sequences(ny, code.n)
    if level == "v":
        ncol = a.sizes[0]
    else:
        ncol = a.n_bins_v * a.n_bins_u
    out = np.zeros((ys.shape[0], ncol))
    for r, y in enumerate(ys):
        for (s, s2), p in encoder_law(y, agent, code, eps).items():
            col = s if level == "v" else a.bin_v(s) * a.n_bins_u + a.bin_u(s2)
            out[r, col] += p
    return out


def enumeration_cost(source: SourceSpec, n: int, agent: int, sizes: tuple) -> int:
    """Work of an exact equivocation run, from the agent's (N_V, N_U, bins_V, bins_U) alone."""
    s = source.sizes
    nv, nu, bv, bu = sizes
    ny = s["Y1"] if agent == 1 else s["Y2"]
    return ny**n * nv * nu * n + s["X"]**n * (ny**n + s["E"]**n) * bv * bu


def equivocation_cost(source: SourceSpec, code: CodeInstance, agent: int) -> int:
    a = code.agents[agent - 1]
    return enumeration_cost(source, code.n, agent, (*a.sizes, a.n_bins_v, a.n_bins_u))


def _check_cap(cost: int):
    cap = enumeration_cap()
    if cost > cap:
        raise EnumerationCapExceeded(f"exact enumeration would cost {cost}, above the cap {cap}", cost, cap)


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def exact_equivocation(source: SourceSpec, code: CodeInstance, agent: int, cfg: SimConfig,
                       per_symbol: bool = True) -> float:
    """H(X^n | message of one agent, E^n) for the realized code, by full enumeration."""
    _check_cap(equivocation_cost(source, code, agent))
    n = code.n
    ch = source.py1_x if agent == 1 else source.py2_x
    pj = message_law(source, code, agent, cfg.eps)
    q = _power_channel(ch, n) @ pj                     # P(J | x^n)
    pxn = _power_pmf(source.px, n)
    pe = _power_channel(source.pe_x, n)                # P(e^n | x^n)
    h_xje, h_je = 0.0, 0.0
    chunk = max(1, int(2**22 // max(1, q.size)))
    for lo in range(0, pe.shape[1], chunk):
        t = (pxn[:, None, None] * pe[:, lo:lo + chunk, None]) * q[:, None, :]
        h_xje += _h(t.ravel())
        h_je += _h(t.sum(axis=0).ravel())
    total = h_xje - h_je
    return total / n if per_symbol else total


@dataclass
class Lemma1Report:
    n: int
    agent: int
    h_e_given_s: float
    bound: float
    slack: float
    holds: bool


def lemma1_check(source: SourceSpec, code: CodeInstance, cfg: SimConfig, agent: int = 1,
                 eps: float = 0.1, aux: Optional[AuxConfig] = None) -> Lemma1Report:
    """Compare H(E^n | chosen V index) with n (H(E|V) + eps) for the realized code.

    ``H(E|V)`` comes from the single-letter law, which needs ``aux``; without
    it the law is rebuilt from the code's (V, Y) marginal.
    """
    n = code.n
    ch = source.py1_x if agent == 1 else source.py2_x
    nv, nu = code.agents[agent - 1].sizes
    _check_cap(ch.shape[1]**n * nv * nu * n + nv * source.sizes["X"]**n * (ch.shape[1]**n + source.sizes["E"]**n))
    ps = message_law(source, code, agent, cfg.eps, level="v")      # P(s | y^n)
    q = _power_channel(ch, n) @ ps                                  # P(s | x^n)
    pxn = _power_pmf(source.px, n)
    pe = _power_channel(source.pe_x, n)
    joint_es = (pe * pxn[:, None]).T @ q                            # P(e^n, s)
    h = _h(joint_es.ravel()) - _h(joint_es.sum(axis=0))
    if aux is not None:
        h_e_v = entropy(chain_join(source, aux), "E", f"V{agent}")
    else:
        # P(v | y) from the stored (V, Y) joint, then push through the source
        pvy = code.p_vy[agent - 1]
        py = pvy.sum(axis=0)
        pv_y = np.divide(pvy, py[None, :], out=np.zeros_like(pvy), where=py[None, :] > 0).T
        pev = np.einsum("x,xe,xy,yv->ev", source.px, source.pe_x, ch, pv_y)
        h_e_v = _h(pev.ravel()) - _h(pev.sum(axis=0))
    bound = n * (h_e_v + eps)
    return Lemma1Report(n, agent, h, bound, bound - h, h <= bound + 1e-12)


# ---------------------------------------------------------------- rate helpers


def corner1_split(source: SourceSpec, aux: AuxConfig, margin: float = 0.0) -> tuple:
    """Layer rates (R_V1, R_U1, R_V2, R_U2) of the first corner point, scaled by 1 + margin.

    Agent 2 is decoded first (V2 then U2); agent 1 then uses U2 as side information.
    """
    j = chain_join(source, aux)
    # clip round-off so silent layers get exactly zero rate
    I = lambda a, b, g=(): (lambda v: v if v > 1e-12 else 0.0)(mutual_info(j, a, b, g))  # noqa: E731
    base = (I("V1", "Y1", "U2"), I("U1", "Y1", ("V1", "U2")), I("V2", "Y2"), I("U2", "Y2", "V2"))
    return tuple((1.0 + margin) * r for r in base)
