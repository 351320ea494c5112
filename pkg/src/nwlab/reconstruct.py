"""From a distinguisher for generator tables to a hypothesis for the hidden function.

Pipeline: locate a hybrid position where the distinguisher's acceptance
jumps, turn it into a next-bit predictor, fix the seed outside the predicted
design set (best of sampled completions, overlaps resolved by oracle-filled
lookup tables), then undo the XOR amplification by oracle-assisted voting.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from .circuits import Circuit, enumerate_functions, evaluate_all, parse_basis
from .errors import ArgumentError, DecodingFailure, ReconstructionFailure
from .designs import select_design
from .generator import BlackBoxGenerator, NwFamily
from .hypothesis import Hypothesis, NwPredictor, XorVoteHypothesis
from .oracle import MembershipOracle
from .truthtable import TruthTable, agreement, xor_amplify


# distinguishers -------------------------------------------------------------


class Distinguisher:
    """A test on arity-``ell`` tables, stored as its full acceptance table."""

    def __init__(self, ell: int, table, name: str = "custom", size: int = 0):
        table = np.asarray(table, dtype=np.uint8).ravel()
        if table.size != 1 << (1 << ell):
            raise ArgumentError(f"acceptance table must have 2**(2**{ell}) entries")
        self.ell = ell
        self.table = table
        self.name = name
        self.size = size

    def __call__(self, tt: TruthTable) -> int:
        return int(self.table[tt.bits])

    def accept_many(self, tables) -> np.ndarray:
        return self.table[np.asarray(tables, dtype=np.int64)]

    @classmethod
    def from_callable(cls, ell: int, fn: Callable[[TruthTable], int], name="callable"):
        if ell > 4:
            raise ArgumentError("callable distinguishers are tabulated; need ell <= 4")
        L = 1 << ell
        return cls(ell, [fn(TruthTable(ell, b)) & 1 for b in range(1 << L)], name)

    @classmethod
    def from_circuit(cls, c: Circuit, ell: int):
        if c.n != 1 << ell:
            raise ArgumentError(f"distinguisher circuit must read {1 << ell} table bits")
        return cls(ell, evaluate_all(c).to_array(), "circuit", c.size)

    @classmethod
    def constant(cls, ell: int, value: int):
        return cls(ell, np.full(1 << (1 << ell), value & 1, dtype=np.uint8), f"const{value & 1}")

    @classmethod
    def ones_at_most(cls, ell: int, k: int):
        counts = np.array([bin(b).count("1") for b in range(1 << (1 << ell))])
        return cls(ell, counts <= k, f"ones<={k}")

    @classmethod
    def mcsp_threshold(cls, ell: int, basis="aon", s0: int = 3):
        """Accept a table iff it has a circuit of at most ``s0`` wires."""
        table = np.zeros(1 << (1 << ell), dtype=np.uint8)
        for tt in enumerate_functions(ell, basis, s0):
            table[tt.bits] = 1
        return cls(ell, table, f"mcsp<={s0}:{parse_basis(basis).name}", size=s0)


# oracle for the amplified function -------------------------------------------


class AmplifiedOracle:
    """``F(x_1..x_t) = f(x_1) ^ ... ^ f(x_t)`` answered with ``t`` queries to ``f``."""

    def __init__(self, f_oracle: MembershipOracle, t: int):
        self.f = f_oracle
        self.t = t
        self.n = f_oracle.n * t

    def query_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        n = self.f.n
        out = np.zeros(idx.shape, dtype=np.uint8)
        for j in range(self.t):
            out ^= self.f.query_many((idx >> (j * n)) & ((1 << n) - 1))
        return out


def _as_oracle(f) -> MembershipOracle:
    return f if isinstance(f, MembershipOracle) else MembershipOracle(f)


# configuration and reports --------------------------------------------------


@dataclass
class ReconstructConfig:
    hybrid_samples: int = 10_000
    candidates: int = 64
    selection_samples: int = 2_000
    measure_samples: int = 10_000
    floor: Optional[float] = None  # defaults to 1/(8L)
    retries: int = 32
    min_gap: float = 0.25
    tuples: Optional[int] = None
    query_budget: Optional[int] = None

    def floor_for(self, L: int) -> float:
        return self.floor if self.floor is not None else 1.0 / (8 * L)


@dataclass
class GapReport:
    p_gen: float
    p_rand: float
    se_gen: float
    se_rand: float
    exact: bool

    @property
    def signed(self) -> float:
        return self.p_gen - self.p_rand

    @property
    def gap(self) -> float:
        return abs(self.signed)


@dataclass
class ReconstructionReport:
    params: dict
    gap: float = 0.0
    position: int = -1
    sign: int = 1
    hybrid: list = field(default_factory=list)
    selection_advantage: float = 0.0
    delta0: float = 0.0
    delta0_exhaustive: bool = False
    error: Optional[float] = None
    error_exhaustive: bool = False
    queries: int = 0
    weak_size: int = 0
    size: int = 0
    attempts: int = 0
    tuples: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


# gap measurement ------------------------------------------------------------


def _gen_tables(fam: NwFamily, Z: np.ndarray, F) -> np.ndarray:
    """Generator tables for seeds ``Z``, with base values from ``F`` (oracle or None)."""
    if F is None:
        return fam.table_indices(Z)
    inputs = fam.inputs(Z)
    bits = F.query_many(inputs.ravel()).reshape(inputs.shape).astype(np.int64)
    return (bits << np.arange(fam.L, dtype=np.int64)).sum(axis=1)


def distinguishing_gap(D: Distinguisher, gen: BlackBoxGenerator, trials: int,
                       rng: np.random.Generator, exact: Optional[bool] = None) -> GapReport:
    """Acceptance on generator tables versus uniformly random tables.

    Exact mode enumerates every assignment to the used seed coordinates and
    every table; it is the default when ``ell <= 2`` and at most 20 seed
    coordinates are used.
    """
    fam = gen.family
    if D.ell != fam.ell:
        raise ArgumentError(f"distinguisher reads arity {D.ell}, generator makes {fam.ell}")
    used = fam.used_coordinates()
    feasible = fam.ell <= 2 and used.size <= 20
    if exact is None:
        exact = feasible
    if exact:
        if not feasible:
            raise ArgumentError("exact gap needs ell <= 2 and at most 20 used seed bits")
        assign = (np.arange(1 << used.size)[:, None] >> np.arange(used.size)) & 1
        Z = np.zeros((assign.shape[0], fam.d), dtype=np.uint8)
        Z[:, used] = assign
        p_gen = float(D.accept_many(fam.table_indices(Z)).mean())
        p_rand = float(D.table.mean())
        return GapReport(p_gen, p_rand, 0.0, 0.0, True)
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    acc_gen = D.accept_many(fam.table_indices(fam.random_seeds(trials, rng)))
    acc_rand = D.accept_many(rng.integers(0, 1 << fam.L, size=trials, dtype=np.int64))
    p_gen, p_rand = float(acc_gen.mean()), float(acc_rand.mean())
    se = lambda p: math.sqrt(max(p * (1 - p), 0.0) / trials)
    return GapReport(p_gen, p_rand, se(p_gen), se(p_rand), False)


# next-bit prediction ----------------------------------------------------------


def _hybrid_profile(D, fam, F, N, rng):
    """Acceptance rates of hybrids ``H_0..H_L`` on shared samples."""
    G = _gen_tables(fam, fam.random_seeds(N, rng), F)
    U = rng.integers(0, 1 << fam.L, size=N, dtype=np.int64)
    full = (1 << fam.L) - 1
    probs = []
    for i in range(fam.L + 1):
        mask = (1 << i) - 1
        probs.append(float(D.accept_many((G & mask) | (U & (full ^ mask))).mean()))
    return probs


def _build_candidate(fam: NwFamily, i: int, alpha: np.ndarray, F):
    """Overlap positions (as bit positions of ``x``) and oracle-filled lookups for bits ``j < i``."""
    Si = fam.sets[i]
    where = {int(c): b for b, c in enumerate(Si)}
    overlaps, seeds = [], []
    for j in range(i):
        common = [c for c in fam.sets[j] if int(c) in where]
        pos = np.array([where[int(c)] for c in common], dtype=np.int64)
        assign = (np.arange(1 << len(common))[:, None] >> np.arange(len(common))) & 1
        Z = np.repeat(alpha[None, :], assign.shape[0], axis=0)
        if common:
            Z[:, np.array(common, dtype=np.int64)] = assign
        seeds.append(Z)
        overlaps.append(pos)
    if not seeds:
        return overlaps, []
    # one batched oracle call for all lookup entries
    Zall = np.concatenate(seeds)
    rows = np.concatenate([np.full(len(Z), j) for j, Z in enumerate(seeds)])
    inputs = (Zall.astype(np.int64)[np.arange(len(Zall))[:, None], fam.sets[rows]]
              * fam._weights).sum(axis=1)
    vals = F.query_many(inputs)
    lookups, at = [], 0
    for Z in seeds:
        lookups.append(vals[at:at + len(Z)])
        at += len(Z)
    return overlaps, lookups


def next_bit_predictor(D: Distinguisher, fam: NwFamily, f_oracle, rng: np.random.Generator,
                       config: Optional[ReconstructConfig] = None, t: int = 1):
    """Hybrid position and a predictor for the base function at that position.

    ``f_oracle`` answers the (unamplified) function; generator inputs are
    answered through ``t``-fold XOR.  Returns ``(position, predictor, diag)``.
    """
    cfg = config or ReconstructConfig()
    f_oracle = _as_oracle(f_oracle)
    F = AmplifiedOracle(f_oracle, t) if t > 1 else f_oracle
    if F.n != fam.k:
        raise ArgumentError(f"oracle arity {F.n} does not match the generator's {fam.k}")
    floor = cfg.floor_for(fam.L)
    best_seen = -1.0
    last = {}
    for attempt in range(1, cfg.retries + 1):
        probs = _hybrid_profile(D, fam, F, cfg.hybrid_samples, rng)
        sign = 1 if probs[-1] >= probs[0] else -1
        diffs = [sign * (probs[i + 1] - probs[i]) for i in range(fam.L)]
        i = int(np.argmax(diffs))
        last = {"hybrid": probs, "sign": sign, "position": i, "attempts": attempt}
        if diffs[i] <= 0:
            continue
        X = rng.integers(0, 1 << F.n, size=cfg.selection_samples, dtype=np.int64)
        labels = F.query_many(X)
        best, best_adv = None, -1.0
        for _ in range(cfg.candidates):
            alpha = rng.integers(0, 2, size=fam.d, dtype=np.int64)
            guess = int(rng.integers(0, 2))
            rest = int(rng.integers(0, 1 << fam.L)) & ~((1 << (i + 1)) - 1)
            overlaps, lookups = _build_candidate(fam, i, alpha, F)
            h = NwPredictor(F.n, i, guess, rest, overlaps, lookups, D.table, sign, D.size)
            adv = float((h.evaluate_many(X) == labels).mean()) - 0.5
            if adv > best_adv:
                best, best_adv = h, adv
        best_seen = max(best_seen, best_adv)
        if best_adv >= floor:
            last["selection_advantage"] = best_adv
            return i, best, last
    raise ReconstructionFailure(
        f"no predictor above the advantage floor {floor:.4g} after {cfg.retries} attempts",
        {**last, "best_advantage": best_seen, "queries": f_oracle.count})


def _weak(D, fam: NwFamily, t: int, f_oracle: MembershipOracle, rng, cfg,
          reference: Optional[TruthTable]):
    pos, h, diag = next_bit_predictor(D, fam, f_oracle, rng, cfg, t)
    if reference is not None and h.n <= 16:
        amp = fam.base if fam.base is not None else xor_amplify(reference, t)
        delta0 = float(agreement(h.to_table(), amp) - Fraction(1, 2))
        exhaustive = True
    else:
        F = AmplifiedOracle(f_oracle, t) if t > 1 else f_oracle
        X = rng.integers(0, 1 << h.n, size=cfg.measure_samples, dtype=np.int64)
        delta0 = float((h.evaluate_many(X) == F.query_many(X)).mean()) - 0.5
        exhaustive = False
    diag.update(delta0=delta0, delta0_exhaustive=exhaustive)
    return h, diag


def weak_approximator(D: Distinguisher, gen: BlackBoxGenerator, f_oracle,
                      rng: np.random.Generator, config: Optional[ReconstructConfig] = None,
                      reference: Optional[TruthTable] = None):
    """Predictor for the amplified function with its measured advantage ``delta0``.

    ``delta0`` is exact against ``reference`` when it is given and the
    amplified arity is at most 16, otherwise estimated on fresh oracle samples.
    """
    return _weak(D, gen.family, gen.t, _as_oracle(f_oracle), rng,
                 config or ReconstructConfig(), reference)


# XOR decoding ---------------------------------------------------------------


def default_tuples(n: int, delta0: float) -> int:
    r = math.ceil(4 * math.log(4 * 2 ** n) / max(delta0, 1e-3) ** 2)
    r = min(r, 4001)
    return r | 1


def xor_decode(h: Hypothesis, f_oracle, t: int, gamma: float, rng: np.random.Generator,
               delta0: Optional[float] = None, tuples: Optional[int] = None) -> Hypothesis:
    """Turn a weak predictor for the ``t``-fold XOR into a predictor for ``f``.

    Each of ``R`` tuples places ``x`` in a random block; the other blocks are
    random and their XOR under ``f`` is queried once and hardwired.  The output
    is the majority of ``h(tuple) xor hardwired`` over tuples.  ``t = 1`` is
    the identity.
    """
    if not 0 < gamma < 0.5:
        raise ArgumentError("gamma must lie in (0, 1/2)")
    if t < 1:
        raise ArgumentError("t must be >= 1")
    f_oracle = _as_oracle(f_oracle)
    n = f_oracle.n
    if h.n != n * t:
        raise ArgumentError(f"hypothesis arity {h.n} != {t} x {n}")
    if delta0 is not None and delta0 <= 0:
        raise DecodingFailure("weak predictor has no positive advantage", {"delta0": delta0})
    if t == 1:
        return h
    R = tuples or default_tuples(n, delta0 if delta0 is not None else 0.1)
    blocks = rng.integers(0, t, size=R, dtype=np.int64)
    others = rng.integers(0, 1 << (n * t), size=R, dtype=np.int64)
    low = (1 << n) - 1
    others &= ~(low << (blocks * n))
    parities = np.zeros(R, dtype=np.uint8)
    for j in range(t):
        sel = blocks != j
        parities[sel] ^= f_oracle.query_many((others[sel] >> (j * n)) & low)
    return XorVoteHypothesis(h, n, t, blocks, others, parities)


# full pipeline --------------------------------------------------------------


def reconstruct_full(D: Distinguisher, f: Union[TruthTable, MembershipOracle], gamma: float,
                     params: dict, rng: np.random.Generator,
                     config: Optional[ReconstructConfig] = None,
                     reference: Optional[TruthTable] = None):
    """Distinguisher plus oracle access to ``f`` to a hypothesis ``gamma``-close to ``f``.

    ``params`` holds ``ell``, ``t`` and optionally ``degree`` for the design.
    Everything the procedure learns about ``f`` goes through the oracle; a
    ``reference`` table (``f`` itself when a table is passed) only serves
    exact measurement of advantage and error.  Returns ``(hypothesis, report)``
    or raises a reconstruction failure; the error is always measured first.
    """
    cfg = config or ReconstructConfig()
    if isinstance(f, TruthTable):
        reference = reference or f
        oracle = MembershipOracle(f, budget=cfg.query_budget)
    else:
        oracle = f
    if not 0 < gamma < 0.5:
        raise ArgumentError("gamma must lie in (0, 1/2)")
    n = oracle.n
    ell, t = int(params.get("ell", D.ell)), int(params.get("t", 1))
    if ell != D.ell:
        raise ArgumentError(f"distinguisher reads arity {D.ell}, not {ell}")
    design, sel = select_design(n * t, 1 << ell, params.get("degree"))
    base = xor_amplify(reference, t) if reference is not None else None
    fam = NwFamily(base, design)
    F = AmplifiedOracle(oracle, t) if t > 1 else oracle
    rep = ReconstructionReport(params={"gamma": gamma, "ell": ell, "t": t, "n": n, "design": sel})

    def fail(exc):
        rep.queries = oracle.count
        exc.diagnostics = {**rep.to_dict(), **exc.diagnostics}
        return exc

    # gap on fresh samples, with generator values obtained through the oracle
    N = cfg.hybrid_samples
    p_gen = float(D.accept_many(_gen_tables(fam, fam.random_seeds(N, rng), F)).mean())
    p_rand = float(D.accept_many(rng.integers(0, 1 << fam.L, size=N, dtype=np.int64)).mean())
    rep.gap = abs(p_gen - p_rand)
    if rep.gap < cfg.min_gap:
        raise fail(ReconstructionFailure(f"distinguishing gap {rep.gap:.4f} below {cfg.min_gap}"))
    try:
        h, diag = _weak(D, fam, t, oracle, rng, cfg, reference)
    except ReconstructionFailure as exc:
        raise fail(exc)
    rep.position, rep.sign, rep.hybrid = diag["position"], diag["sign"], diag["hybrid"]
    rep.attempts = diag["attempts"]
    rep.selection_advantage = diag["selection_advantage"]
    rep.delta0, rep.delta0_exhaustive = diag["delta0"], diag["delta0_exhaustive"]
    rep.weak_size = h.size
    try:
        H = xor_decode(h, oracle, t, gamma, rng, rep.delta0, cfg.tuples)
    except DecodingFailure as exc:
        raise fail(exc)
    rep.tuples = int(getattr(H, "blocks", np.zeros(0)).size)
    rep.size = H.size
    if reference is not None and n <= 16:
        rep.error = float(1 - agreement(H.to_table(), reference))
        rep.error_exhaustive = True
    else:
        X = rng.integers(0, 1 << n, size=cfg.measure_samples, dtype=np.int64)
        rep.error = float((H.evaluate_many(X) != oracle.query_many(X)).mean())
    rep.queries = oracle.count
    if rep.error > gamma:
        raise fail(ReconstructionFailure(f"hypothesis error {rep.error:.4f} exceeds gamma={gamma}"))
    return H, rep
