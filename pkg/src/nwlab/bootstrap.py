"""Learner-to-decider bootstrap for self-reducible functions.

Phase ``i`` learns ``f`` at arity ``i`` with membership queries answered by
the downward self-reduction over the arity ``i - 1`` predictor, keeps the
candidate (one per advice string and learner run) that best matches
reduction-computed labels, and corrects it with a majority vote over random
self-reduction runs.  Procedures are vectorized over index arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import ArgumentError, BootstrapFailure, CapacityError
from .hypothesis import Hypothesis, TableHypothesis
from .oracle import MembershipOracle
from .truthtable import TruthTable

MAX_ARITY = 20


@dataclass
class DsrSpec:
    """``reduce(x, n, lower)`` computes ``f`` on arity-``n`` indices ``x``.

    ``lower(y, m)`` answers ``f`` on arity-``m`` indices and only accepts
    ``m < n``.  ``base`` holds explicit tables for the smallest arities.
    """

    name: str
    reduce: Callable
    base: Dict[int, TruthTable]

    def evaluate(self, x, n: int, lower: Callable) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if n in self.base:
            return self.base[n].to_array()[x]

        def guarded(y, m):
            if m >= n:
                raise ArgumentError(f"downward reduction at arity {n} queried arity {m}")
            return np.asarray(lower(np.asarray(y, dtype=np.int64), m), dtype=np.uint8)

        return np.asarray(self.reduce(x, n, guarded), dtype=np.uint8)

    def table(self, n: int) -> TruthTable:
        """Reference table at arity ``n`` by recursing down to the base."""
        if n > MAX_ARITY:
            raise CapacityError(f"reference tables limited to arity {MAX_ARITY}")
        tables = dict((m, t.to_array()) for m, t in self.base.items())
        for m in range(min(self.base), n + 1):
            if m not in tables:
                tables[m] = self.evaluate(np.arange(1 << m), m, lambda y, a: tables[a][y])
        return TruthTable.from_array(n, tables[n])


@dataclass
class RsrSpec:
    """Random self-reduction: ``f(x) = combine(x, r, [f(g_1(x, r)), ...])``."""

    name: str
    queries: Callable  # (x, r, n) -> list of index arrays, each uniform for uniform r
    combine: Callable  # (x, r, answers, n) -> bits
    query_count: Callable[[int], int]
    rand_bits: Callable[[int], int]

    def run(self, x, r, n: int, oracle: Callable) -> np.ndarray:
        answers = [np.asarray(oracle(q), dtype=np.uint8) for q in self.queries(x, r, n)]
        return np.asarray(self.combine(x, r, answers, n), dtype=np.uint8)


@dataclass
class AdviceLearner:
    """``procedure(oracle, n, advice, rng)`` returns a hypothesis or ``None``.

    The contract only has to hold for one advice string per arity.
    """

    name: str
    procedure: Callable
    advice_length: Callable[[int], int] = lambda n: 0
    budget: Optional[int] = None

    def advice_strings(self, n: int) -> List[str]:
        a = self.advice_length(n)
        return [format(z, f"0{a}b") if a else "" for z in range(1 << a)]

    def run(self, oracle: MembershipOracle, advice: str, rng) -> Optional[Hypothesis]:
        if self.budget is not None:
            oracle.budget = oracle.count + self.budget
        try:
            return self.procedure(oracle, oracle.n, advice, rng)
        except Exception as exc:  # a learner on wrong advice may do anything
            if isinstance(exc, (ArgumentError, CapacityError)):
                raise
            return None


# parity -------------------------------------------------------------------


def parity_instance(max_arity: int = 12):
    """Parity with ``f(x) = f(x_1..x_{n-1}) xor x_n`` and ``f(x) = f(x ^ r) xor f(r)``."""

    def reduce(x, n, lower):
        low = x & ((1 << (n - 1)) - 1)
        return lower(low, n - 1) ^ ((x >> (n - 1)) & 1).astype(np.uint8)

    dsr = DsrSpec("parity", reduce, {1: TruthTable(1, 0b10)})
    rsr = RsrSpec("parity", lambda x, r, n: [x ^ r, r],
                  lambda x, r, ans, n: ans[0] ^ ans[1],
                  query_count=lambda n: 2, rand_bits=lambda n: n)
    refs = {n: TruthTable.parity(n) for n in range(1, max_arity + 1)}
    return dsr, rsr, refs


def perfect_learner() -> AdviceLearner:
    """No advice; queries every point."""

    def proc(oracle, n, advice, rng):
        return TableHypothesis(TruthTable.from_array(n, oracle.query_many(np.arange(1 << n))))

    return AdviceLearner("perfect", proc)


def noisy_advice_learner(noise: float = 0.01) -> AdviceLearner:
    """One advice bit: ``"1"`` gives the table with i.i.d. ``noise`` flips, ``"0"`` its exact complement."""

    def proc(oracle, n, advice, rng):
        arr = oracle.query_many(np.arange(1 << n))
        if advice == "1":
            arr = arr ^ (rng.random(arr.size) < noise).astype(np.uint8)
        else:
            arr = 1 - arr
        return TableHypothesis(TruthTable.from_array(n, arr))

    return AdviceLearner(f"noisy{noise}", proc, advice_length=lambda n: 1)


def garbage_advice_learner(good: AdviceLearner, a: int, good_advice: str) -> AdviceLearner:
    """``good`` under ``good_advice``, uniformly random tables under every other string."""

    def proc(oracle, n, advice, rng):
        if advice == good_advice:
            return good.procedure(oracle, n, "1" if good.advice_length(n) else "", rng)
        return TableHypothesis(TruthTable.from_array(n, rng.integers(0, 2, 1 << n)))

    return AdviceLearner(f"garbage({good.name})", proc, advice_length=lambda n: a)


# the bootstrap --------------------------------------------------------------


def _mix(v: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer on uint64 arrays."""
    v = (v + np.uint64(0x9E3779B97F4A7C15))
    v = (v ^ (v >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    v = (v ^ (v >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return v ^ (v >> np.uint64(31))


class CorrectedPredictor(Hypothesis):
    """Majority over ``reps`` random self-reduction runs on top of ``inner``.

    The randomness of run ``j`` on input ``x`` is a fixed hash of
    ``(seed, j, x)``, so the predictor is a deterministic function.
    """

    kind = "rsr-majority"

    def __init__(self, inner: Hypothesis, rsr: RsrSpec, reps: int, seed: int):
        if reps < 1:
            raise ArgumentError("need at least one run")
        self.inner = inner
        self.rsr = rsr
        self.n = inner.n
        self.reps = reps
        self.seed = seed
        self.size = reps * (rsr.query_count(self.n) * inner.size + 1)

    def randomness(self, x: np.ndarray, j: int) -> np.ndarray:
        bits = self.rsr.rand_bits(self.n)
        if bits > 64:
            raise CapacityError("hash randomness limited to 64 bits per run")
        with np.errstate(over="ignore"):
            key = _mix(np.array([(self.seed * 1000003 + j) % (1 << 64)], dtype=np.uint64))[0]
            r = _mix(x.astype(np.uint64) ^ key)
        if bits < 64:
            r = r & np.uint64((1 << bits) - 1)
        return r.astype(np.int64)

    def evaluate_many(self, idx) -> np.ndarray:
        x = np.asarray(idx, dtype=np.int64)
        votes = np.zeros(x.size, dtype=np.int64)
        for j in range(self.reps):
            votes += self.rsr.run(x, self.randomness(x, j), self.n, self.inner.evaluate_many)
        return (2 * votes > self.reps).astype(np.uint8)

    def to_dict(self) -> dict:
        return {**super().to_dict(), "reps": self.reps, "seed": self.seed,
                "inner": self.inner.to_dict()}


@dataclass
class BootstrapConfig:
    t_cap: int = 4096  # cap on the i**(10k) selection sample
    t_min: int = 64
    k: float = 1.0
    learner_runs: int = 3
    floor: float = 0.75  # two-query correction needs the candidate < 1/4 wrong
    reps: Optional[Callable[[int], int]] = None  # default 8 i + 1
    check_arity: int = 12  # exhaustive exactness diagnostics up to this arity

    def sample_size(self, i: int) -> int:
        return int(min(self.t_cap, max(self.t_min, math.ceil(i ** (10 * self.k)))))

    def repetitions(self, i: int) -> int:
        return self.reps(i) if self.reps is not None else 8 * i + 1


class BootstrapDecider:
    """Final randomized decider: base tables below the phases, corrected predictors above."""

    def __init__(self, dsr: DsrSpec, predictors: Dict[int, Hypothesis]):
        self.dsr = dsr
        self.predictors = predictors

    @property
    def max_arity(self) -> int:
        return max(list(self.predictors) + list(self.dsr.base))

    def evaluate_many(self, idx, n: int) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if n in self.predictors:
            return self.predictors[n].evaluate_many(idx)
        if n in self.dsr.base:
            return self.dsr.base[n].to_array()[idx]
        raise ArgumentError(f"no predictor for arity {n}")

    def __call__(self, x: int, n: int) -> int:
        return int(self.evaluate_many(np.array([x]), n)[0])

    def to_table(self, n: int) -> TruthTable:
        return TruthTable.from_array(n, self.evaluate_many(np.arange(1 << n), n))


def bootstrap_decider(L: AdviceLearner, dsr: DsrSpec, rsr: RsrSpec, n: int,
                  rng: np.random.Generator, config: Optional[BootstrapConfig] = None,
                  references: Optional[Dict[int, TruthTable]] = None):
    """Run phases up to arity ``n``; returns ``(decider, per-phase diagnostics)``.

    Raises :class:`BootstrapFailure` with the arity when no candidate reaches
    the selection floor.
    """
    cfg = config or BootstrapConfig()
    if n > MAX_ARITY:
        raise CapacityError(f"bootstrap limited to arity {MAX_ARITY}")
    if not dsr.base or min(dsr.base) > 1:
        raise ArgumentError("downward reduction needs a base table at arity 1")
    decider = BootstrapDecider(dsr, {})
    phases = []
    lower = decider.evaluate_many
    for i in range(min(dsr.base) + 1, n + 1):
        if i in dsr.base:
            continue
        calls = {"dsr": 0}

        def label(x, i=i):
            calls["dsr"] += int(np.size(x))
            return dsr.evaluate(x, i, lower)

        # part 1: a candidate per advice string and learner run
        candidates = []
        for z in L.advice_strings(i):
            for run in range(cfg.learner_runs):
                oracle = MembershipOracle(label, n=i)
                h = L.run(oracle, z, rng)
                candidates.append({"advice": z, "run": run, "hypothesis": h,
                                   "queries": oracle.count})
        # part 2: score on t reduction-labelled points, select, correct
        t = cfg.sample_size(i)
        ys = rng.integers(0, 1 << i, size=t)
        labels = label(ys)
        best = None
        for c in candidates:
            h = c["hypothesis"]
            c["score"] = float(np.mean(h.evaluate_many(ys) == labels)) if h is not None else None
            if c["score"] is not None and (best is None or c["score"] > best["score"]):
                best = c
        diag = {"arity": i, "t": t, "candidates": [
            {k: c[k] for k in ("advice", "run", "score", "queries")} for c in candidates]}
        if best is None or best["score"] < cfg.floor:
            diag["selected"] = None
            phases.append(diag)
            raise BootstrapFailure(f"no candidate reached the floor {cfg.floor} at arity {i}",
                                   arity=i, diagnostics={"phases": phases})
        reps = cfg.repetitions(i)
        pred = CorrectedPredictor(best["hypothesis"], rsr, reps, int(rng.integers(0, 2**62)))
        decider.predictors[i] = pred
        diag.update(selected=best["advice"], selected_run=best["run"], score=best["score"],
                    reps=reps, dsr_calls=calls["dsr"])
        if references is not None and i in references and i <= cfg.check_arity:
            ref = references[i].to_array()
            diag["candidate_errors"] = int(np.sum(best["hypothesis"].evaluate_many(np.arange(1 << i)) != ref))
            diag["exact"] = bool(np.array_equal(pred.evaluate_many(np.arange(1 << i)), ref))
        phases.append(diag)
    return decider, phases
