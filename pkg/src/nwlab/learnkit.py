"""Conversions between learners, distinguishers and compressors.

A learner is a :class:`LearnerSpec`: a procedure ``(oracle, n, rng)`` that
returns a :class:`Hypothesis` or ``None`` on failure, together with its
declared accuracy/confidence contract and query budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional

import numpy as np

from .circuits import Circuit, Gate, enumerate_functions, evaluate_all, parse_basis
from .errors import BudgetExceeded, CompressionRejected, ContractFailure, LearnerFailure
from .hypothesis import (CircuitHypothesis, Hypothesis, SuffixHypothesis, TableHypothesis)
from .oracle import MembershipOracle
from .reconstruct import Distinguisher, ReconstructConfig, reconstruct_full
from .truthtable import TruthTable, agreement


@dataclass
class LearnerSpec:
    name: str
    procedure: Callable[[MembershipOracle, int, np.random.Generator], Optional[Hypothesis]]
    eps: float = 0.0
    delta: float = 0.0
    budget: Optional[int] = None

    def run(self, oracle: MembershipOracle, rng: np.random.Generator) -> Optional[Hypothesis]:
        """Run on ``oracle``; contract failures and budget exhaustion become ``None``."""
        saved = oracle.budget
        if self.budget is not None:
            cap = oracle.count + self.budget
            oracle.budget = cap if saved is None else min(saved, cap)
        try:
            return self.procedure(oracle, oracle.n, rng)
        except (ContractFailure, BudgetExceeded):
            return None
        finally:
            oracle.budget = saved


# builtin learners -----------------------------------------------------------


def memorizer() -> LearnerSpec:
    """Queries every point; exact on anything, at the price of ``2**n`` queries."""

    def proc(oracle, n, rng):
        return TableHypothesis(TruthTable.from_array(n, oracle.query_many(np.arange(1 << n))))

    return LearnerSpec("memorizer", proc)


def always_fail() -> LearnerSpec:
    return LearnerSpec("always-fail", lambda oracle, n, rng: None, delta=1.0)


def dnf_circuit(n: int, terms: List[int]) -> Circuit:
    """Monotone DNF over variable bitmasks as an unbounded-fan-in circuit."""
    if any(t == 0 for t in terms):
        return Circuit(n, "ac0", (), "c1")
    if not terms:
        return Circuit(n, "ac0", (), "c0")
    gates, outs = [], []
    for t in terms:
        vars_ = [f"x{i + 1}" for i in range(n) if t >> i & 1]
        if len(vars_) == 1:
            outs.append(vars_[0])
        else:
            gates.append(Gate("and", tuple(vars_)))
            outs.append(f"g{len(gates) - 1}")
    if len(outs) == 1:
        return Circuit(n, "ac0", tuple(gates), outs[0])
    gates.append(Gate("or", tuple(outs)))
    return Circuit(n, "ac0", tuple(gates), f"g{len(gates) - 1}")


def dnf_learner(samples: int = 200, max_terms: int = 8) -> LearnerSpec:
    """Monotone-DNF learner with membership queries.

    Equivalence queries are simulated on ``samples`` random points.  A
    positive counterexample is shrunk to a minimal positive point (a prime
    implicant of a monotone target) and added as a term; a negative one means
    the target is not monotone and the learner gives up.
    """

    def proc(oracle, n, rng):
        terms: List[int] = []
        for _ in range(max_terms + 1):
            X = rng.integers(0, 1 << n, size=samples, dtype=np.int64)
            y = oracle.query_many(X)
            h = np.zeros(samples, dtype=bool)
            for t in terms:
                h |= (X & t) == t
            if np.any(h & (y == 0)):
                return None
            pos = np.flatnonzero(~h & (y == 1))
            if pos.size == 0:
                return CircuitHypothesis(dnf_circuit(n, terms))
            if len(terms) == max_terms:
                return None
            x = int(X[pos[0]])
            for i in range(n):
                if x >> i & 1 and oracle.query(x & ~(1 << i)):
                    x &= ~(1 << i)
            terms.append(x)
        return None

    return LearnerSpec("dnf", proc, eps=0.0, delta=0.01)


def random_read_once_dnf(n: int, rng: np.random.Generator, terms=(2, 3), widths=(2, 4)) -> TruthTable:
    """Monotone DNF with disjoint terms of random widths over random variables."""
    k = int(rng.integers(terms[0], terms[1] + 1))
    w = rng.integers(widths[0], widths[1] + 1, size=k)
    while w.sum() > n:
        w[np.argmax(w)] -= 1
    perm = rng.permutation(n)
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=bool)
    at = 0
    for width in w:
        mask = sum(1 << int(v) for v in perm[at:at + width])
        out |= (idx & mask) == mask
        at += width
    return TruthTable.from_array(n, out)


def class_fit_learner(basis="aon", s: int = 4) -> LearnerSpec:
    """Queries everything and returns the best size-``s`` circuit function."""

    def proc(oracle, n, rng):
        tt = TruthTable.from_array(n, oracle.query_many(np.arange(1 << n)))
        cls = enumerate_functions(n, basis, s, allow_large=True)
        best = max(sorted(cls, key=lambda g: g.bits), key=lambda g: agreement(g, tt))
        return _SizedTable(best, s)

    return LearnerSpec(f"class-fit[{s}]", proc)


class _SizedTable(TableHypothesis):
    """A table hypothesis known to have a circuit of ``s`` wires."""

    def __init__(self, table, s):
        super().__init__(table)
        self.size = s


# learner -> distinguisher ------------------------------------------------------


def detector_sample_count(n: int, k: float) -> int:
    return math.ceil(n ** (5 * k))


def detector_threshold(n: int, k: float) -> float:
    return 0.5 + n ** (-2 * k)


def learner_to_distinguisher(L: LearnerSpec, k: float):
    """Complexity distinguisher from a learner with advantage ``>= n**-k``.

    Runs the learner, then estimates the hypothesis' agreement on ``n**(5k)``
    fresh random queries; outputs 0 (``looks learnable``) iff the estimate
    exceeds ``1/2 + n**(-2k)``.  No hypothesis, or budget exhaustion, gives 1.
    """

    def distinguish(oracle: MembershipOracle, rng: np.random.Generator):
        n = oracle.n
        info = {"samples": detector_sample_count(n, k), "threshold": detector_threshold(n, k)}
        h = L.run(oracle, rng)
        if h is None:
            info["reason"] = "learner failed"
            return 1, info
        try:
            X = rng.integers(0, 1 << n, size=info["samples"], dtype=np.int64)
            est = float((h.evaluate_many(X) == oracle.query_many(X)).mean())
        except BudgetExceeded:
            info["reason"] = "budget exhausted"
            return 1, info
        info["estimate"] = est
        return (0 if est > info["threshold"] else 1), info

    return distinguish


# distinguisher -> learner ------------------------------------------------------


def distinguisher_to_learner(D: Distinguisher, params: dict, gamma: float,
                             repetitions: int = 1, validation: int = 2000,
                             config: Optional[ReconstructConfig] = None) -> LearnerSpec:
    """Learner that runs the reconstruction up to ``repetitions`` times.

    Successful runs are compared on a shared oracle-labelled validation sample
    and the best hypothesis is returned.
    """
    cfg = config or ReconstructConfig()

    def proc(oracle, n, rng):
        found = []
        for _ in range(repetitions):
            try:
                h, rep = reconstruct_full(D, oracle, gamma, params, rng, cfg)
            except ContractFailure:
                continue
            found.append(h)
        if not found:
            return None
        if len(found) == 1:
            return found[0]
        X = rng.integers(0, 1 << n, size=validation, dtype=np.int64)
        y = oracle.query_many(X)
        scores = [float((h.evaluate_many(X) == y).mean()) for h in found]
        return found[int(np.argmax(scores))]

    return LearnerSpec(f"from-distinguisher[{D.name}]x{repetitions}", proc, eps=gamma)


# padding ------------------------------------------------------------------


def pad_learner(L: LearnerSpec, p: int, tries: int = 16, validation: int = 256,
                max_error: Optional[float] = None) -> LearnerSpec:
    """Learner for arity ``n`` from a learner ``L`` for arity ``n + p``.

    ``L`` runs on ``f'(x, y) = f(x)`` with each padded query answered by one
    query to ``f`` on its low block.  Random suffixes ``r`` give candidates
    ``h_r(x) = h'(x, r)``; the best on an oracle-labelled validation sample
    is returned (or failure when it exceeds ``max_error``).
    """
    if p < 0:
        raise ValueError("pad width must be >= 0")
    if p == 0:
        return L

    def proc(oracle, n, rng):
        low = (1 << n) - 1
        inner = MembershipOracle(lambda idx: oracle.query_many(np.asarray(idx) & low), n + p)
        h_pad = L.run(inner, rng)
        if h_pad is None:
            return None
        X = rng.integers(0, 1 << n, size=validation, dtype=np.int64)
        y = oracle.query_many(X)
        best, best_err = None, 2.0
        for _ in range(tries):
            h = SuffixHypothesis(h_pad, n, int(rng.integers(0, 1 << p)))
            err = float((h.evaluate_many(X) != y).mean())
            if err < best_err:
                best, best_err = h, err
        if max_error is not None and best_err > max_error:
            return None
        return best

    return LearnerSpec(f"pad[{p}]({L.name})", proc, L.eps, L.delta)


# compression --------------------------------------------------------------


@dataclass
class CompressionOutput:
    circuit: Circuit
    exact: bool
    size: int
    hypothesis_size: int
    disagreements: int
    error: Fraction = Fraction(0)

    def to_dict(self) -> dict:
        return {"exact": self.exact, "size": self.size, "hypothesis_size": self.hypothesis_size,
                "disagreements": self.disagreements, "circuit": self.circuit.to_dict()}


_PATCH_BASIS = "ac0[2]"


def _relabel(c: Circuit, offset: int):
    ren = lambda a: f"g{int(a[1:]) + offset}" if a.startswith("g") else a
    return [Gate(g.kind, tuple(ren(a) for a in g.args)) for g in c.gates], ren(c.output)


def patch_circuit(h: Circuit, points: List[int]) -> Circuit:
    """``h xor [x in points]``, the indicator being an OR of minterms."""
    n = h.n
    if not points:
        return h
    gates, out_h = _relabel(h, 0)
    negs = {}

    def lit(i, bit):
        if bit:
            return f"x{i + 1}"
        if i not in negs:
            gates.append(Gate("not", (f"x{i + 1}",)))
            negs[i] = f"g{len(gates) - 1}"
        return negs[i]

    minterms = []
    for x in points:
        lits = tuple(lit(i, x >> i & 1) for i in range(n))
        if n == 1:
            minterms.append(lits[0])
            continue
        gates.append(Gate("and", lits))
        minterms.append(f"g{len(gates) - 1}")
    if len(minterms) == 1:
        diff = minterms[0]
    else:
        gates.append(Gate("or", tuple(minterms)))
        diff = f"g{len(gates) - 1}"
    if diff == out_h:
        raise CompressionRejected("patch collapses onto the hypothesis output")
    gates.append(Gate("mod2", (out_h, diff)))
    return Circuit(n, _PATCH_BASIS, tuple(gates), f"g{len(gates) - 1}")


def compress_exact(tt: TruthTable, L: LearnerSpec, rng: np.random.Generator) -> CompressionOutput:
    """Exact circuit for ``tt`` from a learner run on the table-backed oracle.

    Rejects when the learner fails, returns a non-circuit, or its hypothesis
    disagrees with ``tt`` on more than ``2**n / n**3`` points.  Otherwise the
    disagreement set is patched in with an XOR.
    """
    n = tt.n
    oracle = MembershipOracle(tt)
    h = L.run(oracle, rng)
    if h is None:
        raise CompressionRejected("learner produced no hypothesis")
    if not isinstance(h, CircuitHypothesis):
        raise CompressionRejected("learner hypothesis is not a circuit")
    diff = h.to_table().bits ^ tt.bits
    count = diff.bit_count()
    if Fraction(count, 1 << n) > Fraction(1, n ** 3):
        raise CompressionRejected(f"hypothesis disagrees on {count} points",
                                  {"disagreements": count})
    points = [i for i in range(1 << n) if diff >> i & 1]
    circ = patch_circuit(h.circuit, points)
    if evaluate_all(circ) != tt:
        raise AssertionError("patched circuit does not reproduce the table")
    assert circ.size <= h.size + (n + 1) * count + n + 2
    return CompressionOutput(circ, True, circ.size, h.size, count)


def compression_learner(L: LearnerSpec) -> LearnerSpec:
    """Memorize the table through the oracle, then compress it exactly."""

    def proc(oracle, n, rng):
        tt = TruthTable.from_array(n, oracle.query_many(np.arange(1 << n)))
        try:
            return CircuitHypothesis(compress_exact(tt, L, rng).circuit)
        except CompressionRejected:
            return None

    return LearnerSpec(f"compress({L.name})", proc)


def algorithm_to_distinguisher(A: LearnerSpec, size_bound: Optional[Callable[[int], float]] = None):
    """Run ``A``, then compare its output with all ``2**n`` oracle values.

    Outputs 0 iff the exact agreement is at least 2/3 (and the output meets
    ``size_bound(n)`` when one is given).
    """

    def distinguish(oracle: MembershipOracle, rng: np.random.Generator):
        n = oracle.n
        h = A.run(oracle, rng)
        if h is None:
            return 1, {"reason": "algorithm failed"}
        if size_bound is not None and h.size > size_bound(n):
            return 1, {"reason": "output too large", "size": h.size}
        tt = TruthTable.from_array(n, oracle.query_many(np.arange(1 << n)))
        agr = agreement(h.to_table(), tt)
        return (0 if agr >= Fraction(2, 3) else 1), {"agreement": float(agr), "size": h.size}

    return distinguish


# membership + equivalence queries -------------------------------------------


@dataclass
class Transcript:
    events: list = field(default_factory=list)

    @property
    def equivalence_queries(self) -> int:
        return sum(1 for e in self.events if e[0] == "EQ")


def mq_eq_simulator(learner, tt: TruthTable, rng: Optional[np.random.Generator] = None):
    """Answer membership queries from ``tt`` and equivalence queries exhaustively.

    Counterexamples are the least disagreeing index.  Returns the transcript,
    the final hypothesis and the verdict (0 iff agreement >= 2/3).
    """
    tr = Transcript()

    def mq(x: int) -> int:
        v = tt[x]
        tr.events.append(("MQ", x, v))
        return v

    def eq(h: Hypothesis):
        diff = h.to_table().bits ^ tt.bits
        cx = None if diff == 0 else (diff & -diff).bit_length() - 1
        tr.events.append(("EQ", h.size, "yes" if cx is None else cx))
        return cx

    h = learner(mq, eq, tt.n, rng)
    if h is None:
        return tr, None, 1
    verdict = 0 if agreement(h.to_table(), tt) >= Fraction(2, 3) else 1
    return tr, h, verdict


def parity_table(n: int, mask: int) -> TruthTable:
    idx = np.arange(1 << n, dtype=np.int64) & mask
    return TruthTable.from_array(n, np.bitwise_count(idx.astype(np.uint64)) & 1)


def parity_eq_learner(mq, eq, n, rng=None):
    """Learn a parity with equivalence queries only, by Gaussian elimination over GF(2).

    Each counterexample ``x`` yields ``<a, x> = 1 - h(x)``; the hypothesis is
    the parity with free coordinates set to 0.  At most ``n + 1`` queries.
    """
    rows = []  # (pivot bit, row mask, rhs), kept in reduced echelon form
    mask = 0
    for _ in range(n + 2):
        h = TableHypothesis(parity_table(n, mask))
        cx = eq(h)
        if cx is None:
            return h
        row, rhs = cx, 1 - h(cx)
        for p, r, b in rows:
            if row >> p & 1:
                row ^= r
                rhs ^= b
        if row == 0:
            return None  # inconsistent: target is not a parity
        p = row.bit_length() - 1
        rows = [(q, r ^ row, b ^ rhs) if r >> p & 1 else (q, r, b) for q, r, b in rows]
        rows.append((p, row, rhs))
        mask = 0
        for q, r, b in rows:
            if b:
                mask |= 1 << q
    return None
