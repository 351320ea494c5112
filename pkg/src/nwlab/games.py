"""The function-versus-probe zero-sum game.

Rows are truth tables (the row player picks a function to look random),
columns are oracle probes (the column player tries to tell it from a random
function).  The payoff is ``M(h, C) = C(h) - Pr_f[C(f) = 1]``; the row player
minimizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ArgumentError, CapacityError, StatisticalFailure
from .lp import solve_packing
from .truthtable import TruthTable

EXACT_MAX_ROWS = 64
EXACT_MAX_COLS = 4096


# probes -------------------------------------------------------------------


@dataclass(frozen=True)
class NonAdaptiveProbe:
    """Query distinct ``points``; accept per ``predicate`` bit at ``sum a_j 2**j``."""

    points: Tuple[int, ...]
    predicate: int

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise ArgumentError("probe points must be distinct")
        if self.predicate < 0 or self.predicate >> (1 << len(self.points)):
            raise ArgumentError("predicate has bits beyond 2**q")

    @property
    def q(self) -> int:
        return len(self.points)

    def check(self, n: int) -> None:
        if any(not 0 <= p < 1 << n for p in self.points):
            raise ArgumentError(f"probe point out of range for arity {n}")

    def accepts(self, h: TruthTable) -> int:
        a = 0
        for j, p in enumerate(self.points):
            a |= h[p] << j
        return (self.predicate >> a) & 1

    def pr_random(self) -> Fraction:
        return Fraction(self.predicate.bit_count(), 1 << self.q)

    def complement(self) -> "NonAdaptiveProbe":
        return NonAdaptiveProbe(self.points, self.predicate ^ ((1 << (1 << self.q)) - 1))

    def to_dict(self) -> dict:
        return {"type": "points", "points": list(self.points), "predicate": self.predicate}


Tree = Union[Tuple[str, int], Tuple[str, int, "Tree", "Tree"]]


@dataclass(frozen=True)
class DecisionTreeProbe:
    """Adaptive probe: ``("leaf", v)`` or ``("query", point, if0, if1)``."""

    tree: Tree

    def __post_init__(self):
        self._check(self.tree, frozenset())

    def _check(self, node, seen):
        if node[0] == "leaf":
            if node[1] not in (0, 1):
                raise ArgumentError("leaf verdicts must be 0 or 1")
            return
        if node[0] != "query" or len(node) != 4:
            raise ArgumentError(f"malformed tree node {node!r}")
        if node[1] in seen:
            raise ArgumentError("a path queries the same point twice")
        self._check(node[2], seen | {node[1]})
        self._check(node[3], seen | {node[1]})

    def check(self, n: int) -> None:
        def walk(node):
            if node[0] == "query":
                if not 0 <= node[1] < 1 << n:
                    raise ArgumentError(f"probe point out of range for arity {n}")
                walk(node[2])
                walk(node[3])
        walk(self.tree)

    def accepts(self, h: TruthTable) -> int:
        node = self.tree
        while node[0] == "query":
            node = node[3] if h[node[1]] else node[2]
        return node[1]

    def pr_random(self) -> Fraction:
        def pr(node):
            if node[0] == "leaf":
                return Fraction(node[1])
            return (pr(node[2]) + pr(node[3])) / 2
        return pr(self.tree)

    def complement(self) -> "DecisionTreeProbe":
        def flip(node):
            if node[0] == "leaf":
                return ("leaf", 1 - node[1])
            return ("query", node[1], flip(node[2]), flip(node[3]))
        return DecisionTreeProbe(flip(self.tree))

    def to_dict(self) -> dict:
        return {"type": "tree", "tree": self.tree}


def point_probes(n: int, q: int = 1) -> List[NonAdaptiveProbe]:
    """Every probe on ``q`` increasing points with every predicate (q <= 2)."""
    from itertools import combinations

    if q > 2:
        raise CapacityError("enumerating all predicates is limited to q <= 2")
    out = []
    for pts in combinations(range(1 << n), q):
        for pred in range(1 << (1 << q)):
            out.append(NonAdaptiveProbe(pts, pred))
    return out


# matrices -----------------------------------------------------------------


class GameMatrix:
    """Exact payoff matrix with an integer view ``num / scale``."""

    def __init__(self, entries: Sequence[Sequence[Fraction]], rows=None, cols=None):
        self.entries = [[Fraction(v) for v in row] for row in entries]
        if not self.entries or not self.entries[0]:
            raise ArgumentError("matrix must be nonempty")
        width = len(self.entries[0])
        if any(len(r) != width for r in self.entries):
            raise ArgumentError("ragged matrix")
        self.rows = rows
        self.cols = cols
        self.scale = reduce(math.lcm, (v.denominator for r in self.entries for v in r), 1)
        self.num = np.array([[int(v * self.scale) for v in r] for r in self.entries], dtype=object)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def as_float(self) -> np.ndarray:
        return np.array(self.num, dtype=float) / self.scale

    def row_value(self, weights: Sequence[Fraction]) -> Fraction:
        """``max_j sum_i w_i M[i, j]`` exactly."""
        den = reduce(math.lcm, (Fraction(w).denominator for w in weights), 1)
        w = np.array([int(Fraction(x) * den) for x in weights], dtype=object)
        return Fraction(int(max(w @ self.num)), den * self.scale)

    def col_value(self, weights: Sequence[Fraction]) -> Fraction:
        """``min_i sum_j M[i, j] w_j`` exactly."""
        den = reduce(math.lcm, (Fraction(w).denominator for w in weights), 1)
        w = np.array([int(Fraction(x) * den) for x in weights], dtype=object)
        return Fraction(int(min(self.num @ w)), den * self.scale)


def close_under_complement(cols) -> list:
    seen, out = set(), []
    for c in cols:
        for probe in (c, c.complement()):
            if probe not in seen:
                seen.add(probe)
                out.append(probe)
    return out


def build_matrix(rows: Sequence[TruthTable], cols, n: int, close: bool = True) -> GameMatrix:
    """``M(h, C) = C(h) - Pr_f[C(f) = 1]`` over rows and the complement-closed probes."""
    for h in rows:
        if h.n != n:
            raise ArgumentError(f"row of arity {h.n}, expected {n}")
    cols = close_under_complement(cols) if close else list(cols)
    for c in cols:
        c.check(n)
    pr = [c.pr_random() for c in cols]
    entries = [[Fraction(c.accepts(h)) - p for c, p in zip(cols, pr)] for h in rows]
    return GameMatrix(entries, list(rows), cols)


# strategies ---------------------------------------------------------------


@dataclass
class MixedStrategy:
    side: str
    support: Tuple[int, ...]  # a multiset when weights is None
    weights: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        if self.side not in ("row", "col"):
            raise ArgumentError("side must be 'row' or 'col'")
        if self.weights is not None:
            if len(self.weights) != len(self.support) or sum(self.weights) != 1:
                raise ArgumentError("weights must match the support and sum to 1")

    @property
    def k(self) -> int:
        return len(self.support)

    @property
    def uniform(self) -> bool:
        return self.weights is None

    def dense(self, size: int) -> List[Fraction]:
        out = [Fraction(0)] * size
        if self.weights is None:
            for i in self.support:
                out[i] += Fraction(1, len(self.support))
        else:
            for i, w in zip(self.support, self.weights):
                out[i] += w
        return out

    def to_dict(self) -> dict:
        d = {"side": self.side, "support": list(self.support)}
        if self.weights is not None:
            d["weights"] = [str(w) for w in self.weights]
        return d


def strategy_from_dense(side: str, w: Sequence[Fraction]) -> MixedStrategy:
    idx = tuple(i for i, x in enumerate(w) if x)
    return MixedStrategy(side, idx, tuple(Fraction(w[i]) for i in idx))


@dataclass
class GameSolution:
    value: Union[Fraction, float]
    p: MixedStrategy
    q: MixedStrategy
    mode: str
    row_value: Union[Fraction, float] = None  # v(p), max over columns
    col_value: Union[Fraction, float] = None  # v(q), min over rows
    rounds: int = 0
    pivots: int = 0


def game_value(M: GameMatrix, mode: str = "exact", delta: float = 0.1) -> GameSolution:
    """Value and optimal strategies.

    ``exact`` solves a packing LP with exact integer pivots and asserts the
    min-max equality; ``approx`` runs multiplicative weights for
    ``ceil(R**2 ln(rows) / (2 delta**2))`` rounds, ``R`` the payoff range.
    """
    r, c = M.shape
    if mode == "exact":
        if r > EXACT_MAX_ROWS or c > EXACT_MAX_COLS:
            raise CapacityError(f"exact mode limited to {EXACT_MAX_ROWS}x{EXACT_MAX_COLS}")
        # B = K - M > 0; the column player's packing LP over B y <= 1 has value 1/w
        K = int(max(M.num.max(), 0)) + M.scale
        B = (K - M.num).tolist()
        sol = solve_packing(B, [M.scale] * r, _float_hint(B, M.scale) if c > 64 else None)
        total = sol.objective  # = scale / w in payoff units
        w = Fraction(M.scale) / total
        value = Fraction(K, M.scale) - w / M.scale
        qv = [y / total for y in sol.primal]
        pv = [x / sum(sol.dual) for x in sol.dual]
        vp, vq = M.row_value(pv), M.col_value(qv)
        if not vp == value == vq:
            raise AssertionError(f"min-max mismatch: {vp} vs {value} vs {vq}")
        return GameSolution(value, strategy_from_dense("row", pv), strategy_from_dense("col", qv),
                            "exact", vp, vq, pivots=sol.pivots)
    if mode != "approx":
        raise ArgumentError(f"unknown mode {mode!r}")
    if not delta > 0:
        raise ArgumentError("delta must be positive")
    A = M.as_float()
    R = max(float(A.max() - A.min()), 1e-12)
    T = max(1, math.ceil(R * R * math.log(r) / (2 * delta * delta))) if r > 1 else 1
    eta = math.sqrt(8 * math.log(r) / T) / R if r > 1 else 0.0
    logw = np.zeros(r)
    p_sum = np.zeros(r)
    counts = np.zeros(c, dtype=np.int64)
    for _ in range(T):
        p = np.exp(logw - logw.max())
        p /= p.sum()
        j = int(np.argmax(p @ A))
        p_sum += p
        counts[j] += 1
        logw -= eta * A[:, j]
    p_hat = p_sum / T
    q_hat = counts / T
    vp, vq = float((p_hat @ A).max()), float((A @ q_hat).min())
    qi = tuple(int(j) for j in np.flatnonzero(counts))
    qs = MixedStrategy("col", qi, tuple(Fraction(int(counts[j]), T) for j in qi))
    ps = _normalized("row", range(r), [Fraction(x).limit_denominator(10**9) for x in p_hat])
    return GameSolution((vp + vq) / 2, ps, qs, "approx", vp, vq, rounds=T)


def _float_hint(B, scale) -> list:
    """Support of a floating-point optimum, used only to warm-start the exact solver."""
    from scipy.optimize import linprog

    A = np.array(B, dtype=float)
    res = linprog(-np.ones(A.shape[1]), A_ub=A, b_ub=np.full(A.shape[0], float(scale)),
                  bounds=(0, None), method="highs")
    if res.status != 0:
        return []
    return [int(j) for j in np.argsort(-res.x) if res.x[j] > 1e-12]


def _normalized(side: str, support, weights) -> MixedStrategy:
    """Make rounded weights sum to exactly 1 by adjusting the largest, dropping zeros."""
    w = list(weights)
    i = max(range(len(w)), key=lambda j: w[j])
    w[i] += 1 - sum(w)
    idx = tuple(j for j, x in zip(support, w) if x)
    return MixedStrategy(side, idx, tuple(x for x in w if x))


# small support --------------------------------------------------------------


def support_size(count: int, delta: float) -> int:
    return max(1, math.ceil(10 * math.log(count) / delta ** 2)) if count > 1 else 1


@dataclass
class SmallSupport:
    p: MixedStrategy
    q: MixedStrategy
    vp: Fraction
    vq: Fraction
    value: Fraction
    attempts: int
    first_ok: bool


def small_support(M: GameMatrix, delta: float, rng: np.random.Generator,
                  solution: Optional[GameSolution] = None, budget: int = 20) -> SmallSupport:
    """k-uniform strategies sampled from optimal ones, verified exactly.

    ``k_r = ceil(10 ln(#cols) / delta**2)`` rows from ``p`` and ``k_c`` likewise
    columns from ``q``; success means ``v(p~) <= v + delta`` and ``v(q~) >= v - delta``.
    """
    sol = solution or game_value(M, "exact")
    r, c = M.shape
    kr, kc = support_size(c, delta), support_size(r, delta)
    pv = np.array([float(x) for x in sol.p.dense(r)])
    qv = np.array([float(x) for x in sol.q.dense(c)])
    d = Fraction(delta).limit_denominator(10**6)
    for attempt in range(1, budget + 1):
        rows = tuple(sorted(int(i) for i in rng.choice(r, size=kr, p=pv / pv.sum())))
        cols = tuple(sorted(int(j) for j in rng.choice(c, size=kc, p=qv / qv.sum())))
        ps, qs = MixedStrategy("row", rows), MixedStrategy("col", cols)
        vp, vq = M.row_value(ps.dense(r)), M.col_value(qs.dense(c))
        if vp <= sol.value + d and vq >= sol.value - d:
            return SmallSupport(ps, qs, vp, vq, sol.value, attempt, attempt == 1)
    raise StatisticalFailure("small-support verification failed within budget",
                             {"attempts": budget, "k_rows": kr, "k_cols": kc})


# samplers -------------------------------------------------------------------


@dataclass
class Sampler:
    """Read ``bits`` uniform bits per round; an index below ``k`` selects the
    support entry, otherwise retry, for at most ``depth`` rounds; if every
    round rejects, output the first support entry."""

    support: Tuple[int, ...]
    bits: int
    depth: int

    @property
    def k(self) -> int:
        return len(self.support)

    def select(self, words: Sequence[int]) -> int:
        for wd in words[: self.depth]:
            if wd < self.k:
                return self.support[wd]
        return self.support[0]

    def distribution(self) -> Dict[int, Fraction]:
        """Exact output distribution over support indices."""
        k, b, D = self.k, self.bits, self.depth
        out: Dict[int, Fraction] = {}
        if b == 0:
            return {self.support[0]: Fraction(1)}
        if b * D <= 20:
            # every selector string of D words
            total = 1 << (b * D)
            counts: Dict[int, int] = {}
            mask = (1 << b) - 1
            for s in range(total):
                words = [(s >> (b * i)) & mask for i in range(D)]
                v = self.select(words)
                counts[v] = counts.get(v, 0) + 1
            return {v: Fraction(cnt, total) for v, cnt in counts.items()}
        # one round exactly, composed over D rounds
        reject = Fraction((1 << b) - k, 1 << b)
        reach = 1 - reject ** D
        for i in self.support:
            out[i] = out.get(i, Fraction(0)) + reach / k
        out[self.support[0]] = out.get(self.support[0], Fraction(0)) + reject ** D
        return out

    def total_variation(self) -> Fraction:
        target: Dict[int, Fraction] = {}
        for i in self.support:
            target[i] = target.get(i, Fraction(0)) + Fraction(1, self.k)
        got = self.distribution()
        keys = set(target) | set(got)
        return sum(abs(target.get(x, 0) - got.get(x, 0)) for x in keys) / 2

    def sample(self, rng: np.random.Generator) -> int:
        words = rng.integers(0, 1 << self.bits, size=self.depth) if self.bits else [0]
        return self.select([int(w) for w in words])


def strategy_to_sampler(p: MixedStrategy, rows=None, depth: int = 10) -> Sampler:
    """Explicit selector for a k-uniform strategy: ``ceil(log2 k)`` bits per round."""
    if not p.uniform:
        raise ArgumentError("sampler needs a k-uniform strategy")
    k = p.k
    bits = (k - 1).bit_length()
    return Sampler(tuple(p.support), bits, depth if k & (k - 1) else 1)


def sampler_table_distribution(s: Sampler, rows: Sequence[TruthTable]) -> Dict[TruthTable, Fraction]:
    out: Dict[TruthTable, Fraction] = {}
    for i, pr in s.distribution().items():
        out[rows[i]] = out.get(rows[i], Fraction(0)) + pr
    return out
