"""Evaluable predictors returned by learners and reconstructors.

Every hypothesis evaluates index arrays in bulk via ``evaluate_many`` and
records a ``size`` (wires for circuits, stored entries otherwise).  None of
them hold an oracle: whatever function values they need are hardwired.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from .circuits import Circuit, evaluate_points
from .truthtable import TruthTable


class Hypothesis:
    n: int
    size: int
    kind = "abstract"

    def evaluate_many(self, idx) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x: int) -> int:
        return int(self.evaluate_many(np.array([x]))[0])

    def to_table(self, chunk: int = 1 << 18) -> TruthTable:
        out = np.empty(1 << self.n, dtype=np.uint8)
        for lo in range(0, 1 << self.n, chunk):
            hi = min(lo + chunk, 1 << self.n)
            out[lo:hi] = self.evaluate_many(np.arange(lo, hi))
        return TruthTable.from_array(self.n, out)

    def to_dict(self) -> dict:
        return {"type": self.kind, "n": self.n, "size": self.size}


class TableHypothesis(Hypothesis):
    kind = "table"

    def __init__(self, table: TruthTable):
        self.table = table
        self.n = table.n
        self.size = table.size
        self._arr = table.to_array()

    def evaluate_many(self, idx) -> np.ndarray:
        return self._arr[np.asarray(idx, dtype=np.int64)]

    def to_table(self, chunk: int = 0) -> TruthTable:
        return self.table

    def to_dict(self) -> dict:
        return {**super().to_dict(), "table": self.table.to_hex()}


class CircuitHypothesis(Hypothesis):
    kind = "circuit"

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.n = circuit.n
        self.size = circuit.size

    def evaluate_many(self, idx) -> np.ndarray:
        return evaluate_points(self.circuit, idx)

    def to_dict(self) -> dict:
        return {**super().to_dict(), "circuit": self.circuit.to_dict()}


class SuffixHypothesis(Hypothesis):
    """``h(x) = inner(x, r)`` for a fixed suffix ``r`` on the high inputs."""

    kind = "suffix"

    def __init__(self, inner: Hypothesis, n: int, suffix: int):
        self.inner = inner
        self.n = n
        self.suffix = suffix
        self.size = inner.size

    def evaluate_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        return self.inner.evaluate_many(idx | (self.suffix << self.n))

    def to_dict(self) -> dict:
        return {**super().to_dict(), "suffix": self.suffix, "inner": self.inner.to_dict()}


class NwPredictor(Hypothesis):
    """Next-bit predictor with the seed outside one design set fixed.

    For input ``x`` placed on set ``S_i``, bits ``j < i`` of the generator
    table come from hardwired lookup tables over the overlap ``S_i & S_j``,
    bit ``i`` is the guess ``c`` and the remaining bits are the fixed ``u``.
    The answer is ``c`` when the (sign-adjusted) distinguisher accepts.
    """

    kind = "nw-predictor"

    def __init__(self, n: int, position: int, guess: int, rest: int,
                 overlaps: Sequence[np.ndarray], lookups: Sequence[np.ndarray],
                 dtable: np.ndarray, sign: int, dsize: int = 0):
        self.n = n
        self.position = position
        self.guess = guess
        self.rest = rest
        self.overlaps = [np.asarray(o, dtype=np.int64) for o in overlaps]
        self.lookups = [np.asarray(t, dtype=np.uint8) for t in lookups]
        self.dtable = np.asarray(dtable, dtype=np.uint8)
        self.sign = sign
        self.size = sum(len(t) for t in self.lookups) + dsize + 2

    def evaluate_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        table = np.full(idx.shape, self.rest | (self.guess << self.position), dtype=np.int64)
        for j, (pos, lut) in enumerate(zip(self.overlaps, self.lookups)):
            sub = np.zeros(idx.shape, dtype=np.int64)
            for b, p in enumerate(pos):
                sub |= ((idx >> p) & 1) << b
            table |= lut[sub].astype(np.int64) << j
        acc = self.dtable[table]
        if self.sign < 0:
            acc = 1 - acc
        return np.where(acc == 1, self.guess, 1 - self.guess).astype(np.uint8)

    def to_dict(self) -> dict:
        return {**super().to_dict(), "position": self.position, "guess": self.guess,
                "rest": self.rest, "sign": self.sign,
                "lookups": [{"positions": o.tolist(), "values": t.tolist()}
                            for o, t in zip(self.overlaps, self.lookups)],
                "distinguisher": "".join(map(str, self.dtable.tolist()))}


class XorVoteHypothesis(Hypothesis):
    """Majority over tuples ``(x placed in block b, fixed other blocks)``.

    Each tuple hardwires the XOR of the target's values on its other blocks,
    so ``h(tuple) xor that`` is a vote for ``f(x)``.
    """

    kind = "xor-vote"

    def __init__(self, inner: Hypothesis, n: int, t: int,
                 blocks: np.ndarray, others: np.ndarray, parities: np.ndarray):
        self.inner = inner
        self.n = n
        self.t = t
        self.blocks = np.asarray(blocks, dtype=np.int64)
        self.others = np.asarray(others, dtype=np.int64)  # tuple index with block b zeroed
        self.parities = np.asarray(parities, dtype=np.uint8)
        self.size = len(self.blocks) * (inner.size + 2) + 1

    def evaluate_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        votes = np.zeros(idx.shape, dtype=np.int64)
        for b, o, par in zip(self.blocks, self.others, self.parities):
            full = o | (idx << (b * self.n))
            votes += self.inner.evaluate_many(full) ^ par
        return (2 * votes > len(self.blocks)).astype(np.uint8)

    def to_dict(self) -> dict:
        return {**super().to_dict(), "t": self.t, "tuples": len(self.blocks),
                "inner": self.inner.to_dict()}


class MajorityHypothesis(Hypothesis):
    kind = "majority"

    def __init__(self, members: List[Hypothesis]):
        self.members = members
        self.n = members[0].n
        self.size = sum(h.size for h in members) + len(members)

    def evaluate_many(self, idx) -> np.ndarray:
        votes = sum(h.evaluate_many(idx).astype(np.int64) for h in self.members)
        return (2 * votes > len(self.members)).astype(np.uint8)


def error_rate(h: Hypothesis, f: TruthTable):
    """Exact disagreement fraction, as a Fraction."""
    from .truthtable import agreement

    return 1 - agreement(h.to_table(), f)
