"""Membership oracles with query accounting."""

from __future__ import annotations

from typing import Callable, Optional, Union

import numpy as np

from .errors import ArgumentError, BudgetExceeded
from .truthtable import TruthTable


class MembershipOracle:
    """Answers ``f(x)`` for input indices; every answered point costs one query.

    ``backing`` is a table or a vectorized callable ``idx_array -> bits``.
    """

    def __init__(self, backing: Union[TruthTable, Callable], n: Optional[int] = None,
                 budget: Optional[int] = None):
        if isinstance(backing, TruthTable):
            self.n = backing.n
            arr = backing.to_array()
            self._fn = lambda idx: arr[idx]
        else:
            if n is None:
                raise ArgumentError("callable oracles need an explicit arity")
            self.n = n
            self._fn = backing
        self.budget = budget
        self.count = 0

    def remaining(self) -> Optional[int]:
        return None if self.budget is None else self.budget - self.count

    def query_many(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= 1 << self.n):
            raise ArgumentError("query index out of range")
        if self.budget is not None and self.count + idx.size > self.budget:
            raise BudgetExceeded(f"query budget {self.budget} exhausted")
        self.count += int(idx.size)
        return np.asarray(self._fn(idx), dtype=np.uint8)

    def query(self, x: int) -> int:
        return int(self.query_many(np.array([x]))[0])

    def __call__(self, x: int) -> int:
        return self.query(x)
