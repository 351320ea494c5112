"""Exact simplex for packing LPs with integer-preserving pivots.

Solves ``max 1'y  s.t.  A y <= b, y >= 0`` for a nonnegative integer matrix
``A`` and positive integer ``b``.  The tableau holds integers ``T`` with a
common denominator ``d`` (the previous pivot); a pivot on ``(p, q)`` maps
``T_ij -> (T_pq T_ij - T_iq T_pj) / d``, which is always an exact division.
Entering columns follow the most-negative reduced cost; after a run of
degenerate pivots the solver switches to Bland's rule, which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List

import numpy as np


@dataclass
class PackingSolution:
    objective: Fraction
    primal: List[Fraction]  # y, one per column of A
    dual: List[Fraction]  # u, one per row of A, with A'u >= 1
    pivots: int


def solve_packing(A, b, hint=None) -> PackingSolution:
    """``hint`` lists columns to pivot into the basis before the simplex proper.

    A good hint (e.g. the support of a floating-point optimum) leaves only a
    few certifying pivots; any hint is safe since every crash pivot keeps the
    tableau primal feasible.
    """
    A = [[int(v) for v in row] for row in A]
    m, c = len(A), len(A[0])
    if any(v < 0 for row in A for v in row) or any(int(v) <= 0 for v in b):
        raise ValueError("packing LP needs A >= 0 and b > 0")
    width = c + m + 1
    T = np.zeros((m + 1, width), dtype=object)
    T[:] = 0
    for i in range(m):
        T[i, :c] = A[i]
        T[i, c + i] = 1
        T[i, -1] = int(b[i])
    T[m, :c] = -1
    basis = [c + i for i in range(m)]
    d = 1
    pivots = 0
    degenerate = 0
    bland = False
    crash = [j for j in (hint or []) if 0 <= j < c]
    while True:
        obj = T[m, :-1]
        if crash:
            entering = crash.pop(0)
            if entering in basis or not any(T[i, entering] > 0 for i in range(m)):
                continue
        elif bland:
            entering = next((j for j in range(width - 1) if obj[j] < 0), None)
        else:
            j = int(np.argmin(obj))
            entering = j if obj[j] < 0 else None
        if entering is None:
            break
        col = T[:m, entering]
        best = None
        for i in range(m):
            if col[i] > 0:
                if best is None:
                    best = i
                    continue
                # compare T[i,rhs]/col[i] with T[best,rhs]/col[best]
                lhs = T[i, -1] * col[best]
                rhs = T[best, -1] * col[i]
                if lhs < rhs or (lhs == rhs and basis[i] < basis[best]):
                    best = i
        if best is None:
            raise ArithmeticError("unbounded packing LP")
        p, q = best, entering
        if T[p, -1] == 0:
            degenerate += 1
            bland = bland or degenerate > 50
        else:
            degenerate = 0
        a = T[p, q]
        prow = T[p].copy()
        T = (a * T - np.outer(T[:, q], prow)) // d
        T[p] = prow
        d = a
        basis[p] = q
        pivots += 1
    primal = [Fraction(0)] * c
    for i, var in enumerate(basis):
        if var < c:
            primal[var] = Fraction(int(T[i, -1]), int(d))
    dual = [Fraction(int(T[m, c + i]), int(d)) for i in range(m)]
    return PackingSolution(Fraction(int(T[m, -1]), int(d)), primal, dual, pivots)
