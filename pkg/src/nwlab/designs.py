"""Combinatorial designs: set families with bounded pairwise intersections."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ArgumentError, CapacityError


@dataclass(frozen=True)
class Design:
    """``sets`` are sorted tuples over the universe ``range(d)``.

    Construction does not validate, so malformed families can be built and
    handed to :func:`verify_design`.
    """

    d: int
    k: int
    r: int
    sets: Tuple[Tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.sets)

    def to_dict(self) -> dict:
        return {"d": self.d, "k": self.k, "r": self.r, "sets": [list(s) for s in self.sets]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj: dict) -> "Design":
        try:
            return cls(int(obj["d"]), int(obj["k"]), int(obj["r"]),
                       tuple(tuple(sorted(int(i) for i in s)) for s in obj["sets"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ArgumentError(f"malformed design: {exc}") from None

    def truncate(self, k: Optional[int] = None, m: Optional[int] = None) -> "Design":
        """Keep the first ``k`` elements of the first ``m`` sets; bounds only improve."""
        k = self.k if k is None else k
        m = self.m if m is None else m
        if not 1 <= k <= self.k or not 1 <= m <= self.m:
            raise ArgumentError(f"cannot truncate a ({self.m}, {self.k}) design to ({m}, {k})")
        return Design(self.d, k, min(self.r, k), tuple(s[:k] for s in self.sets[:m]))

    def intersection_profile(self) -> int:
        """Largest pairwise intersection actually present."""
        return max((len(set(a) & set(b)) for a, b in itertools.combinations(self.sets, 2)),
                   default=0)


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    i = 2
    while i * i <= q:
        if q % i == 0:
            return False
        i += 1
    return True


def next_prime(k: int) -> int:
    q = max(2, k)
    while not is_prime(q):
        q += 1
    return q


def poly_design(q: int, c: int) -> Design:
    """Graphs of polynomials of degree ``< c`` over GF(q), paired as ``q*x + p(x)``.

    Polynomial ``j = sum_i a_i q**i`` has coefficients ``a_i``; two distinct
    polynomials agree on at most ``c - 1`` points.
    """
    if not is_prime(q):
        raise ArgumentError(f"q must be prime, got {q}")
    if c < 1:
        raise ArgumentError("degree parameter c must be >= 1")
    if q ** c > 1 << 20:
        raise CapacityError(f"q**c = {q ** c} sets is beyond desk scale")
    xs = np.arange(q)
    # powers[i, x] = x**i mod q
    powers = np.ones((c, q), dtype=np.int64)
    for i in range(1, c):
        powers[i] = powers[i - 1] * xs % q
    idx = np.arange(q ** c)
    coeffs = np.stack([(idx // q ** i) % q for i in range(c)], axis=1)
    values = coeffs @ powers % q
    sets = q * xs[None, :] + values
    return Design(q * q, q, c - 1, tuple(tuple(int(v) for v in row) for row in sets))


def select_design(k: int, m: int, degree: Optional[int] = None) -> Tuple[Design, dict]:
    """Smallest polynomial design with sets of size ``k`` and at least ``m`` sets.

    ``q`` is the least prime ``>= k``; ``c`` the least degree with ``q**c >= m``
    unless ``degree`` forces it.  The result is truncated to exactly ``(m, k)``.
    """
    if k < 1 or m < 2:
        raise ArgumentError("need set size >= 1 and at least 2 sets")
    q = next_prime(k)
    c = 1
    while q ** c < m:
        c += 1
    if degree is not None:
        if degree < c:
            raise ArgumentError(f"degree {degree} gives fewer than {m} sets")
        c = degree
    des = poly_design(q, c).truncate(k=k, m=m)
    return des, {"q": q, "c": c, "d": des.d, "k": k, "m": m, "r": des.r}


def verify_design(des: Design) -> bool:
    """Exhaustive check of sizes, index range, set count and intersections."""
    if des.m < 2 or des.r < 0:
        return False
    as_sets = []
    for s in des.sets:
        ss = set(s)
        if len(s) != des.k or len(ss) != des.k:
            return False
        if any(not 0 <= i < des.d for i in s):
            return False
        as_sets.append(ss)
    return all(len(a & b) <= des.r for a, b in itertools.combinations(as_sets, 2))


def greedy_design(d: int, k: int, r: int, m: int, rng: np.random.Generator,
                  attempts: int = 20000) -> Design:
    """Randomized greedy family: accept random ``k``-subsets that respect the bound.

    Raises a capacity error carrying the partial family when ``attempts``
    consecutive draws fail to extend it.
    """
    if not 1 <= k <= d or not 0 <= r < k or m < 2:
        raise ArgumentError(f"inconsistent design parameters d={d}, k={k}, r={r}, m={m}")
    chosen: List[frozenset] = []
    fails = 0
    while len(chosen) < m:
        cand = frozenset(int(i) for i in rng.choice(d, size=k, replace=False))
        if all(len(cand & s) <= r for s in chosen):
            chosen.append(cand)
            fails = 0
            continue
        fails += 1
        if fails >= attempts:
            partial = Design(d, k, r, tuple(tuple(sorted(s)) for s in chosen))
            raise CapacityError(f"greedy search stuck at {len(chosen)} of {m} sets",
                                partial=partial)
    return Design(d, k, r, tuple(tuple(sorted(s)) for s in chosen))
