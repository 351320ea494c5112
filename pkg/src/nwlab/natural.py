"""Transforms of table properties: density amplification, derandomization, scaling down.

A property decides tables.  Its decider returns 1 (accept), 0 (reject) or
``None`` (the zero-error "don't know"); randomized deciders also receive an
integer of random bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Tuple

import numpy as np

from .circuits import enumerate_functions, parse_basis
from .errors import ArgumentError, CapacityError
from .truthtable import TruthTable, full_mask, restrict_prefix_zero, sample_function


@dataclass(frozen=True)
class PropertySpec:
    name: str
    decide: Callable  # (TruthTable, rand: int) -> 1 | 0 | None
    randomness: Callable[[int], int] = lambda n: 0  # random bits used at arity n
    target: Optional[Tuple[str, int, int]] = None  # (basis, size bound, arity)
    density: Optional[Fraction] = None
    zero_error: bool = False

    def __call__(self, tt: TruthTable, rand: int = 0):
        return self.decide(tt, rand)

    def accepts(self, tt: TruthTable, rand: int = 0) -> bool:
        return self.decide(tt, rand) == 1


# builtin properties ---------------------------------------------------------


def hardness_property(basis="aon", s0: int = 2) -> PropertySpec:
    """Accept iff the table has no circuit of at most ``s0`` wires (arity <= 4)."""
    b = parse_basis(basis)
    cache = {}

    def decide(tt, rand=0):
        if tt.n not in cache:
            cache[tt.n] = {g.bits for g in enumerate_functions(tt.n, b, s0)}
        return 0 if tt.bits in cache[tt.n] else 1

    return PropertySpec(f"mcsp>{s0}:{b.name}", decide, target=(b.name, s0, None))


def nonzero_property() -> PropertySpec:
    return PropertySpec("nonzero", lambda tt, rand=0: int(tt.bits != 0))


def constant_property(value: int) -> PropertySpec:
    return PropertySpec(f"const{value}", lambda tt, rand=0: value)


def noisy_zero_error(P: PropertySpec, bits: Callable[[int], int] = lambda n: 1 << n) -> PropertySpec:
    """Zero-error randomized version of ``P``: answers ``None`` when ``rand % 3 == 2``.

    With ``b`` uniform bits the don't-know rate is ``floor((2**b + 1) / 3) / 2**b``,
    which is 5/16 at four bits.
    """

    def decide(tt, rand=0):
        if rand % 3 == 2:
            return None
        return P.decide(tt, 0)

    return PropertySpec(f"zero-error({P.name})", decide, randomness=bits,
                        target=P.target, density=P.density, zero_error=True)


def always_unknown() -> PropertySpec:
    return PropertySpec("always-unknown", lambda tt, rand=0: None, zero_error=True)


# transforms -----------------------------------------------------------------


def split_halves(tt: TruthTable) -> Tuple[TruthTable, TruthTable]:
    """Low half (top input 0) and high half (top input 1)."""
    if tt.n < 2:
        raise ArgumentError("need arity >= 2 to split into two nonempty halves")
    m = tt.n - 1
    return TruthTable(m, tt.bits & full_mask(m)), TruthTable(m, tt.bits >> (1 << m))


def density_amplify(P: PropertySpec) -> PropertySpec:
    """Accept ``yz`` iff ``P`` accepts ``y`` or ``P`` accepts ``z``."""

    def decide(tt, rand=0):
        y, z = split_halves(tt)
        return int(P.decide(y, rand) == 1 or P.decide(z, rand) == 1)

    dens = None if P.density is None else 1 - (1 - P.density) ** 2
    return replace(P, name=f"amp({P.name})", decide=decide, density=dens, zero_error=False)


def derandomize_layout(n_prime: int, k: int) -> Optional[int]:
    """Largest ``n >= 1`` with ``n (k + 1) < n'``, or ``None``."""
    n = (n_prime - 1) // (k + 1)
    return n if n >= 1 else None


def derandomize_zero_error(P: PropertySpec, k: int) -> PropertySpec:
    """Deterministic property on arity ``n'`` reading ``y = x z w``.

    ``x`` is the first ``2**n`` bits, ``z`` the next ``2**(k n)`` bits used as
    the randomness of ``P`` on ``x``.  Only an explicit accept is accepted.
    """
    if k < 1:
        raise ArgumentError("randomness exponent must be >= 1")

    def decide(tt, rand=0):
        n = derandomize_layout(tt.n, k)
        if n is None:
            return 0
        x = TruthTable(n, tt.bits & full_mask(n))
        zbits = 1 << (k * n)
        z = (tt.bits >> (1 << n)) & ((1 << zbits) - 1)
        return int(P.decide(x, z) == 1)

    return replace(P, name=f"derand[{k}]({P.name})", decide=decide,
                   randomness=lambda n: 0, zero_error=False)


def scale_down(P: PropertySpec, eps: float) -> PropertySpec:
    """Apply ``P`` to the prefix table of arity ``ceil(n**eps)``."""
    if not 0 < eps < 1:
        raise ArgumentError("eps must lie in (0, 1)")

    def decide(tt, rand=0):
        m = max(1, math.ceil(tt.n ** eps))
        if m >= tt.n:
            return P.decide(tt, rand)
        return P.decide(restrict_prefix_zero(tt, tt.n - m), rand)

    target = None
    if P.target is not None:
        target = (P.target[0], P.target[1], "prefix")
    return replace(P, name=f"scale[{eps}]({P.name})", decide=decide, target=target)


# measurements ---------------------------------------------------------------


def exact_density(P: PropertySpec, n: int) -> Fraction:
    """Acceptance fraction over all tables of arity ``n`` (deterministic ``P``, n <= 3)."""
    if n > 3:
        raise CapacityError("exhaustive density limited to n <= 3")
    total = 1 << (1 << n)
    hits = sum(P.accepts(TruthTable(n, b)) for b in range(total))
    return Fraction(hits, total)


def sampled_density(P: PropertySpec, n: int, samples: int, rng: np.random.Generator):
    """Estimated acceptance rate with a normal 99% interval."""
    hits = 0
    for _ in range(samples):
        tt = sample_function(n, rng)
        r = P.randomness(n)
        rand = int.from_bytes(rng.bytes((r + 7) // 8), "little") & ((1 << r) - 1) if r else 0
        hits += P.accepts(tt, rand)
    p = hits / samples
    half = 2.576 * math.sqrt(max(p * (1 - p), 1e-12) / samples)
    return p, (p - half, p + half)


def usefulness_violations(P: PropertySpec, n: int, basis, s: int) -> int:
    """Number of tables with a size-``<= s`` circuit that ``P`` accepts for some randomness."""
    bad = 0
    r = P.randomness(n)
    for g in sorted(enumerate_functions(n, basis, s), key=lambda t: t.bits):
        if r <= 12:
            rands = range(1 << r)
        else:
            rands = range(4096)
        if any(P.accepts(g, z) for z in rands):
            bad += 1
    return bad
