"""Bit-packed truth tables and pointwise function algebra.

A table on ``n`` inputs is stored as a Python integer holding ``2**n`` bits;
bit ``idx(x) = sum_i x_i * 2**(i-1)`` holds ``f(x)``, so ``x1`` is the least
significant index bit. Integers give word-parallel bit operations for free
and make tables hashable and immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ArgumentError, CapacityError

MAX_ARITY = 26


def _check_arity(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ArgumentError(f"arity must be a positive integer, got {n!r}")
    if n > MAX_ARITY:
        raise CapacityError(f"arity {n} exceeds the cap of {MAX_ARITY}")


def full_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


@dataclass(frozen=True)
class TruthTable:
    n: int
    bits: int

    def __post_init__(self):
        _check_arity(self.n)
        if self.bits < 0 or self.bits >> (1 << self.n):
            raise ArgumentError("table has bits beyond 2**n")

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, n: int, value: int) -> "TruthTable":
        _check_arity(n)
        return cls(n, full_mask(n) if value else 0)

    @classmethod
    def projection(cls, n: int, i: int) -> "TruthTable":
        """The table of ``x_i`` (1-based)."""
        _check_arity(n)
        if not 1 <= i <= n:
            raise ArgumentError(f"projection index {i} out of range for n={n}")
        return cls(n, projection_bits(n, i - 1))

    @classmethod
    def parity(cls, n: int) -> "TruthTable":
        _check_arity(n)
        bits = 0
        for j in range(n):
            bits ^= projection_bits(n, j)
        return cls(n, bits)

    @classmethod
    def from_array(cls, n: int, arr) -> "TruthTable":
        _check_arity(n)
        arr = np.asarray(arr, dtype=np.uint8).ravel()
        if arr.size != 1 << n:
            raise ArgumentError(f"expected {1 << n} entries, got {arr.size}")
        packed = np.packbits(arr & 1, bitorder="little").tobytes()
        return cls(n, int.from_bytes(packed, "little"))

    @classmethod
    def from_function(cls, n: int, fn: Callable[[tuple], int]) -> "TruthTable":
        """Tabulate ``fn`` called on input tuples ``(x1, ..., xn)``."""
        _check_arity(n)
        bits = 0
        for idx in range(1 << n):
            if fn(index_to_bits(idx, n)) & 1:
                bits |= 1 << idx
        return cls(n, bits)

    @classmethod
    def from_text(cls, text: str) -> "TruthTable":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if len(lines) != 2 or not lines[0].startswith("n="):
            raise ArgumentError("truth-table text must be 'n=<arity>' then a hex line")
        try:
            n = int(lines[0][2:])
        except ValueError as exc:
            raise ArgumentError(f"bad arity line {lines[0]!r}") from exc
        _check_arity(n)
        digits = hex_digits(n)
        if len(lines[1]) != digits:
            raise ArgumentError(f"expected {digits} hex digits for n={n}, got {len(lines[1])}")
        try:
            bits = int(lines[1], 16)
        except ValueError as exc:
            raise ArgumentError("bad hex digits") from exc
        return cls(n, bits)

    # views --------------------------------------------------------------

    @property
    def size(self) -> int:
        return 1 << self.n

    def __getitem__(self, idx: int) -> int:
        if not 0 <= idx < self.size:
            raise ArgumentError(f"index {idx} out of range")
        return (self.bits >> idx) & 1

    def __call__(self, x: Sequence[int]) -> int:
        return self[bits_to_index(x)]

    def __len__(self) -> int:
        return self.size

    def count_ones(self) -> int:
        return self.bits.bit_count()

    def to_array(self) -> np.ndarray:
        nbytes = max(1, (self.size + 7) // 8)
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.size].copy()

    def to_hex(self) -> str:
        return format(self.bits, f"0{hex_digits(self.n)}x")

    def to_text(self) -> str:
        return f"n={self.n}\n{self.to_hex()}\n"

    def bitstring(self) -> str:
        """Bits in index order, index 0 first."""
        return "".join(str((self.bits >> i) & 1) for i in range(self.size))

    # algebra ------------------------------------------------------------

    def complement(self) -> "TruthTable":
        return TruthTable(self.n, self.bits ^ full_mask(self.n))

    def __invert__(self) -> "TruthTable":
        return self.complement()

    def __xor__(self, other: "TruthTable") -> "TruthTable":
        _same_arity(self, other)
        return TruthTable(self.n, self.bits ^ other.bits)

    def __and__(self, other: "TruthTable") -> "TruthTable":
        _same_arity(self, other)
        return TruthTable(self.n, self.bits & other.bits)

    def __or__(self, other: "TruthTable") -> "TruthTable":
        _same_arity(self, other)
        return TruthTable(self.n, self.bits | other.bits)


def hex_digits(n: int) -> int:
    return max(1, -(-(1 << n) // 4))


def projection_bits(n: int, j: int) -> int:
    """Bits of the table of input ``x_{j+1}`` (0-based ``j``) on ``n`` inputs."""
    block = 1 << j
    unit = ((1 << block) - 1) << block  # 0...01...1 pattern of period 2*block
    period = 2 * block
    reps = (1 << n) // period
    # repeat the period-length pattern by doubling
    bits, width = unit, period
    while width < period * reps:
        bits |= bits << width
        width *= 2
    return bits & full_mask(n)


def index_to_bits(idx: int, n: int) -> tuple:
    return tuple((idx >> i) & 1 for i in range(n))


def bits_to_index(x: Sequence[int]) -> int:
    idx = 0
    for i, b in enumerate(x):
        idx |= (int(b) & 1) << i
    return idx


def _same_arity(f: TruthTable, g: TruthTable) -> None:
    if f.n != g.n:
        raise ArgumentError(f"arity mismatch: {f.n} vs {g.n}")


def agreement(f: TruthTable, g: TruthTable) -> Fraction:
    """Exact fraction of inputs on which ``f`` and ``g`` agree."""
    _same_arity(f, g)
    disagree = (f.bits ^ g.bits).bit_count()
    return Fraction(f.size - disagree, f.size)


def advantage(f: TruthTable, g: TruthTable) -> Fraction:
    return agreement(f, g) - Fraction(1, 2)


def is_close(f: TruthTable, g: TruthTable, eps) -> bool:
    return agreement(f, g) >= 1 - Fraction(eps)


def xor_amplify(f: TruthTable, t: int) -> TruthTable:
    """``f(x_1) xor ... xor f(x_t)`` on ``t*n`` inputs, block ``j`` in bits ``[j*n, (j+1)*n)``."""
    if t < 1:
        raise ArgumentError("copy count must be >= 1")
    if t * f.n > MAX_ARITY:
        raise CapacityError(f"amplified arity {t * f.n} exceeds the cap of {MAX_ARITY}")
    base = f.to_array()
    out = base
    for _ in range(t - 1):
        # new index = low + 2**n * high, i.e. row-major over (high, low)
        out = (out[:, None] ^ base[None, :]).reshape(-1)
    return TruthTable.from_array(t * f.n, out)


def pad(f: TruthTable, p: int) -> TruthTable:
    """``f'(x, y) = f(x)`` on ``n + p`` inputs, ``x`` the low block."""
    if p < 0:
        raise ArgumentError("pad width must be >= 0")
    if p == 0:
        return f
    if f.n + p > MAX_ARITY:
        raise CapacityError(f"padded arity {f.n + p} exceeds the cap of {MAX_ARITY}")
    bits, width = f.bits, f.size
    target = f.size << p
    while width < target:
        bits |= bits << width
        width *= 2
    return TruthTable(f.n + p, bits)


def restrict_prefix_zero(f: TruthTable, k: int) -> TruthTable:
    """Fix the ``k`` highest-index inputs to 0; the result is a prefix of the table."""
    if not 1 <= k < f.n:
        raise ArgumentError(f"k must satisfy 1 <= k < n, got k={k}, n={f.n}")
    m = f.n - k
    return TruthTable(m, f.bits & full_mask(m))


def restrict_suffix(f: TruthTable, m: int, suffix: int) -> TruthTable:
    """Subfunction on the low ``m`` inputs with the high inputs fixed to ``suffix``."""
    if not 1 <= m <= f.n:
        raise ArgumentError(f"bad low-block width {m}")
    if not 0 <= suffix < 1 << (f.n - m):
        raise ArgumentError(f"suffix {suffix} out of range")
    return TruthTable(m, (f.bits >> (suffix << m)) & full_mask(m))


def sample_function(n: int, rng: np.random.Generator) -> TruthTable:
    """A uniformly random table; deterministic for a fixed generator state."""
    _check_arity(n)
    nbytes = max(1, (1 << n) // 8)
    raw = rng.integers(0, 256, size=nbytes, dtype=np.uint8).tobytes()
    return TruthTable(n, int.from_bytes(raw, "little") & full_mask(n))


def tables_of_arity(n: int) -> Iterable[TruthTable]:
    """All ``2**(2**n)`` tables in increasing integer (lexicographic) order."""
    if n > 4:
        raise CapacityError("refusing to enumerate all tables beyond n=4")
    for bits in range(1 << (1 << n)):
        yield TruthTable(n, bits)
