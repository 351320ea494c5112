"""Nisan-Wigderson function generators.

A family maps a seed ``z`` of ``d`` bits to the table of arity ``ell`` whose
bit ``w`` is ``base(z restricted to S_w)``; the coordinates of ``S_w`` are read
in increasing universe order, the j-th one becoming input bit ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .circuits import exact_mcsp, parse_basis
from .designs import Design, select_design
from .errors import ArgumentError, CapacityError
from .truthtable import TruthTable, sample_function, xor_amplify


class NwFamily:
    def __init__(self, base: Optional[TruthTable], design: Design):
        # base may be None when values come from an oracle instead of a table
        if base is not None and design.k != base.n:
            raise ArgumentError(f"design set size {design.k} != base arity {base.n}")
        ell = design.m.bit_length() - 1
        if design.m != 1 << ell or ell < 1:
            raise ArgumentError(f"design has {design.m} sets, not a power of two >= 2")
        self.base = base
        self.design = design
        self.ell = ell
        self.L = design.m
        self.d = design.d
        self.sets = np.array(design.sets, dtype=np.int64)  # (L, k)
        self.k = design.k
        self._base_arr = None if base is None else base.to_array()
        self._weights = 1 << np.arange(design.k, dtype=np.int64)

    def used_coordinates(self) -> np.ndarray:
        return np.unique(self.sets)

    def inputs(self, Z: np.ndarray) -> np.ndarray:
        """Base-function input indices, shape ``(N, L)``, for seeds ``Z`` of shape ``(N, d)``."""
        Z = np.asarray(Z, dtype=np.int64)
        return (Z[:, self.sets] * self._weights).sum(axis=2)

    def table_indices(self, Z: np.ndarray) -> np.ndarray:
        """Generated tables as integers (bit ``w`` = output at ``w``)."""
        if self._base_arr is None:
            raise ArgumentError("family has no base table; evaluate through an oracle")
        bits = self._base_arr[self.inputs(Z)].astype(np.int64)
        return (bits << np.arange(self.L, dtype=np.int64)).sum(axis=1)

    def random_seeds(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, 2, size=(count, self.d), dtype=np.uint8)


def _seed_array(fam: NwFamily, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.int64).ravel()
    if z.size != fam.d:
        raise ArgumentError(f"seed has {z.size} bits, expected {fam.d}")
    return z


def nw_eval(fam: NwFamily, z, w: int) -> int:
    z = _seed_array(fam, z)
    if not 0 <= w < fam.L:
        raise ArgumentError(f"index {w} out of range for {fam.L} outputs")
    idx = int((z[fam.sets[w]] * fam._weights).sum())
    return int(fam._base_arr[idx])


def nw_truthtable(fam: NwFamily, z) -> TruthTable:
    z = _seed_array(fam, z)
    return TruthTable(fam.ell, int(fam.table_indices(z[None, :])[0]))


@dataclass
class BlackBoxGenerator:
    """NW family over the XOR-amplified function, with its parameter record."""

    f: TruthTable
    gamma: float
    t: int
    family: NwFamily
    params: dict = field(default_factory=dict)

    @property
    def ell(self) -> int:
        return self.family.ell

    @property
    def L(self) -> int:
        return self.family.L


def make_generator(f: TruthTable, gamma: float, ell: int, t: int = 1,
                   degree: Optional[int] = None, design: Optional[Design] = None) -> BlackBoxGenerator:
    """Generator over ``xor_amplify(f, t)`` with ``2**ell`` outputs.

    Without an explicit design, the polynomial design selection rule is used
    and recorded in ``params``.
    """
    if not 0 < gamma < 0.5:
        raise ArgumentError("gamma must lie in (0, 1/2)")
    amp = xor_amplify(f, t)
    if design is None:
        design, sel = select_design(amp.n, 1 << ell, degree)
    else:
        sel = {"d": design.d, "k": design.k, "m": design.m, "r": design.r}
    fam = NwFamily(amp, design)
    params = {"gamma": gamma, "ell": ell, "t": t, "n": f.n, "design": sel}
    return BlackBoxGenerator(f, gamma, t, fam, params)


def sample_WL(gen: BlackBoxGenerator, rng: np.random.Generator) -> TruthTable:
    z = gen.family.random_seeds(1, rng)[0]
    return nw_truthtable(gen.family, z)


def sample_WL_many(gen: BlackBoxGenerator, count: int, rng: np.random.Generator) -> np.ndarray:
    return gen.family.table_indices(gen.family.random_seeds(count, rng))


def family_complexity_check(gen: BlackBoxGenerator, basis, samples: int,
                            rng: np.random.Generator, cap: int = 10) -> dict:
    """Exact circuit complexity of sampled generator tables vs random tables.

    Complexities above ``cap`` are reported as ``None``.
    """
    if gen.ell > 4:
        raise CapacityError("complexity check needs ell <= 4")
    b = parse_basis(basis)

    def cx(tt):
        try:
            return exact_mcsp(tt, b, cap=cap)[0]
        except CapacityError:
            return None

    gen_cx = [cx(sample_WL(gen, rng)) for _ in range(samples)]
    rnd_cx = [cx(sample_function(gen.ell, rng)) for _ in range(samples)]
    return {"ell": gen.ell, "basis": b.name, "cap": cap,
            "generator": gen_cx, "random": rnd_cx,
            "generator_max": max((c for c in gen_cx if c is not None), default=None),
            "random_above_cap": sum(c is None for c in rnd_cx)}
