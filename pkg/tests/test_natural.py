from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from nwlab.circuits import enumerate_functions
from nwlab.errors import ArgumentError, CapacityError
from nwlab.natural import (PropertySpec, always_unknown, constant_property, density_amplify,
                           derandomize_layout, derandomize_zero_error, exact_density,
                           hardness_property, noisy_zero_error, nonzero_property,
                           sampled_density, scale_down, split_halves, usefulness_violations)
from nwlab.truthtable import TruthTable, tables_of_arity


@pytest.fixture(scope="module")
def P():
    return hardness_property("aon", 2)


def test_hardness_property_density(P):
    # 8 of the 16 arity-2 tables have circuits of at most 2 wires
    assert exact_density(P, 2) == Fraction(1, 2)
    assert usefulness_violations(P, 2, "aon", 2) == 0
    assert usefulness_violations(P, 3, "aon", 2) == 0


def test_amplify_formula_full_sweep(P):
    A = density_amplify(P)
    d = exact_density(P, 2)
    assert exact_density(A, 3) == 1 - (1 - d) ** 2 == Fraction(3, 4)
    for tt in tables_of_arity(3):
        y, z = split_halves(tt)
        assert A.accepts(tt) == (P.accepts(y) or P.accepts(z))
    assert usefulness_violations(A, 3, "aon", 1) == 0


@given(st.integers(0, 2**16 - 1))
def test_split_halves_reassemble(bits):
    tt = TruthTable(4, bits)
    lo, hi = split_halves(tt)
    assert lo.bits | (hi.bits << 8) == bits


def test_scale_down_reads_the_prefix_uniformly():
    seen = []
    rec = PropertySpec("record", lambda tt, rand=0: seen.append(tt.bits) or 1)
    S = scale_down(rec, 0.3)  # arity 8 -> ceil(8**0.3) = 2
    rng = np.random.default_rng(0)
    from nwlab.truthtable import sample_function

    for _ in range(10_000):
        S(sample_function(8, rng))
    counts = np.bincount(seen, minlength=16)
    assert counts.sum() == 10_000 and len(counts) == 16
    assert chisquare(counts).pvalue > 0.01


def test_scale_down_target_and_errors(P):
    S = scale_down(P, 0.5)
    assert S.target[2] == "prefix"
    with pytest.raises(ArgumentError):
        scale_down(P, 1.0)
    tt = TruthTable(4, 0x6666)  # prefix of arity 2 is 0110
    assert S(tt) == P(TruthTable(2, 0x6))


def test_noisy_zero_error_rate(P):
    Z = noisy_zero_error(P)
    tt = TruthTable(2, 0x6)
    answers = [Z(tt, r) for r in range(16)]
    assert answers.count(None) == 5  # r % 3 == 2 for 5 of 16 values
    assert set(answers) - {None} == {P(tt)}


def test_derandomize_layout():
    assert derandomize_layout(6, 1) == 2
    assert derandomize_layout(5, 1) == 2
    assert derandomize_layout(2, 1) is None
    assert derandomize_layout(10, 2) == 3


def test_derandomize_never_accepts_easy_x_block_exhaustive(P):
    D = derandomize_zero_error(noisy_zero_error(P), 1)
    for tt in tables_of_arity(3):
        assert D(tt) == 0  # x block has arity 1, always easy
    easy = [g.bits for g in enumerate_functions(2, "aon", 2)]
    # arity 5: x = 4 bits, z = 4 bits, w = 24 bits
    rng = np.random.default_rng(0)
    for x in easy:
        for z in range(16):
            for _ in range(4):
                w = int(rng.integers(0, 1 << 24))
                assert D(TruthTable(5, x | (z << 4) | (w << 8))) == 0


def test_derandomized_density_sampled(P):
    D = derandomize_zero_error(noisy_zero_error(P), 1)
    p, (lo, hi) = sampled_density(D, 6, 20_000, np.random.default_rng(0))
    # accepted iff x is hard (1/2) and the don't-know branch is avoided (11/16)
    assert lo <= 11 / 32 <= hi
    assert p >= 1 / 3 - 0.01


def test_builtins():
    assert exact_density(nonzero_property(), 2) == Fraction(15, 16)
    assert exact_density(constant_property(1), 1) == 1
    assert always_unknown()(TruthTable(1, 0)) is None
    with pytest.raises(CapacityError):
        exact_density(nonzero_property(), 4)
