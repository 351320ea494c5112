import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from nwlab.errors import ArgumentError, CapacityError
from nwlab.truthtable import (TruthTable, advantage, agreement, bits_to_index, index_to_bits,
                              is_close, pad, restrict_prefix_zero, restrict_suffix,
                              sample_function, tables_of_arity, xor_amplify)
from tests.oracles import bits_to_int, naive_xor_amplify, parity_bits, table_from_fn


def tables(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda n: st.integers(0, (1 << (1 << n)) - 1).map(lambda b: TruthTable(n, b)))


def test_projection_matches_index_convention():
    for n in range(1, 6):
        for i in range(1, n + 1):
            want = bits_to_int(table_from_fn(n, lambda x: x[i - 1]))
            assert TruthTable.projection(n, i).bits == want


def test_parity_against_oracle():
    for n in range(1, 9):
        assert TruthTable.parity(n).bits == bits_to_int(parity_bits(n))


def test_text_format_fixture():
    # AND of two inputs: only index 3 is 1 -> bits 1000 -> hex "8"
    tt = TruthTable.from_function(2, lambda x: x[0] & x[1])
    assert tt.to_text() == "n=2\n8\n"
    assert TruthTable.from_text("n=3\n96\n").bitstring() == "01101001"
    assert TruthTable.from_text("n=1\n2\n") == TruthTable.projection(1, 1)


@pytest.mark.parametrize("text", ["n=2\n08\n", "n=2\n", "x=2\n8\n", "n=2\nzz\n", "n=0\n1\n"])
def test_text_format_rejects(text):
    with pytest.raises(ArgumentError):
        TruthTable.from_text(text)


@given(tables(8))
def test_text_round_trip(tt):
    assert TruthTable.from_text(tt.to_text()) == tt
    assert TruthTable.from_array(tt.n, tt.to_array()) == tt


@given(tables(6))
def test_call_matches_getitem(tt):
    for idx in range(tt.size):
        assert tt(index_to_bits(idx, tt.n)) == tt[idx]
        assert bits_to_index(index_to_bits(idx, tt.n)) == idx


@given(tables(5), st.data())
def test_agreement_is_exact_fraction(f, data):
    g = TruthTable(f.n, data.draw(st.integers(0, (1 << f.size) - 1)))
    same = sum(f[i] == g[i] for i in range(f.size))
    assert agreement(f, g) == Fraction(same, f.size)
    assert advantage(f, g) == agreement(f, g) - Fraction(1, 2)
    assert agreement(f, ~f) == 0
    assert is_close(f, f, 0)


@settings(max_examples=30)
@given(tables(3), st.integers(1, 3))
def test_xor_amplify_against_oracle(f, t):
    got = xor_amplify(f, t)
    assert got.n == f.n * t
    assert got.to_array().tolist() == naive_xor_amplify(f.to_array().tolist(), f.n, t)


def test_xor_amplify_cap():
    with pytest.raises(CapacityError):
        xor_amplify(TruthTable.parity(9), 3)


@given(tables(4), st.integers(0, 3))
def test_pad_repeats_table(f, p):
    g = pad(f, p)
    assert g.n == f.n + p
    arr = g.to_array()
    for idx in range(g.size):
        assert arr[idx] == f[idx & (f.size - 1)]


@given(tables(6))
def test_restrictions(f):
    if f.n < 2:
        return
    g = restrict_prefix_zero(f, 1)
    assert g.bits == f.bits & ((1 << (f.size // 2)) - 1)
    assert restrict_suffix(f, f.n - 1, 0) == g
    hi = restrict_suffix(f, f.n - 1, 1)
    for idx in range(hi.size):
        assert hi[idx] == f[idx | (1 << (f.n - 1))]


def test_sample_function_deterministic_and_balanced():
    a = sample_function(10, np.random.default_rng(3))
    b = sample_function(10, np.random.default_rng(3))
    assert a == b
    ones = sum(sample_function(10, np.random.default_rng(s)).count_ones() for s in range(20))
    assert abs(ones / (20 * 1024) - 0.5) < 0.02


def test_tables_of_arity():
    ts = list(tables_of_arity(2))
    assert len(ts) == 16 and ts[5].bits == 5
    with pytest.raises(CapacityError):
        list(tables_of_arity(5))


def test_arity_checks():
    with pytest.raises(ArgumentError):
        TruthTable(2, 16)
    with pytest.raises(ArgumentError):
        TruthTable.projection(3, 0)
    with pytest.raises(ArgumentError):
        TruthTable(2, 1) ^ TruthTable(3, 1)
