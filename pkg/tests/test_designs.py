import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nwlab.designs import (Design, greedy_design, is_prime, next_prime, poly_design,
                           select_design, verify_design)
from nwlab.errors import ArgumentError, CapacityError
from tests.oracles import design_ok

PRIMES = [2, 3, 5, 7, 11, 13]


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(PRIMES), st.integers(1, 3))
def test_poly_design_bounds(q, c):
    if q ** c > 1000:
        return
    des = poly_design(q, c)
    assert des.m == q ** c and des.d == q * q and des.k == q and des.r == c - 1
    assert design_ok(des.sets, des.k, des.r)
    assert verify_design(des)
    if c <= q:  # beyond that, distinct polynomials can coincide as functions
        assert len(set(des.sets)) == des.m


def test_poly_design_small_example():
    # q=2, c=1: constant polynomials 0 and 1 -> {0, 2} and {1, 3}
    assert poly_design(2, 1).sets == ((0, 2), (1, 3))


def test_select_design_flagship():
    des, sel = select_design(16, 8, degree=2)
    assert sel == {"q": 17, "c": 2, "d": 289, "k": 16, "m": 8, "r": 1}
    assert des.m == 8 and des.k == 16 and verify_design(des)
    des1, sel1 = select_design(16, 8)
    assert sel1["c"] == 1 and sel1["r"] == 0


@given(st.integers(1, 12), st.integers(2, 40))
def test_select_design_always_valid(k, m):
    des, sel = select_design(k, m)
    assert des.m == m and des.k == k and verify_design(des)
    assert sel["q"] == next_prime(k)
    assert sel["q"] ** (sel["c"] - 1) < m <= sel["q"] ** sel["c"]


def test_truncate_only_improves():
    des = poly_design(5, 2).truncate(k=3, m=10)
    assert des.k == 3 and des.m == 10 and verify_design(des)
    with pytest.raises(ArgumentError):
        poly_design(5, 2).truncate(k=6)


def test_verify_rejects_bad_families():
    assert not verify_design(Design(4, 2, 0, ((0, 1), (1, 2))))
    assert not verify_design(Design(4, 2, 1, ((0, 1), (1, 9))))
    assert not verify_design(Design(4, 2, 1, ((0, 1), (1,))))
    assert not verify_design(Design(4, 2, 1, ((0, 1),)))


def test_greedy_design_frozen_example():
    des = greedy_design(8, 2, 0, 4, np.random.default_rng(0))
    assert des.sets == ((5, 7), (1, 2), (3, 4), (0, 6))
    assert verify_design(des)


def test_greedy_design_capacity():
    with pytest.raises(CapacityError) as err:
        greedy_design(4, 2, 0, 3, np.random.default_rng(0), attempts=50)
    assert verify_design(err.value.partial) and err.value.partial.m == 2


def test_primes_and_errors():
    assert [q for q in range(20) if is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert next_prime(16) == 17 and next_prime(0) == 2
    with pytest.raises(ArgumentError):
        poly_design(4, 1)
    with pytest.raises(CapacityError):
        poly_design(101, 4)


def test_json_round_trip():
    des = poly_design(3, 2)
    assert Design.from_dict(des.to_dict()) == des
