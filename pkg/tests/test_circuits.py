import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nwlab.circuits import (Circuit, Gate, McspInstance, apply_gate, complexity_sweep,
                            count_functions, counting_bound_log2, enumerate_functions,
                            evaluate_all, evaluate_points, exact_mcsp, hardness_bound,
                            hardness_experiment, maxhard_tt, mcsp_decide, mcsp_decide_param,
                            parse_basis)
from nwlab.errors import ArgumentError, CapacityError, StructuralError
from nwlab.truthtable import TruthTable, tables_of_arity
from tests.oracles import min_aon_sizes

# frozen from the independent gate-sequence search in tests/oracles.py
AON_COUNTS_N2 = [4, 6, 8, 14, 14, 14, 14, 16, 16]
AON_COUNTS_N3 = [5, 8, 14, 32, 40, 84, 96, 120, 127]


@pytest.fixture(scope="module")
def oracle_n2():
    return min_aon_sizes(2, 8)


@pytest.fixture(scope="module")
def oracle_n3():
    return min_aon_sizes(3, 7)


def test_counts_match_oracle_n2(oracle_n2):
    for s, want in enumerate(AON_COUNTS_N2):
        assert count_functions(2, "aon", s) == want
        assert sum(1 for v in oracle_n2.values() if v <= s) == want


def test_counts_match_oracle_n3(oracle_n3):
    for s, want in enumerate(AON_COUNTS_N3):
        assert count_functions(3, "aon", s) == want
        if s <= 7:
            assert sum(1 for v in oracle_n3.values() if v <= s) == want


def test_exact_mcsp_all_n2_tables(oracle_n2):
    for tt in tables_of_arity(2):
        size, w = exact_mcsp(tt, "aon")
        assert size == oracle_n2[tt.bits]
        assert evaluate_all(w, "aon") == tt
        assert w.size == size


def test_xor_needs_seven_wires():
    xor = TruthTable.parity(2)
    assert exact_mcsp(xor, "aon")[0] == 7
    assert not mcsp_decide(McspInstance(xor, 6), "aon")
    assert mcsp_decide(McspInstance(xor, 7), "aon")
    # unbounded mod2 gates make it cheap
    assert exact_mcsp(xor, "ac0[2]")[0] == 2


def test_trivial_examples():
    assert exact_mcsp(TruthTable.constant(3, 0), "aon")[0] == 0
    assert exact_mcsp(TruthTable.projection(3, 2), "aon")[0] == 0
    assert exact_mcsp(TruthTable.projection(3, 2).complement(), "aon")[0] == 1
    assert mcsp_decide_param(TruthTable.projection(2, 1), lambda n: 0, "aon")


def test_mcsp_instance_validation():
    with pytest.raises(ArgumentError):
        McspInstance(TruthTable(2, 1), -1)
    with pytest.raises(ArgumentError):
        mcsp_decide("nope", "aon")


def test_maxhard_n2_is_xor_class():
    h = maxhard_tt(2, "aon")
    sweep = complexity_sweep(2, "aon")
    assert len(sweep) == 16
    assert sweep[h.bits] == max(sweep.values()) == 7
    assert h.bitstring() == "0110"


def test_guardrails():
    with pytest.raises(CapacityError):
        enumerate_functions(5, "aon", 2)
    with pytest.raises(CapacityError):
        enumerate_functions(2, "aon", 13)
    with pytest.raises(CapacityError):
        exact_mcsp(TruthTable(3, 0x69), "aon", cap=3)


def test_basis_parsing():
    b = parse_basis("ac0[3]")
    assert ("mod3", True) in b.kinds
    assert parse_basis("tc0").allows("maj", 5)
    assert not parse_basis("aon").allows("and", 3)
    assert parse_basis("and+not").allows("and", 2)
    for bad in ["", "foo", "and+and", "mod1", "xor"]:
        with pytest.raises(ArgumentError):
            parse_basis(bad)


def test_gate_semantics():
    n = 3
    x = [TruthTable.projection(n, i).bits for i in (1, 2, 3)]
    maj = TruthTable.from_function(n, lambda v: int(sum(v) >= 2)).bits
    assert apply_gate("maj", x, n) == maj
    # strict majority: two inputs need both
    assert apply_gate("maj", x[:2], n) == x[0] & x[1]
    mod3 = TruthTable.from_function(n, lambda v: int(sum(v) % 3 != 0)).bits
    assert apply_gate("mod3", x, n) == mod3
    assert apply_gate("mod2", x, n) == TruthTable.parity(3).bits


def test_circuit_structure_errors():
    with pytest.raises(StructuralError):
        Circuit(2, "aon", (Gate("and", ("x1", "x1")),), "g0")
    with pytest.raises(StructuralError):
        Circuit(2, "aon", (Gate("and", ("x1", "g0")),), "g0")
    with pytest.raises(StructuralError):
        Circuit(2, "aon", (Gate("and", ("x1", "x2", "c1")),), "g0")
    with pytest.raises(StructuralError):
        Circuit(2, "aon", (Gate("maj", ("x1", "x2")),), "g0")
    with pytest.raises(StructuralError):
        Circuit.from_json("{not json")


def test_json_round_trip_and_points():
    c = Circuit(3, "ac0", (Gate("and", ("x1", "x2", "x3")), Gate("not", ("g0",)),
                           Gate("or", ("g1", "x1"))), "g2")
    assert Circuit.from_json(c.to_json()) == c
    assert c.size == 6 and c.depth == 3
    tt = evaluate_all(c)
    assert evaluate_points(c, np.arange(8)).tolist() == tt.to_array().tolist()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 255))
def test_witness_evaluates_to_table(bits):
    tt = TruthTable(3, bits)
    try:
        size, w = exact_mcsp(tt, "aon", cap=9)
    except CapacityError:
        return
    assert evaluate_all(w) == tt and w.size == size


def test_enumeration_monotone_in_size():
    prev = set()
    for s in range(9):
        cur = {t.bits for t in enumerate_functions(3, "aon", s)}
        assert prev <= cur
        prev = cur


def test_counting_bound_holds():
    for n in (2, 3):
        for s in range(2, 9):
            assert math.log2(count_functions(n, "aon", s)) <= counting_bound_log2(s)


def test_hardness_bound_is_vacuous_at_desk_scale():
    assert hardness_bound(12, 4, 0.25) > 1
    assert hardness_bound(30, 2, 0.25) < 1e-9


def test_small_hardness_experiment():
    rep = hardness_experiment(8, 3, 0.25, 30, np.random.default_rng(0))
    assert rep.approximable == 0 and rep.trials == 30
    assert rep.class_size == count_functions(8, "aon", 3, allow_large=True)
    assert all(a < 0.25 for a in rep.best_advantages)
