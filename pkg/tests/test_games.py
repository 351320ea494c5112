from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nwlab.errors import ArgumentError, CapacityError
from nwlab.games import (DecisionTreeProbe, GameMatrix, MixedStrategy, NonAdaptiveProbe,
                         build_matrix, close_under_complement, game_value, point_probes,
                         sampler_table_distribution, small_support, strategy_to_sampler,
                         support_size)
from nwlab.lp import solve_packing
from nwlab.truthtable import TruthTable, tables_of_arity
from tests.oracles import all_selector_distribution, game_value_float, packing_value_float


F = Fraction


def test_trivial_values():
    assert game_value(GameMatrix([[0, 0], [0, 0]])).value == 0
    assert game_value(GameMatrix([[F(1, 3)] * 3] * 2)).value == F(1, 3)
    sol = game_value(GameMatrix([[0, 1], [1, 0]]))
    assert sol.value == F(1, 2)
    assert sol.p.dense(2) == [F(1, 2), F(1, 2)]


def test_probe_entries():
    rows = list(tables_of_arity(2))
    const = NonAdaptiveProbe((), 1)
    M = build_matrix(rows, [const], 2, close=False)
    assert all(M.entries[i][0] == 0 for i in range(16))
    ident = NonAdaptiveProbe((2,), 0b10)
    M = build_matrix(rows, [ident], 2, close=False)
    for i, h in enumerate(rows):
        assert M.entries[i][0] == h[2] - F(1, 2)


def test_full_n2_game_by_hand():
    rows = list(tables_of_arity(2))
    probes = point_probes(2, 1)
    M = build_matrix(rows, probes, 2)
    assert M.shape == (16, 16)  # 4 points x 4 predicates, already complement-closed
    for i, h in enumerate(rows):
        for j, c in enumerate(M.cols):
            # predicates 0 and 3 are constant; 1 and 2 read the bit (or its negation)
            pt, pred = c.points[0], c.predicate
            want = {0: F(0), 3: F(0), 2: h[pt] - F(1, 2), 1: F(1, 2) - h[pt]}[pred]
            assert M.entries[i][j] == want
    sol = game_value(M)
    assert sol.value == 0 and sol.row_value == sol.col_value == 0


def test_complement_closure_gives_nonnegative_value():
    rng = np.random.default_rng(0)
    rows = [TruthTable(3, int(b)) for b in rng.integers(0, 256, size=6)]
    cols = [NonAdaptiveProbe((int(a), int(b)), int(p)) for a, b, p in
            [(0, 1, 6), (2, 5, 1), (3, 7, 8)]]
    M = build_matrix(rows, cols, 3)
    assert len(M.cols) == 6
    assert game_value(M).value >= 0


def test_decision_tree_probe():
    t = DecisionTreeProbe(("query", 0, ("leaf", 0), ("query", 1, ("leaf", 1), ("leaf", 0))))
    assert t.pr_random() == F(1, 4)
    assert t.complement().pr_random() == F(3, 4)
    assert t.accepts(TruthTable(2, 0b0001)) == 1
    with pytest.raises(ArgumentError):
        DecisionTreeProbe(("query", 0, ("leaf", 0), ("query", 0, ("leaf", 1), ("leaf", 0))))
    with pytest.raises(ArgumentError):
        build_matrix([TruthTable(2, 0)], [NonAdaptiveProbe((7,), 1)], 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_exact_value_matches_float_oracle_and_duality(r, c, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-4, 5, size=(r, c))
    M = GameMatrix([[F(int(v), 4) for v in row] for row in A])
    sol = game_value(M)
    assert sol.row_value == sol.value == sol.col_value
    assert abs(float(sol.value) - game_value_float(A / 4)) < 1e-7
    assert sum(sol.p.weights) == 1 and sum(sol.q.weights) == 1


def test_approx_mode_gap():
    rng = np.random.default_rng(1)
    A = rng.integers(-8, 9, size=(12, 30))
    M = GameMatrix([[F(int(v), 8) for v in row] for row in A])
    delta = 0.05
    sol = game_value(M, "approx", delta)
    exact = float(game_value(M).value)
    assert abs(sol.row_value - sol.col_value) <= 2 * delta
    assert sol.col_value - 1e-9 <= exact <= sol.row_value + 1e-9


def test_exact_size_guard():
    M = GameMatrix([[0] * 2] * 65)
    with pytest.raises(CapacityError):
        game_value(M)


def test_lp_against_float_oracle():
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = rng.integers(0, 6, size=(5, 9))
        A[:, 0] += 1
        b = rng.integers(1, 9, size=5)
        sol = solve_packing(A, b)
        assert abs(float(sol.objective) - packing_value_float(A, b)) < 1e-7
        assert sum(sol.dual[i] * int(b[i]) for i in range(5)) == sol.objective
        for j in range(9):
            assert sum(sol.dual[i] * int(A[i, j]) for i in range(5)) >= 1
        for i in range(5):
            assert sum(sol.primal[j] * int(A[i, j]) for j in range(9)) <= int(b[i])


def test_lp_hint_does_not_change_optimum():
    rng = np.random.default_rng(4)
    A = rng.integers(1, 9, size=(6, 20))
    plain = solve_packing(A, [7] * 6)
    hinted = solve_packing(A, [7] * 6, hint=list(range(19, -1, -1)))
    assert plain.objective == hinted.objective


def test_small_support_examples():
    pennies = GameMatrix([[0, 1], [1, 0]])
    ss = small_support(pennies, 0.1, np.random.default_rng(0))
    assert ss.p.k == support_size(2, 0.1) and ss.vp <= F(1, 2) + F(1, 10)
    pure = GameMatrix([[0, 1], [1, 1]])
    ss = small_support(pure, 0.1, np.random.default_rng(0))
    assert set(ss.p.support) == {0}
    ss = small_support(GameMatrix([[F(1, 2), -1], [1, 0]]), 1, np.random.default_rng(0))
    assert ss.first_ok


def test_sampler_k3_against_enumeration():
    p = MixedStrategy("row", (4, 7, 9))
    s = strategy_to_sampler(p, depth=10)
    assert s.bits == 2 and s.depth == 10
    short = strategy_to_sampler(p, depth=7)
    assert short.distribution() == all_selector_distribution((4, 7, 9), 2, 7)
    assert s.total_variation() == F(1, 1572864)
    assert s.total_variation() <= F(1, 1024)


def test_sampler_small_cases():
    one = strategy_to_sampler(MixedStrategy("row", (3,)))
    assert one.bits == 0 and one.distribution() == {3: 1}
    two = strategy_to_sampler(MixedStrategy("row", (1, 2)))
    assert two.bits == 1 and two.total_variation() == 0
    rows = list(tables_of_arity(1))
    d = sampler_table_distribution(two, rows)
    assert d == {rows[1]: F(1, 2), rows[2]: F(1, 2)}
    with pytest.raises(ArgumentError):
        strategy_to_sampler(MixedStrategy("row", (0, 1), (F(1, 3), F(2, 3))))


@given(st.integers(1, 300))
def test_sampler_tv_bound(k):
    s = strategy_to_sampler(MixedStrategy("row", tuple(range(k))))
    assert s.total_variation() <= F(1, 1024)
