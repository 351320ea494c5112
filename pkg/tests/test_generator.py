import numpy as np
import pytest

from nwlab.designs import poly_design
from nwlab.errors import ArgumentError
from nwlab.generator import (NwFamily, family_complexity_check, make_generator, nw_eval,
                             nw_truthtable, sample_WL, sample_WL_many)
from nwlab.truthtable import TruthTable, xor_amplify


def and2():
    return TruthTable.from_function(2, lambda x: x[0] & x[1])


def test_small_example():
    # sets {0,2} and {1,3}; seed 1010 -> inputs (1,1) and (0,0)
    fam = NwFamily(and2(), poly_design(2, 1))
    assert nw_truthtable(fam, [1, 0, 1, 0]).bitstring() == "10"
    assert nw_eval(fam, [1, 0, 1, 0], 0) == 1 and nw_eval(fam, [1, 0, 1, 0], 1) == 0


def test_table_matches_pointwise_definition():
    rng = np.random.default_rng(1)
    f = TruthTable(5, int(rng.integers(0, 2**32)))
    gen = make_generator(f, 0.1, 3, degree=2)
    fam = gen.family
    for _ in range(20):
        z = fam.random_seeds(1, rng)[0]
        tt = nw_truthtable(fam, z)
        for w in range(fam.L):
            s = fam.design.sets[w]
            idx = sum(int(z[c]) << j for j, c in enumerate(s))
            assert tt[w] == f[idx]


def test_amplified_generator():
    f = TruthTable.from_function(3, lambda x: x[0] | x[2])
    gen = make_generator(f, 0.2, 2, t=2)
    assert gen.family.base == xor_amplify(f, 2)
    assert gen.params["t"] == 2 and gen.params["design"]["k"] == 6
    tabs = sample_WL_many(gen, 50, np.random.default_rng(0))
    assert tabs.shape == (50,) and tabs.max() < 16


def test_generator_outputs_have_small_complexity():
    # a constant base function gives constant output tables
    gen = make_generator(TruthTable.constant(4, 0), 0.1, 2)
    rep = family_complexity_check(gen, "aon", 10, np.random.default_rng(0))
    assert rep["generator_max"] == 0
    assert sample_WL(gen, np.random.default_rng(0)).bits == 0


def test_errors():
    with pytest.raises(ArgumentError):
        NwFamily(TruthTable(3, 0), poly_design(2, 1))
    with pytest.raises(ArgumentError):
        make_generator(and2(), 0.6, 1)
    fam = NwFamily(None, poly_design(2, 1))
    with pytest.raises(ArgumentError):
        fam.table_indices(np.zeros((1, 4), dtype=np.int64))
    fam = NwFamily(and2(), poly_design(2, 1))
    with pytest.raises(ArgumentError):
        nw_eval(fam, [0, 1], 0)
