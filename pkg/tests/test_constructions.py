from __future__ import annotations

from fractions import Fraction

import pytest

from truecomplexity.constructions import (dependent_counterexample, offdiagonal_example, power_polynomial,
                                          relation_for, relation_is_sound)
from truecomplexity.errors import ConstructionError, UnsupportedCharacteristicError
from truecomplexity.linsys import LinearSystem, progression_system
from truecomplexity.multilinear import polynomial_rank
from truecomplexity.poly import parse_polynomial, phase_table
from truecomplexity.uniformity import gowers_norm

import oracles


def test_power_polynomials():
    assert power_polynomial(1, 5, 3) == parse_polynomial("x1 + x2 + x3", 5, 3)
    pi2 = power_polynomial(2, 5, 3)
    r = polynomial_rank(pi2)
    assert r.density == Fraction(1, 125) and r.rank == 3
    for n in (1, 2, 3):
        rep = gowers_norm(phase_table(power_polynomial(2, 5, n)), 2)
        assert rep.exact_power == Fraction(1, 5 ** n)
        assert rep.value == pytest.approx(5 ** (-n / 4))
    with pytest.raises(UnsupportedCharacteristicError):
        power_polynomial(5, 5, 1)


def test_example_witness_4ap():
    sys_ = progression_system(4, 5)
    w = offdiagonal_example(sys_, [2, 2, 2, 2], 2, seed=1)
    assert w.relations[0].tolist() == [1, 2, 3, 4]
    # (1, 2, 3, 4) is the third-difference relation (1, -3, 3, -1) mod 5
    assert [(a - b) % 5 for a, b in zip(w.relations[0], (1, -3, 3, -1))] == [0, 0, 0, 0]
    assert w.average.exact_average == 1
    assert all(r.exact_power == Fraction(1, 25) for r in w.norms)
    assert all(r.value == pytest.approx(5 ** -0.5) for r in w.norms)
    vals = [list(f.table.values) for f in w.functions]
    assert oracles.system_average(vals, [(1, 0), (1, 1), (1, 2), (1, 3)], 5, 2) == pytest.approx(1)
    for j in range(4):
        assert relation_is_sound(sys_, 2, w.relations[j], 2)


def test_example_witness_larger_n():
    w = offdiagonal_example(progression_system(4, 5), [2, 2, 2, 2], 3, seed=1)
    assert w.average.exact_average == 1
    assert all(r.value == pytest.approx(5 ** -0.75) for r in w.norms)


def test_example_is_seed_deterministic():
    a = offdiagonal_example(progression_system(4, 5), [2, 2, 2, 2], 2, seed=5)
    b = offdiagonal_example(progression_system(4, 5), [2, 2, 2, 2], 2, seed=5)
    assert a.mu == b.mu and a.exponents == b.exponents


def test_proportional_pair_witness():
    sys_ = LinearSystem.from_rows([(1,), (2,)], 5)
    c = relation_for(sys_, 1, 0)
    assert c.tolist() == [1, 2]  # (2, -1) scaled so the first entry is 1
    w = offdiagonal_example(sys_, [1, 1], 2, seed=0)
    assert w.average.exact_average == 1
    assert all(r.value < 1e-12 for r in w.norms)


def test_independent_system_refuses():
    with pytest.raises(ConstructionError):
        offdiagonal_example(progression_system(3, 5), [2, 2, 2], 2)
    with pytest.raises(ConstructionError):
        dependent_counterexample(progression_system(3, 5), 2, 2)


def test_counterexample_4ap():
    p, n = 5, 2
    w = dependent_counterexample(progression_system(4, p), 2, n, seed=1)
    A = list(w.indicator.values)
    density = oracles.system_average([A] * 4, [(1, 0), (1, 1), (1, 2), (1, 3)], p, n).real
    assert float(w.density) == pytest.approx(density)
    assert w.density == Fraction(49, 625)
    assert w.set_report.expected == Fraction(9, 25) ** 4
    assert w.density != w.set_report.expected
    fw = w.function_witness
    assert abs(fw.average.average) == pytest.approx(1)
    assert all(r.value == pytest.approx(5 ** (-n / 4)) for r in fw.norms)
