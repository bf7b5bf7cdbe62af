from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from truecomplexity import field as fd
from truecomplexity.counting import (balanced_part, image_parametrization, indicator_table, parse_set_spec,
                                     set_solution_density, system_average)
from truecomplexity.errors import DomainError, ShapeError
from truecomplexity.linsys import LinearSystem, progression_system
from truecomplexity.poly import parse_polynomial, phase_table, random_polynomial
from truecomplexity.uniformity import gowers_norm

import oracles


def test_trivial_averages():
    ones = [fd.TableFunction.constant(5, 2)] * 3
    assert system_average(ones, progression_system(3, 5)).average == pytest.approx(1)


@pytest.mark.parametrize("t", [(0, 0), (1, 0), (2, 3), (4, 4)])
def test_character_averages(t):
    p = 5
    q = parse_polynomial(f"{t[0]}*x1 + {t[1]}*x2", p, 2)
    rep = system_average([phase_table(q)] * 3, progression_system(3, p))
    assert rep.exact_average == (1 if t == (0, 0) else 0)


def test_set_density_golden():
    p, n = 5, 2
    A = parse_set_spec("poly:x1^2+x2^2:in:0", p, n)
    vals = list(A.values)
    expected = oracles.system_average([vals] * 3, [(1, 0), (1, 1), (1, 2)], p, n)
    for method in ("reparametrized", "direct"):
        rep = set_solution_density([A] * 3, progression_system(3, p), method=method)
        assert rep.density == Fraction(49, 625)
        assert float(rep.density) == pytest.approx(expected.real)
        assert rep.expected == Fraction(9, 25) ** 3
        assert rep.deviation == Fraction(496, 15625)


def test_set_density_extremes():
    sys_ = progression_system(3, 3)
    full = indicator_table(range(9), 3, 2)
    empty = indicator_table([], 3, 2)
    rep = set_solution_density([full] * 3, sys_)
    assert rep.density == 1 and rep.deviation == 0
    assert set_solution_density([empty] * 3, sys_).density == 0
    with pytest.raises(DomainError):
        set_solution_density([fd.TableFunction.constant(3, 2, 0.5)] * 3, sys_)


def test_balanced_part():
    assert np.allclose(balanced_part(indicator_table(range(9), 3, 2)).values, 0)
    assert np.allclose(balanced_part(indicator_table([0], 3, 1)).values, [2 / 3, -1 / 3, -1 / 3])
    rng = np.random.default_rng(0)
    A = indicator_table(np.nonzero(rng.random(25) < 0.4)[0], 5, 2)
    assert gowers_norm(balanced_part(A), 1).value < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(1, 2), st.integers(2, 4), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_methods_agree_with_oracle(p, n, m, d, seed):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, p, (m, d))
    sys_ = LinearSystem.from_rows(rows, p)
    fs = [fd.TableFunction.random(p, n, rng) for _ in range(m)]
    a = system_average(fs, sys_).average
    b = system_average(fs, sys_, method="direct").average
    c = oracles.system_average([list(f.values) for f in fs], rows.tolist(), p, n)
    assert abs(a - b) < 1e-9 and abs(a - c) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(0, 10 ** 6))
def test_exact_phase_averages_agree(p, seed):
    rng = np.random.default_rng(seed)
    sys_ = LinearSystem.from_rows(rng.integers(0, p, (3, 2)), p)
    fs = [phase_table(random_polynomial(2, p, 2, rng=rng)) for _ in range(3)]
    a = system_average(fs, sys_)
    b = system_average(fs, sys_, method="direct")
    # the direct sum runs over a larger domain, so compare histograms proportionally
    assert [c * b.counter.total for c in a.counter.counts] == [c * a.counter.total for c in b.counter.counts]
    assert a.exact_average == b.exact_average
    assert abs(a.average - system_average([f.table for f in fs], sys_).average) < 1e-9


def test_subset_average():
    p = 3
    rng = np.random.default_rng(1)
    fs = [fd.TableFunction.random(p, 1, rng) for _ in range(3)]
    sys_ = progression_system(3, p)
    rep = system_average(fs, sys_, subset=[0])
    assert rep.average == pytest.approx(fs[0].mean())


def test_reparametrization_is_image():
    sys_ = LinearSystem.from_rows([(1, 2, 0), (2, 4, 0), (0, 0, 1)], 5)
    C = image_parametrization(sys_)
    assert C.shape == (3, 2)


def test_shape_checks():
    with pytest.raises(ShapeError):
        system_average([fd.TableFunction.constant(3, 1)] * 2, progression_system(3, 3))
    with pytest.raises(ShapeError):
        system_average([fd.TableFunction.constant(5, 1)] * 3, progression_system(3, 3))
    with pytest.raises(DomainError):
        system_average([fd.TableFunction.constant(3, 1)] * 3, progression_system(3, 3), method="fast")


def test_set_spec_parsing():
    A = parse_set_spec("0, 4 8", 3, 2)
    assert A.values.tolist() == [1, 0, 0, 0, 1, 0, 0, 0, 1]
    with pytest.raises(DomainError):
        parse_set_spec("poly:x1", 3, 1)
    with pytest.raises(DomainError):
        parse_set_spec("9", 3, 2)
