from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from truecomplexity import field as fd
from truecomplexity.errors import BudgetError, DomainError
from truecomplexity.multilinear import polynomial_rank
from truecomplexity.poly import Polynomial, parse_polynomial, phase_table, random_polynomial
from truecomplexity.uniformity import (correlation, gowers_inner_product, gowers_norm, gowers_norm_naive,
                                       inverse_search, multiplicative_derivative, norm_profile)

import oracles

# a fixed +-1 table on F_3^2; its best linear correlation was found by an
# independent loop over all 27 affine phases
SIGN_TABLE = [-1, 1, -1, -1, -1, -1, 1, 1, 1]
SIGN_TABLE_BEST = 0.5879447357921314


def test_multiplicative_derivative():
    rng = np.random.default_rng(0)
    f = fd.TableFunction.random(3, 2, rng)
    assert np.allclose(multiplicative_derivative(f, (0, 0)).values, np.abs(f.values) ** 2)
    lin = phase_table(parse_polynomial("x1 + 2*x2", 3, 2)).table
    d = multiplicative_derivative(lin, (1, 1))
    assert np.allclose(d.values, fd.root_of_unity(0, 3))  # 1 + 2 = 0 mod 3
    d = multiplicative_derivative(lin, (1, 0))
    assert np.allclose(d.values, fd.root_of_unity(1, 3))
    q = phase_table(parse_polynomial("x1*x2", 3, 2)).table
    dq = multiplicative_derivative(q, (1, 0))
    assert dq.allclose(phase_table(parse_polynomial("x2", 3, 2)).table)


def test_norm_examples():
    for k in (1, 2, 3):
        assert gowers_norm(fd.TableFunction.constant(3, 2), k).value == pytest.approx(1)
    rep = gowers_norm(phase_table(parse_polynomial("x1*x2", 3, 2)), 2)
    assert rep.exact_power == Fraction(1, 9)
    assert rep.value == pytest.approx(3 ** -0.5)
    for seed in range(5):
        q = random_polynomial(2, 5, 2, seed=seed)
        assert gowers_norm(phase_table(q), 3).exact_power == 1


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(2, 2), (3, 1), (3, 2), (5, 1)]), st.sampled_from([1, 2, 3]), st.integers(0, 10 ** 6))
def test_float_norm_matches_definition(shape, k, seed):
    p, N = shape
    f = fd.TableFunction.random(p, N, np.random.default_rng(seed))
    vals = list(f.values)
    expected = oracles.gowers_power(vals, p, N, k)
    assert gowers_norm(f, k, exact=False).power == pytest.approx(expected, abs=1e-9)
    assert gowers_norm_naive(f, k) ** (2 ** k) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(3, 2), (5, 2), (7, 1)]), st.integers(0, 10 ** 6))
def test_u2_matches_fourier(shape, seed):
    p, N = shape
    f = fd.TableFunction.random(p, N, np.random.default_rng(seed))
    assert gowers_norm(f, 2).power == pytest.approx(oracles.fourier_u2_power(list(f.values), p, N), abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(3, 2, 2), (5, 2, 2), (5, 2, 3), (3, 3, 2)]), st.integers(0, 10 ** 6))
def test_exact_phase_norm_matches_float(shape, seed):
    p, N, d = shape
    ph = phase_table(random_polynomial(d, p, N, seed=seed))
    exact = gowers_norm(ph, d)
    assert exact.exact_power is not None
    assert float(exact.exact_power) == pytest.approx(gowers_norm(ph.table, d, exact=False).power, abs=1e-9)


def test_norm_profile_monotone():
    f = fd.TableFunction.random(3, 2, np.random.default_rng(1))
    vals = [r.value for r in norm_profile(f, [1, 2, 3])]
    assert vals[0] <= vals[1] + 1e-12 <= vals[2] + 2e-12


def test_exact_requires_phase():
    with pytest.raises(DomainError):
        gowers_norm(fd.TableFunction.constant(3, 1), 2, exact=True)


def test_budget_enforced():
    with fd.budget_limit(1000):
        with pytest.raises(BudgetError):
            gowers_norm(phase_table(random_polynomial(2, 5, 3, seed=0)), 3)


def test_inner_product_examples():
    p, N = 3, 2
    one = fd.TableFunction.constant(p, N)
    assert gowers_inner_product([one] * 4) == pytest.approx(1)
    f = fd.TableFunction.random(p, N, np.random.default_rng(5))
    assert gowers_inner_product([f] * 4).real == pytest.approx(gowers_norm(f, 2).power)
    q = phase_table(parse_polynomial("x1^2 + 2*x1*x2", p, N)).table
    rng = np.random.default_rng(6)
    for _ in range(10):
        g = fd.TableFunction.random(p, N, rng)
        assert abs(gowers_inner_product([g] + [q] * 7) - g.inner(q)) < 1e-9


def test_correlation():
    q = parse_polynomial("x1*x2 + x1", 5, 2)
    assert correlation(phase_table(q).table, q) == pytest.approx(1)
    assert correlation(fd.TableFunction.zeros(5, 2), q) == 0
    other = parse_polynomial("x1^2 + x2^2", 5, 2)
    diff = other - q
    r = polynomial_rank(diff, 2)
    bound = float(r.density) ** 0.5
    assert abs(correlation(phase_table(other).table, q)) <= bound + 1e-9


def test_inverse_search_planted():
    q = parse_polynomial("x1*x2 + 2*x2", 3, 2)
    res = inverse_search(phase_table(q), 2)
    assert res.correlation == pytest.approx(1)
    assert np.array_equal(res.polynomial.residue_table(), q.residue_table())
    assert res.candidates == 3 ** 6


def test_inverse_search_mixture():
    p = 3
    q1 = parse_polynomial("x1*x2", p, 2)
    q2 = parse_polynomial("x1^2 + x2^2", p, 2)
    f = (phase_table(q1).table + phase_table(q2).table) * 0.5
    res = inverse_search(f, 2)
    tabs = [q1.residue_table().tolist(), q2.residue_table().tolist()]
    assert res.polynomial.residue_table().tolist() in tabs
    r = polynomial_rank(q1 - q2, 2)
    assert abs(abs(res.correlation) - 0.5) <= 0.5 * float(r.density) ** 0.5 + 1e-9


def test_inverse_search_golden_sign_table():
    f = fd.TableFunction(3, 2, np.array(SIGN_TABLE, dtype=float))
    res = inverse_search(f, 1)
    assert abs(res.correlation) == pytest.approx(SIGN_TABLE_BEST, abs=1e-12)
    assert abs(res.correlation) < 0.6 and res.candidates == 27


def test_inverse_search_sampling_is_seeded():
    f = fd.TableFunction.random(3, 2, np.random.default_rng(7))
    a = inverse_search(f, 2, mode="sampling", samples=50, seed=3)
    b = inverse_search(f, 2, mode="sampling", samples=50, seed=3)
    assert a.polynomial == b.polynomial and a.correlation == b.correlation
    assert abs(a.correlation) <= abs(inverse_search(f, 2).correlation) + 1e-12
