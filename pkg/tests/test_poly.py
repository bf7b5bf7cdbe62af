from __future__ import annotations

from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from truecomplexity.errors import DomainError, PolynomialSyntaxError
from truecomplexity.poly import (Polynomial, compose_with_form, evaluate_polynomial, format_polynomial,
                                 monomials_up_to, parse_polynomial, phase_table, random_polynomial, substitute)

import oracles


def poly_strategy(p, N, max_terms=5):
    mono = st.tuples(*[st.integers(0, p + 1) for _ in range(N)])
    return st.lists(st.tuples(mono, st.integers(0, p - 1)), max_size=max_terms)


def test_parse_examples():
    q = parse_polynomial("x1^2 + 2*x2", 3, 2)
    assert q.as_dict() == {(2, 0): 1, (0, 1): 2}
    assert q.degree == 2
    z = parse_polynomial("0", 3, 2)
    assert z.is_zero() and z.degree == 0


def test_reduction_flag():
    q = parse_polynomial("x1^3", 3, 1)
    assert q.reduced
    assert q == parse_polynomial("x1", 3, 1) and q.degree == 1
    for x in range(3):
        assert q((x,)) == x ** 3 % 3
    assert not parse_polynomial("x1^2", 3, 1).reduced


@pytest.mark.parametrize("text, pos", [("x1 +", 4), ("x0", 0), ("x3", 0), ("2**x1", 2), ("x1 $ x2", 3)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(PolynomialSyntaxError) as exc:
        parse_polynomial(text, 5, 2)
    assert exc.value.position == pos


def test_parse_coefficients_and_signs():
    q = parse_polynomial("-x1*x2 + 7*x2^2 - 3", 5, 2)
    assert q.as_dict() == {(1, 1): 4, (0, 2): 2, (0, 0): 2}
    assert parse_polynomial(format_polynomial(q), 5, 2) == q


def test_evaluation_examples():
    assert Polynomial.zero(3, 2)((1, 2)) == 0
    assert parse_polynomial("x1*x2", 3, 2)((2, 2)) == 1
    q = parse_polynomial("x1^2+x2^2", 3, 2)
    dist = Counter(int(v) for v in q.residue_table())
    # squares in F_3 are {0, 1, 1}, so only (0, 0) gives 0
    assert dist == {0: 1, 1: 4, 2: 4}
    assert dist == Counter(oracles.eval_terms({(2, 0): 1, (0, 2): 1}, x, 3) for x in oracles.points(3, 2))


@settings(max_examples=40)
@given(st.sampled_from([2, 3, 5]), st.data())
def test_evaluation_matches_oracle(p, data):
    N = 2
    terms = data.draw(poly_strategy(p, N))
    q = Polynomial.from_terms(p, N, terms)
    raw = {}
    for m, c in terms:
        raw[m] = raw.get(m, 0) + c
    table = q.residue_table()
    for x in oracles.points(p, N):
        assert table[oracles.index(x, p)] == oracles.eval_terms(raw, x, p)
        assert evaluate_polynomial(q, x) == table[oracles.index(x, p)]


@settings(max_examples=30)
@given(st.sampled_from([3, 5]), st.data())
def test_ring_operations_are_pointwise(p, data):
    N = 2
    a = Polynomial.from_terms(p, N, data.draw(poly_strategy(p, N, 3)))
    b = Polynomial.from_terms(p, N, data.draw(poly_strategy(p, N, 3)))
    ta, tb = a.residue_table(), b.residue_table()
    assert np.array_equal((a * b).residue_table(), ta * tb % p)
    assert np.array_equal((a + b).residue_table(), (ta + tb) % p)
    assert np.array_equal((a - b).residue_table(), (ta - tb) % p)
    assert np.array_equal(a.scale(2).residue_table(), 2 * ta % p)


def test_compose_examples():
    assert compose_with_form(parse_polynomial("x1", 3, 1), (1, 2)) == parse_polynomial("x1 + 2*x2", 3, 2)
    sq = compose_with_form(parse_polynomial("x1^2", 5, 1), (1, 1))
    assert sq == parse_polynomial("x1^2 + 2*x1*x2 + x2^2", 5, 2)
    for x in oracles.points(5, 2):
        assert sq(x) == (x[0] + x[1]) ** 2 % 5


def test_compose_power_sum_spot_check():
    pi2 = parse_polynomial("x1^2 + x2^2", 5, 2)
    comp = compose_with_form(pi2, (1, 3))
    rng = np.random.default_rng(0)
    for _ in range(16):
        x, y = rng.integers(0, 5, 2), rng.integers(0, 5, 2)
        expected = sum((int(x[i]) + 3 * int(y[i])) ** 2 for i in range(2)) % 5
        assert comp(tuple(int(v) for v in (*x, *y))) == expected


def test_substitute_matches_composition():
    p = 5
    q = parse_polynomial("x1*x2 + 3*x1^2", p, 2)
    images = [parse_polynomial("x1 + x2", p, 2), parse_polynomial("2*x2 + 1", p, 2)]
    sub = substitute(q, images)
    for x in oracles.points(p, 2):
        u, v = images[0](x), images[1](x)
        assert sub(x) == q((u, v))


def test_phase_tables():
    assert np.allclose(phase_table(Polynomial.zero(3, 2)).table.values, 1)
    w = oracles.omega(3)
    assert np.allclose(phase_table(parse_polynomial("x1", 3, 1)).table.values, [1, w, w ** 2])
    mean = phase_table(parse_polynomial("x1*x2", 3, 2)).table.mean()
    assert mean == pytest.approx(1 / 3)
    assert sum(w ** (a * b) for a in range(3) for b in range(3)) / 9 == pytest.approx(1 / 3)


def test_random_polynomial():
    assert random_polynomial(0, 5, 2, seed=1).degree == 0
    assert random_polynomial(2, 3, 2, seed=7) == random_polynomial(2, 3, 2, seed=7)
    assert random_polynomial(2, 3, 2, seed=7).degree <= 2
    assert random_polynomial(3, 5, 2, seed=3, exact_degree=True).degree == 3
    h = random_polynomial(2, 5, 3, seed=2, homogeneous=True)
    assert all(sum(m) == 2 for m, _ in h.terms)
    with pytest.raises(DomainError):
        random_polynomial(5, 3, 2, seed=0)


def test_random_polynomial_coefficients_uniform():
    p, N, d = 3, 2, 2
    monos = monomials_up_to(d, p, N)
    trials = 3000
    counts = {m: Counter() for m in monos}
    for seed in range(trials):
        q = random_polynomial(d, p, N, seed=seed)
        for m in monos:
            counts[m][q.coefficient(m)] += 1
    sigma = (trials * (1 / p) * (1 - 1 / p)) ** 0.5
    for m in monos:
        for c in range(p):
            assert abs(counts[m][c] - trials / p) <= 3 * sigma


def test_monomial_order():
    monos = monomials_up_to(2, 3, 2)
    assert monos[0] == (0, 0)
    assert set(monos) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert [sum(m) for m in monos] == sorted(sum(m) for m in monos)


def test_homogeneous_part_and_str():
    q = parse_polynomial("2*x1*x2^2 + 4*x1 + 4", 5, 2)
    assert str(q) == "2*x1*x2^2 + 4*x1 + 4"
    assert q.homogeneous_part(1) == parse_polynomial("4*x1", 5, 2)
    assert q.coefficient((0, 0)) == 4


def test_exact_mean_of_phase_is_rational():
    ph = phase_table(parse_polynomial("x1*x2", 3, 2))
    counts = np.bincount(ph.residues, minlength=3)
    assert Fraction(int(counts[0] - counts[1]), 9) == Fraction(1, 3)
