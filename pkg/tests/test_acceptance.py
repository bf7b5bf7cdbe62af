"""Acceptance criteria: property sweeps and exact golden values.

Each test prints a single PASS/FAIL line (collected again in the terminal
summary) and asserts the criterion at its stated tolerance.
"""
from __future__ import annotations

import time
from fractions import Fraction

import numpy as np
import pytest

from truecomplexity import field as fd
from truecomplexity.constructions import offdiagonal_example
from truecomplexity.counting import set_solution_density, system_average
from truecomplexity.linsys import LinearSystem, analyze_system, progression_system
from truecomplexity.poly import phase_table, random_polynomial
from truecomplexity.uniformity import correlation, inverse_search
from truecomplexity.verification import (
    SLACK, check_gauss_degree_d, check_gauss_quadratic, check_kappa_basepoint, check_kappa_multilinearity,
    check_kappa_symmetry, check_partial_derivative_rank, check_rank_combination, check_rank_gap_filter,
    check_rank_subadditivity, check_rank_sum_m, check_restriction_rank, check_system_phase_bound,
    check_unorm_rank_equality, check_von_neumann, filter_fixture,
)
from truecomplexity.decomposition import rank_gap_filter


def polynomial_grid():
    """50 seeded polynomials with d in {2,3}, p in {3,5}, n <= 3, plus a quartic over F_3^2."""
    rng = np.random.default_rng(20240601)
    out = []
    while len(out) < 50:
        p, d, n = int(rng.choice([3, 5])), int(rng.choice([2, 3])), int(rng.integers(1, 4))
        if d > n * (p - 1):
            continue
        out.append(random_polynomial(d, p, n, rng=rng, exact_degree=True))
    out.append(random_polynomial(4, 3, 2, rng=rng, exact_degree=True))
    return out


GRID = polynomial_grid()


def test_grid_shape():
    assert len(GRID) == 51
    assert {q.p for q in GRID} == {3, 5} and {q.degree for q in GRID} == {2, 3, 4}
    assert max(q.N for q in GRID) == 3


def test_norm_rank_equality(verdict):
    t0 = time.perf_counter()
    bad = [str(q) for q in GRID if not check_unorm_rank_equality(poly=q).passed]
    elapsed = time.perf_counter() - t0
    verdict("1 norm-rank equality", not bad and elapsed <= 120,
            f"{len(GRID) - len(bad)}/{len(GRID)} exact in {elapsed:.2f}s")


def test_gauss_bounds(verdict):
    bad = [str(q) for q in GRID if not check_gauss_degree_d(poly=q).passed]
    diag_bad = []
    for p in (3, 5):
        for n in range(1, 5):
            r = check_gauss_quadratic(p=p, n=n)
            if not (r.passed and r.lhs == Fraction(1, p ** n)):
                diag_bad.append((p, n))
    verdict("2 Gauss-sum bounds", not bad and not diag_bad,
            f"{len(bad)} bound violations; diagonal |E w^q|^2 = p^-n exact for {8 - len(diag_bad)}/8")


def test_form_contract(verdict):
    failures = 0
    for seed, q in enumerate(GRID):
        for check in (check_kappa_symmetry, check_kappa_multilinearity, check_kappa_basepoint):
            r = check(poly=q, samples=100, seed=seed)
            failures += r.lhs
    verdict("3 derived-form contract", failures == 0, f"{failures} failures over {3 * 100 * len(GRID)} samples")


def test_restriction_and_derivative(verdict):
    bad = []
    indices = {2: [(1, 1), (1, 2)], 3: [(1, 1, 2), (1, 2, 3), (1, 1, 1)]}
    for seed in range(20):
        d = 2 + seed % 2
        p = 5 if d == 3 else (3, 5)[seed // 2 % 2]
        if not check_restriction_rank(p=p, n=2, d=d, seed=seed).passed:
            bad.append(("restriction", seed))
        V = indices[d][seed % len(indices[d])]
        if not check_partial_derivative_rank(p=p, n=2, seed=seed, index=V, i=V[-1]).passed:
            bad.append(("derivative", seed))
    verdict("4 restriction and derivative-rank identities", not bad, f"{40 - len(bad)}/40 exact")


def test_rank_arithmetic(verdict):
    violations = []
    for seed in range(200):
        p = (3, 5)[seed % 2]
        d = 2 if p == 3 else 2 + seed // 2 % 2
        for name, r in (("subadditive", check_rank_subadditivity(p=p, n=2, d=d, seed=seed)),
                        ("sum3", check_rank_sum_m(p=p, n=2, d=d, m=3, seed=seed)),
                        ("combination2", check_rank_combination(p=p, n=2, d=d, m=2, seed=seed)),
                        ("combination3", check_rank_combination(p=p, n=2, d=d, m=3, seed=seed))):
            if not r.passed:
                violations.append((name, seed))
    verdict("5 rank subadditivity and combination", not violations, f"{len(violations)} violations in 800 checks")


def test_system_phase_bound(verdict):
    bad, worst = [], 0.0
    for system in ("3ap", "xy"):
        for seed in range(30):
            degrees = [(2, 2), (3, 3), (2, 3)][seed % 3]
            r = check_system_phase_bound(system=system, p=5, n=2, degrees=degrees, seed=seed)
            worst = max(worst, r.lhs / r.rhs)
            if not r.passed:
                bad.append((system, seed))
    verdict("6 system phase bound", not bad, f"{len(bad)} violations, max lhs/rhs {worst:.3f}")


def test_von_neumann(verdict):
    t0 = time.perf_counter()
    bad = []
    for seed in range(100):
        system = ("3ap", "xy")[seed % 2]
        p, n = (3, 5)[seed // 2 % 2], 1 + seed // 4 % 2
        if not check_von_neumann(system=system, p=p, n=n, seed=seed).passed:
            bad.append(seed)
    elapsed = time.perf_counter() - t0
    verdict("7 generalized von Neumann", not bad and elapsed <= 180,
            f"{100 - len(bad)}/100 tuples within {SLACK:g} in {elapsed:.2f}s")


def test_analyzer_goldens(verdict):
    got = []
    for length, p, want in ((3, 5, (2, 1, 1)), (3, 7, (2, 1, 1)), (4, 7, (3, 2, 2))):
        a = analyze_system(progression_system(length, p))
        got.append(((a.s_star, a.predicted_true_complexity, a.cs_complexity), want))
    verdict("8 analyzer goldens", all(g == w for g, w in got), "; ".join(f"{g}" for g, _ in got))


def test_offdiagonal_example(verdict):
    w2 = offdiagonal_example(progression_system(4, 5), [2, 2, 2, 2], 2, seed=1)
    w3 = offdiagonal_example(progression_system(4, 5), [2, 2, 2, 2], 3, seed=1)
    ok2 = w2.average.exact_average == 1 and all(r.exact_power == Fraction(1, 25) for r in w2.norms)
    ok3 = w3.average.exact_average == 1 and all(r.exact_power == Fraction(1, 125) for r in w3.norms)
    close = all(r.value == pytest.approx(5 ** -0.5) for r in w2.norms) and \
        all(r.value == pytest.approx(5 ** -0.75) for r in w3.norms)
    verdict("9 off-diagonal example", ok2 and ok3 and close,
            f"average 1 with ||f_i||_U2 = {w2.norms[0].value:.6f} (n=2), {w3.norms[0].value:.6f} (n=3)")


def test_rank_gap_filter(verdict):
    problems = []
    guaranteed = 0
    for seed in range(20):
        fx = filter_fixture(seed)
        rep = rank_gap_filter(fx["f"], fx["combination"], fx["g"], fx["h"], fx["epsilon"], fx["M"], fx["R"],
                              eta=fx["eta"], degree=fx["degree"])
        dec = rep.decomposition
        if dec.reconstruction_error() > 1e-9:
            problems.append((seed, "conservation"))
        if dec.combination.M > fx["M"] + 1e-12:
            problems.append((seed, "mass"))
        if any(not rep.ranks[j].infinite and rep.ranks[j].rank < fx["R"] - 1e-12 for j in rep.high):
            problems.append((seed, "rank"))
        if rep.precondition_holds:
            guaranteed += 1
            if not rep.guarantee_holds:
                problems.append((seed, "5 eps"))
        if not all(b.holds for b in rep.bounds[:4]):
            problems.append((seed, "intermediate"))
        if not check_rank_gap_filter(seed=seed).passed:
            problems.append((seed, "check"))
    verdict("10 rank-gap filter", not problems,
            f"20 fixtures, precondition realized on {guaranteed}, problems {problems}")


def test_inverse_recovery(verdict):
    t0 = time.perf_counter()
    bad = []
    rng = np.random.default_rng(11)
    for trial in range(12):
        d = 1 + trial % 2
        planted = random_polynomial(d, 3, 2, rng=rng)
        f = phase_table(planted).table
        res = inverse_search(f, d)
        same = np.array_equal(res.polynomial.residue_table(), planted.residue_table())
        if not (same and abs(res.correlation - 1) < 1e-9 and abs(correlation(f, res.polynomial) - 1) < 1e-9):
            bad.append(trial)
    elapsed = time.perf_counter() - t0
    verdict("11 inverse-search recovery", not bad and elapsed <= 60,
            f"{12 - len(bad)}/12 planted phases recovered in {elapsed:.2f}s")


def test_counting_cross_check(verdict):
    bad = []
    largest = 0
    rng = np.random.default_rng(7)
    seed = 0
    while seed < 30:
        p = int(rng.choice([3, 5, 7]))
        m, d, n = int(rng.integers(2, 5)), int(rng.integers(1, 5)), int(rng.integers(1, 4))
        if p ** (n * d) > 10 ** 7:
            continue
        largest = max(largest, p ** (n * d))
        sys_ = LinearSystem.from_rows(rng.integers(0, p, (m, d)), p)
        if seed % 2 == 0:
            fs = [phase_table(random_polynomial(int(rng.integers(1, 3)), p, n, rng=rng)) for _ in range(m)]
            a, b = system_average(fs, sys_), system_average(fs, sys_, method="direct")
            ca, cb = a.counter, b.counter
            ok = [x * cb.total for x in ca.counts] == [y * ca.total for y in cb.counts]
        else:
            sets = [fd.TableFunction(p, n, (rng.random(p ** n) < 0.4).astype(float)) for _ in range(m)]
            ok = set_solution_density(sets, sys_).density == set_solution_density(sets, sys_, "direct").density
        if not ok:
            bad.append(seed)
        seed += 1
    verdict("12 counting cross-check", not bad, f"30 fixtures exact, largest p^(nd) = {largest}")
