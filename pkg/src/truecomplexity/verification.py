"""Registry of named identity and inequality checks over seeded fixtures.

Equality checks compare integers or rationals exactly; inequality checks
allow ``1e-9`` of slack on the floating side.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable

import numpy as np

from . import field as fd
from .constructions import offdiagonal_example
from .counting import system_average
from .decomposition import PhaseCombination, rank_gap_filter
from .errors import DomainError
from .linsys import (FpMatrix, LinearSystem, cs_complexity, degree_independence, power_coefficient_matrix,
                     progression_system, row_independence_certificate, symmetric_tensor_matrix)
from .multilinear import (MonomialTerm, MultilinearForm, MultisetIndex, analytic_rank, derive_multilinear,
                          dual_operator, monomial_partial_derivative, restricted_rank_profile)
from .poly import Polynomial, parse_polynomial, phase_table, random_polynomial
from .uniformity import gowers_norm

SLACK = 1e-9


@dataclass(frozen=True)
class CheckResult:
    check: str
    fixture: dict
    lhs: object
    rhs: object
    relation: str
    passed: bool
    tolerance: float
    cost: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def conv(v):
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, np.bool_):
                return bool(v)
            if isinstance(v, np.integer):
                return int(v)
            if isinstance(v, (float, np.floating)):
                v = float(v)
                return v if math.isfinite(v) else str(v)
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            return v

        return {"check": self.check, "fixture": conv(self.fixture), "lhs": conv(self.lhs), "rhs": conv(self.rhs),
                "relation": self.relation, "pass": bool(self.passed), "tolerance": self.tolerance,
                "cost": self.cost, "details": conv(self.details)}

    def line(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _le(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + SLACK


def _random_form(p: int, n: int, d: int, rng) -> MultilinearForm:
    poly = random_polynomial(d, p, n, rng=rng, homogeneous=True)
    return derive_multilinear(poly, d)


def _coerce_poly(poly, p: int, n: int):
    return parse_polynomial(poly, p, n) if isinstance(poly, str) else poly


# ---------------------------------------------------------------------------
# derived forms
# ---------------------------------------------------------------------------

def _contract_fixture(poly, p, n, d, rng):
    poly = _coerce_poly(poly, p, n)
    if poly is None:
        poly = random_polynomial(min(d, p - 1), p, n, rng=rng, exact_degree=True)
    return poly, derive_multilinear(poly, poly.degree, allow_small_p=True)


def check_kappa_symmetry(p=5, n=2, d=3, samples=100, seed=0, poly: Polynomial | None = None):
    rng = np.random.default_rng(seed)
    poly, form = _contract_fixture(poly, p, n, d, rng)
    p, n, d = form.p, form.n, form.d
    H = rng.integers(0, p, (samples, d, n))
    perms = np.array([rng.permutation(d) for _ in range(samples)])
    Hp = np.take_along_axis(H, perms[:, :, None], axis=1)
    bad = int((form.evaluate_array(H) != form.evaluate_array(Hp)).sum())
    return CheckResult("kappa-symmetry", dict(p=p, n=n, d=d, seed=seed, samples=samples, poly=str(poly)), bad, 0, "=",
                       bad == 0, 0.0, samples * 2 ** (d + 1))


def check_kappa_multilinearity(p=5, n=2, d=3, samples=100, seed=0, poly: Polynomial | None = None):
    rng = np.random.default_rng(seed)
    poly, form = _contract_fixture(poly, p, n, d, rng)
    p, n, d = form.p, form.n, form.d
    H = rng.integers(0, p, (samples, d, n))
    slot = rng.integers(0, d, samples)
    other = rng.integers(0, p, (samples, n))
    a, b = rng.integers(0, p, samples), rng.integers(0, p, samples)
    Hc, Ho = H.copy(), H.copy()
    rows = np.arange(samples)
    Hc[rows, slot] = (a[:, None] * H[rows, slot] + b[:, None] * other) % p
    Ho[rows, slot] = other
    lhs = form.evaluate_array(Hc)
    rhs = (a * form.evaluate_array(H) + b * form.evaluate_array(Ho)) % p
    bad = int((lhs != rhs).sum())
    return CheckResult("kappa-multilinearity", dict(p=p, n=n, d=d, seed=seed, samples=samples, poly=str(poly)), bad, 0, "=",
                       bad == 0, 0.0, samples * 3 * 2 ** d)


def check_kappa_basepoint(p=5, n=2, d=3, samples=100, seed=0, poly: Polynomial | None = None):
    rng = np.random.default_rng(seed)
    poly, form = _contract_fixture(poly, p, n, d, rng)
    p, n, d = form.p, form.n, form.d
    H = rng.integers(0, p, (samples, d, n))
    x = rng.integers(0, p, (samples, n))
    total = np.zeros(samples, dtype=np.int64)
    for eps in product((0, 1), repeat=d):
        pt = x + np.einsum("j,sjn->sn", np.array(eps), H)
        total += (-1) ** (d - sum(eps)) * poly.evaluate_array(pt % p)
    bad = int((total % p != form.evaluate_array(H)).sum())
    return CheckResult("kappa-basepoint", dict(p=p, n=n, d=d, seed=seed, samples=samples, poly=str(poly)), bad, 0, "=",
                       bad == 0, 0.0, samples * 2 ** (d + 1))


# ---------------------------------------------------------------------------
# norms and Gauss sums
# ---------------------------------------------------------------------------

def phase_mean_abs2(phase) -> Fraction | float:
    """``|E omega^pi|^2`` exactly when rational, via the residue histogram."""
    p = phase.p
    hist = np.bincount(phase.residues, minlength=p).astype(np.int64)
    counts = [int((hist * np.roll(hist, -j)).sum()) for j in range(p)]
    c = fd.ResidueCounter.from_array(counts)
    ex = c.exact_mean()
    return ex if ex is not None else abs(c.mean())


def check_phase_unorm_one(p=5, n=2, k=2, seed=0):
    rng = np.random.default_rng(seed)
    k = min(k, p - 1)
    poly = random_polynomial(k, p, n, rng=rng)
    ph = phase_table(poly)
    power = gowers_norm(ph, k + 1).exact_power
    # dual direction: |<f, omega^pi>| <= ||f||_{U^{k+1}} for a random bounded f
    f = fd.TableFunction.random(p, n, rng)
    dual_lhs = abs(f.inner(ph.table))
    dual_rhs = gowers_norm(f, k + 1).value
    witness = abs(ph.table.inner(ph.table))  # f = omega^pi attains 1
    ok = power == 1 and _le(dual_lhs, dual_rhs) and abs(witness - 1) <= SLACK
    return CheckResult("phase-unorm-one", dict(p=p, n=n, k=k, seed=seed, poly=str(poly)), power, Fraction(1), "=",
                       ok, 0.0, p ** (n * (k + 1)), {"dual_lhs": dual_lhs, "dual_rhs": dual_rhs, "witness": witness})


def check_gauss_quadratic(p=5, n=2, seed=0):
    terms = []
    for i in range(n):
        e = [0] * n
        e[i] = 2
        terms.append((e, 1))
    q = Polynomial.from_terms(p, n, terms)
    r = analytic_rank(derive_multilinear(q, 2))
    lhs = phase_mean_abs2(phase_table(q))
    rhs = r.density  # |E omega^q|^2 = p^{-r}
    return CheckResult("gauss-quadratic", dict(p=p, n=n, seed=seed, poly=str(q)), lhs, rhs, "=",
                       lhs == rhs, 0.0, p ** n, {"abs_mean": math.sqrt(float(lhs)), "rank": r.rank})


def check_gauss_degree_d(p=5, n=2, d=3, seed=0, poly: Polynomial | None = None):
    rng = np.random.default_rng(seed)
    poly = _coerce_poly(poly, p, n)
    if poly is None:
        d = min(d, p - 1)
        poly = random_polynomial(d, p, n, rng=rng, exact_degree=True)
    d = poly.degree
    r = analytic_rank(derive_multilinear(poly, d, allow_small_p=True))
    lhs = abs(phase_table(poly).table.mean())
    rhs = 0.0 if r.infinite else float(r.density) ** (1.0 / 2 ** (d - 1))
    return CheckResult("gauss-degree-d", dict(p=p, n=n, d=d, seed=seed, poly=str(poly)), lhs, rhs, "<=",
                       _le(lhs, rhs), SLACK, p ** n)


def check_unorm_rank_equality(p=3, n=2, d=2, seed=0, poly: Polynomial | None = None):
    rng = np.random.default_rng(seed)
    poly = _coerce_poly(poly, p, n)
    if poly is None:
        poly = random_polynomial(d, p, n, rng=rng, exact_degree=True)
    d = poly.degree
    rep = gowers_norm(phase_table(poly), d)
    r = analytic_rank(derive_multilinear(poly, d, allow_small_p=True))
    return CheckResult("unorm-rank-equality", dict(p=p, n=n, d=d, seed=seed, poly=str(poly)),
                       rep.exact_power, r.density, "=", rep.exact_power == r.density, 0.0, rep.cost,
                       {"norm": rep.value, "rank": r.rank})


def check_dual_operator_identity(p=3, n=2, d=2, samples=20, seed=0, poly: Polynomial | None = None):
    rng = np.random.default_rng(seed)
    poly = _coerce_poly(poly, p, n)
    if poly is None:
        d = min(d, p - 1)
        poly = random_polynomial(d, p, n, rng=rng, exact_degree=True)
    d = poly.degree
    r = analytic_rank(derive_multilinear(poly, d))
    D = dual_operator(poly, d)
    ph = phase_table(poly).table
    worst = 0.0
    for _ in range(samples):
        g = fd.TableFunction.random(p, n, rng, kind="real") * 1.0
        lhs = g.inner(ph)
        rhs = float(1 / r.density) * g.pairing(D)
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("dual-operator-identity", dict(p=p, n=n, d=d, seed=seed, poly=str(poly)), worst, SLACK,
                       "<=", worst <= SLACK, SLACK, p ** (n * (d + 1)))


# ---------------------------------------------------------------------------
# rank-gap filter
# ---------------------------------------------------------------------------

def filter_fixture(seed: int, p: int = 5, n: int = 3):
    """A decomposition ``f = sum lambda_j omega^{pi_j} + g + h`` of quadratic phases.

    Seeds divisible by 4 give a uniform ``f`` built from cancelling pairs of
    low- and middle-rank phases plus noise; seeds ``2 mod 4`` put a single
    low-rank phase in the combination and its negative in ``h``.
    Odd seeds give ``f = a omega^{pi_low} + b omega^{pi_high} + g + h`` with a
    full-rank ``pi_high``.
    """
    rng = np.random.default_rng(seed)
    def affine():
        return Polynomial.from_terms(p, n, [(tuple(int(i == j) for j in range(n)), int(rng.integers(p)))
                                            for i in range(n)] + [((0,) * n, int(rng.integers(p)))])

    def diag(rank):
        coeffs = rng.integers(1, p, rank)
        perm = rng.permutation(n)[:rank]
        terms = [(tuple(2 * int(j == i) for j in range(n)), int(c)) for i, c in zip(perm, coeffs)]
        return Polynomial.from_terms(p, n, terms) + affine()

    epsilon = 0.25
    noise = fd.TableFunction(p, n, rng.normal(size=p ** n) * 1e-3)
    g = fd.TableFunction(p, n, rng.normal(size=p ** n) * 1e-4)
    terms = []
    if seed % 4 == 2:
        # the structured part is absorbed by h, so f stays uniform while f_L != 0
        lam = float(rng.uniform(0.1, 0.2))
        low = affine()
        terms.append((lam, low))
        noise = noise - phase_table(low).table * lam
    elif seed % 2 == 0:
        lam = float(rng.uniform(0.2, 0.5))
        low = affine()
        terms += [(lam, low), (-lam, low)]
        mid = diag(int(rng.integers(1, n)))
        terms += [(0.05, mid), (-0.05, mid)]
    else:
        a, b = float(rng.uniform(0.05, 0.25)), float(rng.uniform(0.6, 1.0))
        terms += [(a, affine()), (b, diag(n))]
    comb = PhaseCombination.of(terms)
    f = comb.table() + g + noise
    M = comb.M
    eta = min(epsilon ** 2 / M, max(gowers_norm(g, 3).value, 1e-12))
    return dict(f=f, combination=comb, g=g, h=noise, epsilon=epsilon, M=M, R=1, eta=eta, degree=2)


def check_rank_gap_filter(seed=0, p=5, n=3):
    fx = filter_fixture(seed, p, n)
    rep = rank_gap_filter(fx["f"], fx["combination"], fx["g"], fx["h"], fx["epsilon"], fx["M"], fx["R"],
                          eta=fx["eta"], degree=fx["degree"])
    dec = rep.decomposition
    conserved = dec.reconstruction_error() <= SLACK
    high_ok = all(not r.infinite and r.rank >= fx["R"] - 1e-12 or r.infinite
                  for j, r in enumerate(rep.ranks) if j in rep.high)
    bounds_ok = all(b.holds for b in rep.bounds)
    guarantee_ok = rep.guarantee_holds or not rep.precondition_holds
    ok = conserved and high_ok and bounds_ok and guarantee_ok
    return CheckResult("rank-gap-filter-bound", dict(seed=seed, p=p, n=n), rep.h2_norm, 5 * rep.epsilon, "<=", ok,
                       SLACK, p ** (n * 3), {**rep.to_json(), "conserved": conserved})


# ---------------------------------------------------------------------------
# polynomial independence
# ---------------------------------------------------------------------------

def check_powers_identity(s=3, p=5, a=None, seed=0):
    rng = np.random.default_rng(seed)
    a = tuple(int(v) for v in (a if a is not None else rng.integers(0, p, s)))
    lhs = sum((-1) ** (s - sum(eps)) * sum(e * v for e, v in zip(eps, a)) ** s
              for eps in product((0, 1), repeat=s)) % p
    rhs = math.factorial(s) * math.prod(a) % p
    return CheckResult("powers-identity", dict(s=s, p=p, a=a), lhs, rhs, "=", lhs == rhs, 0.0, 2 ** s)


def random_system(rng, p: int, m: int, d: int) -> LinearSystem:
    return LinearSystem.from_rows(rng.integers(0, p, (m, d)), p)


def check_independence_monotone(trials=20, seed=0, p=None):
    rng = np.random.default_rng(seed)
    violations = 0
    mismatched = 0
    for _ in range(trials):
        pp = p or int(rng.choice([5, 7, 11]))
        sys_ = random_system(rng, pp, int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        seen = False
        for s in range(1, pp):
            v = degree_independence(sys_, s)
            if seen and not v.independent:
                violations += 1
            seen |= v.independent
            if s <= 3 and symmetric_tensor_matrix(sys_, s).rank != v.rank:
                mismatched += 1
    return CheckResult("independence-monotone", dict(trials=trials, seed=seed), violations, 0, "=",
                       violations == 0 and mismatched == 0, 0.0, trials, {"rank_mismatches": mismatched})


def check_restriction_rank(p=3, n=2, d=3, seed=0):
    rng = np.random.default_rng(seed)
    form = _random_form(p, n, d, rng) if d < p else derive_multilinear(
        random_polynomial(d, p, n, rng=rng, homogeneous=True), d, allow_small_p=True)
    prof = restricted_rank_profile(form)
    return CheckResult("restriction-rank", dict(p=p, n=n, d=d, seed=seed), prof.mean_density(), prof.full.density,
                       "=", prof.identity_holds(), 0.0, p ** (n * (d - 1)))


def check_weighted_multilinear_sum(p=3, n=2, d=2, seed=0):
    rng = np.random.default_rng(seed)
    d = min(d, p - 1)
    form = _random_form(p, n, d, rng)
    r = analytic_rank(form)
    q = p ** n
    total = fd.check_budget(q ** d, "weighted multilinear sum")
    k = np.arange(total)
    blocks = [(k // q ** (d - 1 - j)) % q for j in range(d)]
    H = np.stack([fd.decode_indices(b, p, n) for b in blocks], axis=1)
    vals = fd.roots_of_unity(p)[form.evaluate_array(H)]
    for size in range(d):
        for I in map(tuple, combinations(range(d), size)):
            w = rng.uniform(0, 1, q ** len(I)) * np.exp(2j * np.pi * rng.uniform(size=q ** len(I)))
            idx = np.zeros(total, dtype=np.int64)
            for j in I:
                idx = idx * q + blocks[j]
            vals = vals * w[idx]
    lhs = abs(vals.mean())
    rhs = 0.0 if r.infinite else float(r.density) ** (1.0 / 2 ** (d - 1))
    return CheckResult("weighted-multilinear-sum", dict(p=p, n=n, d=d, seed=seed), lhs, rhs, "<=",
                       _le(lhs, rhs), SLACK, total)


def check_partial_derivative_rank(p=5, n=2, seed=0, index=(1, 1, 2), i=1):
    rng = np.random.default_rng(seed)
    V = MultisetIndex(tuple(index))
    s = V.size
    form = _random_form(p, n, s, rng).with_tensor()
    term = MonomialTerm(V, form)
    base = analytic_rank(form)
    dens = Fraction(0)
    for y in fd.all_points(p, n):
        top = monomial_partial_derivative(term, y, i).top
        dens += analytic_rank(top.form).density
    dens /= p ** n
    return CheckResult("partial-derivative-rank", dict(p=p, n=n, seed=seed, index=list(V.entries), i=i),
                       dens, base.density, "=", dens == base.density, 0.0, p ** (n * s))


def check_maximal_monomial_bound(p=5, n=1, d=2, seed=0):
    """``pi = mu_U + lower monomials`` on ``(F_p^n)^d`` with ``U = (1..d)`` maximal."""
    rng = np.random.default_rng(seed)
    U = MultisetIndex(tuple(range(1, d + 1)))
    form_U = MultilinearForm(p, n, d, tensor=rng.integers(0, p, (n,) * d))
    poly = MonomialTerm(U, form_U).to_polynomial(d)
    # lower-order monomials: indices strictly contained in U
    for size in range(1, d):
        for idx in combinations(range(1, d + 1), size):
            f = MultilinearForm(p, n, size, tensor=rng.integers(0, p, (n,) * size))
            poly = poly + MonomialTerm(MultisetIndex(idx), f).to_polynomial(d)
    r = analytic_rank(form_U)
    lhs = abs(phase_table(poly).table.mean())
    rhs = 0.0 if r.infinite else float(r.density) ** (1.0 / 2 ** (d - 1))
    return CheckResult("maximal-monomial-bound", dict(p=p, n=n, d=d, seed=seed), lhs, rhs, "<=", _le(lhs, rhs),
                       SLACK, p ** (n * d))


def check_multilinear_phase_identity(p=5, n=2, d=3, samples=100, seed=0):
    rng = np.random.default_rng(seed)
    form = MultilinearForm(p, n, d, tensor=rng.integers(0, p, (n,) * d))
    A = rng.integers(0, p, (samples, d, n))
    X = rng.integers(0, p, (samples, d, n))
    total = np.zeros(samples, dtype=np.int64)
    for eps in product((0, 1), repeat=d):
        pt = X + np.array(eps)[None, :, None] * A
        total += (-1) ** (d - sum(eps)) * form.evaluate_array(pt)
    bad = int((total % p != form.evaluate_array(A)).sum())
    return CheckResult("multilinear-phase-identity", dict(p=p, n=n, d=d, seed=seed, samples=samples), bad, 0, "=",
                       bad == 0, 0.0, samples * 2 ** d)


def check_box_lower_bound(p=3, n=1, d=2, seed=0):
    rng = np.random.default_rng(seed)
    f = fd.TableFunction.random(p, n * d, rng)
    lhs = abs(f.mean())
    rhs = gowers_norm(f, d).value
    return CheckResult("box-lower-bound", dict(p=p, n=n, d=d, seed=seed), lhs, rhs, "<=", _le(lhs, rhs), SLACK,
                       p ** (n * d * (d + 1)))


# ---------------------------------------------------------------------------
# rank arithmetic
# ---------------------------------------------------------------------------

def _rank_json(r):
    return "inf" if r.infinite else r.rank


def check_rank_subadditivity(p=3, n=2, d=2, seed=0):
    rng = np.random.default_rng(seed)
    d = min(d, p - 1)
    mu, nu = _random_form(p, n, d, rng), _random_form(p, n, d, rng)
    a, b, c = analytic_rank(mu), analytic_rank(nu), analytic_rank(mu + nu)
    # r(mu+nu) <= 2^d (r(mu) + r(nu))  <=>  alpha(mu+nu) >= (alpha(mu) alpha(nu))^(2^d)
    ok = c.density >= (a.density * b.density) ** (2 ** d)
    rhs = 2 ** d * (a.rank + b.rank)
    return CheckResult("rank-subadditivity", dict(p=p, n=n, d=d, seed=seed), c.rank, rhs, "<=", ok, 0.0,
                       3 * p ** (n * (d - 1)))


def check_rank_sum_m(p=3, n=2, d=2, m=3, seed=0):
    rng = np.random.default_rng(seed)
    d = min(d, p - 1)
    forms = [_random_form(p, n, d, rng) for _ in range(m)]
    total = forms[0]
    for f in forms[1:]:
        total = total + f
    rs = [analytic_rank(f) for f in forms]
    rt = analytic_rank(total)
    prod_alpha = math.prod((r.density for r in rs), start=Fraction(1))
    ok = rt.density >= prod_alpha ** ((2 * m) ** d)
    rhs = (2 * m) ** d * sum(r.rank for r in rs)
    return CheckResult("rank-sum-m", dict(p=p, n=n, d=d, m=m, seed=seed), rt.rank, rhs, "<=", ok, 0.0,
                       (m + 1) * p ** (n * (d - 1)))


def random_invertible(rng, m: int, p: int) -> np.ndarray:
    while True:
        B = rng.integers(0, p, (m, m))
        if FpMatrix(B, p).rank == m:
            return B


def check_rank_combination(p=3, n=2, d=2, m=2, seed=0):
    rng = np.random.default_rng(seed)
    d = min(d, p - 1)
    forms = [_random_form(p, n, d, rng) for _ in range(m)]
    B = random_invertible(rng, m, p)
    etas = []
    for j in range(m):
        acc = forms[0].scale(int(B[0, j]))
        for i in range(1, m):
            acc = acc + forms[i].scale(int(B[i, j]))
        etas.append(analytic_rank(acc))
    top = min(analytic_rank(f).density for f in forms)  # highest rank = smallest density
    exponent = (2 * m) ** d
    ok = any(e.density ** exponent <= top for e in etas)
    R = -math.log(top, p) if top else math.inf
    best = max((e.rank for e in etas), default=0.0)
    return CheckResult("rank-combination", dict(p=p, n=n, d=d, m=m, seed=seed), best, R / exponent, ">=", ok, 0.0,
                       2 * m * p ** (n * (d - 1)))


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------

def _system(name: str, p: int) -> LinearSystem:
    if name == "3ap":
        return progression_system(3, p)
    if name == "4ap":
        return progression_system(4, p)
    if name == "xy":
        return LinearSystem.from_rows([(1, 0), (0, 1), (1, 1)], p)
    raise DomainError(f"unknown system {name!r}")


def check_system_phase_bound(system="3ap", p=5, n=2, degrees=(2, 3), seed=0):
    rng = np.random.default_rng(seed)
    S = _system(system, p)
    s, k = min(degrees), max(degrees)
    polys = [random_polynomial(int(rng.integers(s, k + 1)), p, n, rng=rng, exact_degree=True) for _ in range(S.m)]
    ranks = [analytic_rank(derive_multilinear(q)) for q in polys]
    R = min(r.rank for r in ranks)
    avg = system_average([phase_table(q) for q in polys], S)
    lhs = abs(avg.average)
    m, d = S.m, S.d
    rhs = p ** (-R / (2 ** k * (2 * m) ** d))
    indep = degree_independence(S, s).independent
    return CheckResult("system-phase-bound", dict(system=system, p=p, n=n, seed=seed, polys=[str(q) for q in polys]),
                       lhs, rhs, "<=", indep and _le(lhs, rhs), SLACK, avg.cost, {"R": R, "independent": indep})


def check_von_neumann(system="3ap", p=3, n=2, seed=0):
    rng = np.random.default_rng(seed)
    S = _system(system, p)
    k = cs_complexity(S)
    fs = [fd.TableFunction.random(p, n, rng, kind=str(rng.choice(["disc", "real", "sign"]))) for _ in range(S.m)]
    lhs = abs(system_average(fs, S).average)
    sup = [f.linf_norm() for f in fs]
    norms = [gowers_norm(f, k + 1).value for f in fs]
    rhs = min(norms[i] * math.prod(sup[j] for j in range(S.m) if j != i) for i in range(S.m))
    return CheckResult("von-neumann", dict(system=system, p=p, n=n, seed=seed, k=k), lhs, rhs, "<=", _le(lhs, rhs),
                       SLACK, p ** (n * S.d))


def check_offdiag_phase_bound(p=5, n=2, seed=0):
    """4-AP with one cubic phase (the independent position) and quadratics elsewhere."""
    rng = np.random.default_rng(seed)
    S = progression_system(4, p)
    r_pos = int(rng.integers(S.m))
    polys = [random_polynomial(3 if i == r_pos else 2, p, n, rng=rng, exact_degree=True) for i in range(S.m)]
    M = power_coefficient_matrix(S, 3)
    indep = row_independence_certificate(M, r_pos).independent
    R = analytic_rank(derive_multilinear(polys[r_pos])).rank
    k, m, d = 3, S.m, S.d
    avg = system_average([phase_table(q) for q in polys], S)
    lhs = abs(avg.average)
    rhs = p ** (-R / (2 ** k * (2 * m) ** d))
    return CheckResult("offdiag-phase-bound", dict(p=p, n=n, seed=seed, r=r_pos, polys=[str(q) for q in polys]),
                       lhs, rhs, "<=", indep and _le(lhs, rhs), SLACK, avg.cost, {"R": R, "independent": indep})


def check_matrix_certificate(p=5, rows=4, cols=5, trials=20, seed=0):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(trials):
        A = rng.integers(0, p, (rows, cols))
        if rng.random() < 0.3:
            A[rng.integers(rows)] = A[rng.integers(rows)]
        M = FpMatrix(A, p)
        for i in range(rows):
            cert = row_independence_certificate(M, i)
            if not cert.check(M):
                bad += 1
            elif cert.independent and sum(1 for c in cert.column_coefficients if c) > rows:
                bad += 1
    return CheckResult("matrix-certificate", dict(p=p, rows=rows, cols=cols, trials=trials, seed=seed), bad, 0, "=",
                       bad == 0, 0.0, trials * rows)


def check_example_average_one(p=5, n=2, seed=1):
    w = offdiagonal_example(progression_system(4, p), [2, 2, 2, 2], n, seed)
    target = Fraction(1, p ** n)  # ||f_i||_{U^2}^4 = p^{-n}
    norms_ok = all(r.exact_power == target for r in w.norms)
    ok = w.average.exact_average == 1 and norms_ok
    return CheckResult("example-average-one", dict(p=p, n=n, seed=seed), w.average.exact_average, Fraction(1), "=",
                       ok, 0.0, w.average.cost, w.certification())


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

REGISTRY: dict[str, Callable[..., CheckResult]] = {
    "kappa-symmetry": check_kappa_symmetry,
    "kappa-multilinearity": check_kappa_multilinearity,
    "kappa-basepoint": check_kappa_basepoint,
    "phase-unorm-one": check_phase_unorm_one,
    "gauss-quadratic": check_gauss_quadratic,
    "gauss-degree-d": check_gauss_degree_d,
    "unorm-rank-equality": check_unorm_rank_equality,
    "dual-operator-identity": check_dual_operator_identity,
    "rank-gap-filter-bound": check_rank_gap_filter,
    "powers-identity": check_powers_identity,
    "independence-monotone": check_independence_monotone,
    "restriction-rank": check_restriction_rank,
    "weighted-multilinear-sum": check_weighted_multilinear_sum,
    "partial-derivative-rank": check_partial_derivative_rank,
    "maximal-monomial-bound": check_maximal_monomial_bound,
    "multilinear-phase-identity": check_multilinear_phase_identity,
    "box-lower-bound": check_box_lower_bound,
    "rank-subadditivity": check_rank_subadditivity,
    "rank-sum-m": check_rank_sum_m,
    "rank-combination": check_rank_combination,
    "system-phase-bound": check_system_phase_bound,
    "von-neumann": check_von_neumann,
    "offdiag-phase-bound": check_offdiag_phase_bound,
    "matrix-certificate": check_matrix_certificate,
    "example-average-one": check_example_average_one,
}

DESCRIPTIONS = {
    "kappa-symmetry": "kappa(h_1..h_d) is invariant under permuting its arguments",
    "kappa-multilinearity": "kappa is linear in each argument",
    "kappa-basepoint": "sum_eps (-1)^(d-|eps|) pi(x + eps.h) = kappa(h) for every base point x",
    "phase-unorm-one": "||omega^pi||_{U^(k+1)} = 1 for deg pi <= k, and |<f, omega^pi>| <= ||f||_{U^(k+1)}",
    "gauss-quadratic": "|E omega^q|^2 = p^(-r) for a quadratic q of rank r",
    "gauss-degree-d": "|E omega^pi| <= p^(-r/2^(d-1))",
    "unorm-rank-equality": "||omega^pi||_{U^d}^(2^d) = p^(-r)",
    "dual-operator-identity": "<g, omega^pi> = p^r E g D(omega^pi)",
    "rank-gap-filter-bound": "the filtered decomposition keeps ||h''||_2 <= 5 eps and the intermediate bounds",
    "powers-identity": "sum_eps (-1)^(s-|eps|) (eps.a)^s = s! a_1...a_s",
    "independence-monotone": "degree-s independence persists for larger s; tensor and power matrices agree",
    "restriction-rank": "E_y p^(-r(kappa(.., y))) = p^(-r(kappa))",
    "weighted-multilinear-sum": "|E omega^kappa prod_I f_I(x_I)| <= p^(-r/2^(d-1)) over proper subsets I",
    "partial-derivative-rank": "E_y p^(-r(top of partial_y mu_V)) = p^(-r(mu))",
    "maximal-monomial-bound": "|E omega^(mu_U + lower terms)| <= p^(-r(mu_U)/2^(d-1))",
    "multilinear-phase-identity": "sum_eps (-1)^(d-|eps|) kappa(x + eps.a) = kappa(a) with block shifts",
    "box-lower-bound": "|E f| <= ||f||_{U^d} on (F_p^n)^d",
    "rank-subadditivity": "r(mu + nu) <= 2^d (r(mu) + r(nu))",
    "rank-sum-m": "r(kappa_1 + ... + kappa_m) <= (2m)^d (r(kappa_1) + ... + r(kappa_m))",
    "rank-combination": "some eta_j = sum_i b_ij kappa_i has rank >= max_i r(kappa_i)/(2m)^d",
    "system-phase-bound": "|E omega^(sum pi_i(L_i x))| <= p^(-R/(2^k (2m)^d)) for independent systems",
    "von-neumann": "|E prod f_i(L_i x)| <= min_i ||f_i||_{U^(k+1)} prod_(j != i) ||f_j||_inf",
    "offdiag-phase-bound": "the system phase bound with only L_r^(k_r) independent",
    "matrix-certificate": "row independence certificates verify against the matrix",
    "example-average-one": "the power-polynomial witness has product average exactly 1",
}

# checks whose fixtures need p above some degree; suites raise p for them
_MIN_P = {"powers-identity": 5, "partial-derivative-rank": 5, "offdiag-phase-bound": 5,
          "system-phase-bound": 5, "example-average-one": 5, "independence-monotone": 5}

SUITE_PRIMES = (3, 5)


def run_check(check_id: str, params: dict | None = None, seed: int = 0) -> CheckResult:
    if check_id not in REGISTRY:
        raise DomainError(f"unknown check {check_id!r}; known: {', '.join(sorted(REGISTRY))}")
    return REGISTRY[check_id](**{"seed": seed, **(params or {})})


def _takes_p(fn) -> bool:
    return "p" in fn.__code__.co_varnames[: fn.__code__.co_argcount]


def run_suite(name: str = "core", p: int | None = None, seed: int = 0) -> list[CheckResult]:
    """``core`` runs every registered check over ``p`` in {3, 5} (or the given ``p``)."""
    if name != "core":
        raise DomainError(f"unknown suite {name!r}")
    primes = SUITE_PRIMES if p is None else (p,)
    out = []
    for cid, fn in REGISTRY.items():
        if not _takes_p(fn):
            out.append(run_check(cid, {}, seed))
            continue
        done = set()
        for q in primes:
            q = max(q, _MIN_P.get(cid, 2))
            if q not in done:
                done.add(q)
                out.append(run_check(cid, {"p": q}, seed))
    return out
