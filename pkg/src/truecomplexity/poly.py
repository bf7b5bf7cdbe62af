"""Canonical multivariate polynomials over F_p and their phase tables.

Polynomials are treated as functions on F_p^N, so every exponent is reduced
with ``x**p == x``; the canonical term map is then unique per function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import field as fd
from .errors import BudgetError, DomainError, PolynomialSyntaxError, ShapeError

Monomial = tuple[int, ...]

DEFAULT_TERM_CAP = 500_000


def reduce_exponent(e: int, p: int) -> int:
    if e < p:
        return e
    return (e - 1) % (p - 1) + 1


def _monomial_key(exps: Monomial):
    return (-sum(exps), tuple(-e for e in exps))


@lru_cache(maxsize=None)
def _power_table(p: int) -> np.ndarray:
    """``table[v, e] = v**e mod p`` for residues v and exponents e < p."""
    v = np.arange(p, dtype=np.int64)[:, None]
    table = np.ones((p, p), dtype=np.int64)
    for e in range(1, p):
        table[:, e] = table[:, e - 1] * v[:, 0] % p
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class Polynomial:
    """``terms`` holds ``(exponents, coefficient)`` pairs with nonzero
    coefficients, sorted by descending total degree then descending exponents."""

    p: int
    N: int
    terms: tuple[tuple[Monomial, int], ...] = ()
    reduced: bool = field(default=False, compare=False)

    # -- construction ----------------------------------------------------------
    @classmethod
    def from_terms(cls, p: int, N: int, terms: Iterable[tuple[Sequence[int], int]] | Mapping) -> "Polynomial":
        fd.check_prime(p)
        if isinstance(terms, Mapping):
            terms = terms.items()
        acc: dict[Monomial, int] = {}
        reduced = False
        for exps, coeff in terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != N:
                raise ShapeError(f"monomial {exps} has {len(exps)} exponents, expected {N}")
            if any(e < 0 for e in exps):
                raise DomainError(f"negative exponent in {exps}")
            red = tuple(reduce_exponent(e, p) for e in exps)
            reduced |= red != exps
            acc[red] = (acc.get(red, 0) + int(coeff)) % p
        items = sorted(((m, c) for m, c in acc.items() if c), key=lambda mc: _monomial_key(mc[0]))
        return cls(p, N, tuple(items), reduced)

    @classmethod
    def zero(cls, p: int, N: int) -> "Polynomial":
        return cls.from_terms(p, N, [])

    @classmethod
    def constant(cls, c: int, p: int, N: int) -> "Polynomial":
        return cls.from_terms(p, N, [((0,) * N, c)])

    @classmethod
    def variable(cls, i: int, p: int, N: int) -> "Polynomial":
        """The coordinate function ``x_{i+1}`` (``i`` is 0-based)."""
        exps = [0] * N
        exps[i] = 1
        return cls.from_terms(p, N, [(exps, 1)])

    @classmethod
    def linear(cls, coeffs: Sequence[int], p: int) -> "Polynomial":
        N = len(coeffs)
        return cls.from_terms(p, N, [(tuple(int(j == i) for j in range(N)), c) for i, c in enumerate(coeffs)])

    # -- structure -----------------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((sum(m) for m, _ in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict[Monomial, int]:
        return dict(self.terms)

    def coefficient(self, exps: Sequence[int]) -> int:
        return self.as_dict().get(tuple(exps), 0)

    def homogeneous_part(self, deg: int) -> "Polynomial":
        return Polynomial(self.p, self.N, tuple(t for t in self.terms if sum(t[0]) == deg))

    def __str__(self) -> str:
        return format_polynomial(self)

    # -- arithmetic -------------------------------------------------------------------
    def _check(self, other: "Polynomial"):
        if (self.p, self.N) != (other.p, other.N):
            raise ShapeError(f"polynomials over F_{self.p}^{self.N} and F_{other.p}^{other.N}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        return Polynomial.from_terms(self.p, self.N, list(self.terms) + list(other.terms))

    def __neg__(self) -> "Polynomial":
        return self.scale(-1)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def scale(self, c: int) -> "Polynomial":
        return Polynomial.from_terms(self.p, self.N, [(m, a * c) for m, a in self.terms])

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        self._check(other)
        return _multiply(self, other, DEFAULT_TERM_CAP)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Polynomial":
        result = Polynomial.constant(1, self.p, self.N)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # -- evaluation ----------------------------------------------------------------------
    def __call__(self, point: Sequence[int]) -> int:
        return evaluate_polynomial(self, point)

    def evaluate_array(self, points: np.ndarray) -> np.ndarray:
        """Residues at an integer array of points of shape ``(..., N)``."""
        points = np.asarray(points, dtype=np.int64)
        if points.shape[-1] != self.N:
            raise ShapeError(f"points have {points.shape[-1]} coordinates, expected {self.N}")
        pw = _power_table(self.p)
        p = self.p
        out = np.zeros(points.shape[:-1], dtype=np.int64)
        for exps, c in self.terms:
            t = np.full(points.shape[:-1], c, dtype=np.int64)
            for i, e in enumerate(exps):
                if e:
                    t = t * pw[points[..., i] % p, e] % p
            out += t
        return out % p

    def residue_table(self) -> np.ndarray:
        """Values at every point of F_p^N in index order."""
        size = fd.check_budget(self.p ** self.N, "polynomial table")
        out = np.empty(size, dtype=np.int64)

        def work(a, b):
            out[a:b] = self.evaluate_array(fd.decode_indices(np.arange(a, b), self.p, self.N))

        fd.map_reduce(work, size)
        return out


def _multiply(a: Polynomial, b: Polynomial, term_cap: int) -> Polynomial:
    p = a.p
    acc: dict[Monomial, int] = {}
    for ma, ca in a.terms:
        for mb, cb in b.terms:
            m = tuple(reduce_exponent(x + y, p) for x, y in zip(ma, mb))
            acc[m] = (acc.get(m, 0) + ca * cb) % p
        if len(acc) > term_cap:
            raise BudgetError("polynomial expansion term count", len(acc), term_cap)
    return Polynomial.from_terms(p, a.N, acc)


def evaluate_polynomial(poly: Polynomial, x: Sequence[int]) -> int:
    if len(x) != poly.N:
        raise ShapeError(f"point has {len(x)} coordinates, expected {poly.N}")
    p = poly.p
    total = 0
    for exps, c in poly.terms:
        t = c
        for xi, e in zip(x, exps):
            if e:
                t = t * pow(int(xi), e, p) % p
        total += t
    return total % p


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"(\d+)|x(\d+)|(\^)|(\*)|(\+)|(-)")


def parse_polynomial(text: str, p: int, N: int) -> Polynomial:
    """Parse ``"x1^2 + 2*x2"``-style text.  Variables are 1-based.

    The result's ``reduced`` flag is set when ``x**p -> x`` changed a
    nominal exponent.
    """
    fd.check_prime(p)
    tokens = []
    pos = 0
    text_len = len(text)
    while True:
        while pos < text_len and text[pos].isspace():
            pos += 1
        if pos == text_len:
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PolynomialSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start()
        kind = ("num", "var", "^", "*", "+", "-")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", text_len))

    i = 0
    terms: list[tuple[list[int], int]] = []

    def peek():
        return tokens[i]

    def expect(kind):
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind:
            raise PolynomialSyntaxError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        i += 1
        return tok

    def parse_factor(exps, coeff):
        nonlocal i
        kind, val, at = peek()
        if kind == "num":
            i += 1
            return exps, coeff * int(val)
        if kind == "var":
            i += 1
            idx = int(val)
            if not 1 <= idx <= N:
                raise PolynomialSyntaxError(f"variable x{idx} outside x1..x{N}", at)
            e = 1
            if peek()[0] == "^":
                i += 1
                e = int(expect("num")[1])
            exps[idx - 1] += e
            return exps, coeff
        raise PolynomialSyntaxError(f"expected a coefficient or variable, found {val or 'end of input'!r}", at)

    if peek()[0] == "end":
        raise PolynomialSyntaxError("empty polynomial", 0)
    sign = 1
    if peek()[0] in "+-":
        sign = -1 if peek()[0] == "-" else 1
        i += 1
    while True:
        exps, coeff = parse_factor([0] * N, sign)
        while peek()[0] == "*":
            i += 1
            exps, coeff = parse_factor(exps, coeff)
        terms.append((exps, coeff))
        kind, val, at = peek()
        if kind == "end":
            break
        if kind not in "+-":
            raise PolynomialSyntaxError(f"expected '+' or '-', found {val!r}", at)
        sign = -1 if kind == "-" else 1
        i += 1
    poly = Polynomial.from_terms(p, N, [(tuple(e), c) for e, c in terms])
    return poly


def format_polynomial(poly: Polynomial) -> str:
    if poly.is_zero():
        return "0"
    parts = []
    for exps, c in poly.terms:
        factors = [f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(exps) if e]
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append("*".join([str(c)] + factors))
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# composition with linear forms
# ---------------------------------------------------------------------------

def substitute(poly: Polynomial, images: Sequence[Polynomial], term_cap: int = DEFAULT_TERM_CAP) -> Polynomial:
    """``poly(images[0], ..., images[N-1])`` as a polynomial in the images' variables."""
    if len(images) != poly.N:
        raise ShapeError(f"{len(images)} images for {poly.N} variables")
    if not images:
        return poly
    p, M = images[0].p, images[0].N
    powers: dict[tuple[int, int], Polynomial] = {}

    def power(i, e):
        key = (i, e)
        if key not in powers:
            powers[key] = Polynomial.constant(1, p, M) if e == 0 else _multiply(power(i, e - 1), images[i], term_cap)
        return powers[key]

    acc: dict[Monomial, int] = {}
    for exps, c in poly.terms:
        t = Polynomial.constant(c, p, M)
        for i, e in enumerate(exps):
            if e:
                t = _multiply(t, power(i, e), term_cap)
        for m, a in t.terms:
            acc[m] = (acc.get(m, 0) + a) % p
        if len(acc) > term_cap:
            raise BudgetError("polynomial expansion term count", len(acc), term_cap)
    return Polynomial.from_terms(p, M, acc)


def compose_with_form(poly: Polynomial, coeffs: Sequence[int], term_cap: int = DEFAULT_TERM_CAP) -> Polynomial:
    """``(x_1, ..., x_d) -> poly(sum_u c_u x_u)`` for blocks ``x_u`` in F_p^n.

    Output variable ``u*n + i`` (0-based) is coordinate ``i`` of block ``u``,
    which matches the row-major encoding of ``(F_p^n)^d`` as ``F_p^{nd}``.
    """
    p, n, d = poly.p, poly.N, len(coeffs)
    M = n * d
    images = []
    for i in range(n):
        lin = [0] * M
        for u, c in enumerate(coeffs):
            lin[u * n + i] = int(c) % p
        images.append(Polynomial.linear(lin, p))
    return substitute(poly, images, term_cap)


# ---------------------------------------------------------------------------
# phases and random fixtures
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PhaseFunction:
    """``omega**base(x)`` with the residue table kept alongside for exact work."""

    base: Polynomial
    residues: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.residues, dtype=np.int64).ravel() % self.base.p
        if r.shape[0] != self.base.p ** self.base.N:
            raise ShapeError("residue table does not cover the domain")
        r.setflags(write=False)
        object.__setattr__(self, "residues", r)

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def N(self) -> int:
        return self.base.N

    @property
    def table(self) -> fd.TableFunction:
        return fd.TableFunction(self.p, self.N, fd.roots_of_unity(self.p)[self.residues])

    def consistent(self, rng: np.random.Generator | None = None, samples: int = 16) -> bool:
        rng = rng or np.random.default_rng(0)
        idx = rng.integers(0, self.residues.shape[0], samples)
        pts = fd.decode_indices(idx, self.p, self.N)
        return bool(np.array_equal(self.base.evaluate_array(pts), self.residues[idx]))


def phase_table(poly: Polynomial) -> PhaseFunction:
    return PhaseFunction(poly, poly.residue_table())


def monomials_up_to(d: int, p: int, N: int) -> list[Monomial]:
    """Exponent vectors with entries ``<= p-1`` and total degree ``<= d``,
    ordered by total degree then reverse-lexicographically."""
    out = [m for m in product(range(min(d, p - 1) + 1), repeat=N) if sum(m) <= d]
    out.sort(key=lambda m: (sum(m), tuple(-e for e in m)))
    return out


def random_polynomial(d: int, p: int, N: int, seed=None, *, rng: np.random.Generator | None = None,
                      exact_degree: bool = False, homogeneous: bool = False) -> Polynomial:
    """Uniform coefficients on every monomial of degree ``<= d``.

    ``exact_degree`` redraws until the degree is exactly ``d``;
    ``homogeneous`` keeps only monomials of degree ``d``.
    """
    fd.check_prime(p)
    if d > N * (p - 1):
        raise DomainError(f"degree {d} exceeds N(p-1) = {N * (p - 1)}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    monos = monomials_up_to(d, p, N)
    if homogeneous:
        monos = [m for m in monos if sum(m) == d]
    while True:
        coeffs = rng.integers(0, p, len(monos))
        poly = Polynomial.from_terms(p, N, zip(monos, (int(c) for c in coeffs)))
        if not exact_degree or poly.degree == d:
            return poly
