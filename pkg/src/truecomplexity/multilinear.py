"""Symmetric multilinear forms derived from polynomials, analytic rank, and
multiset-indexed monomials on product domains ``(F_p^n)^d``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, permutations, product
from typing import Sequence

import numpy as np

from . import field as fd
from .errors import DomainError, ShapeError, UnsupportedCharacteristicError
from .poly import Polynomial


def _subset_indices(idx: Sequence[np.ndarray], add: np.ndarray) -> list[np.ndarray]:
    """Index of ``sum_{j in eps} h_j`` for every ``eps`` in {0,1}^d.

    ``eps`` is encoded as a bitmask with bit ``j`` standing for ``h_j``.
    """
    d = len(idx)
    out = [np.zeros_like(idx[0])]
    for j in range(d):
        out += [add[s, idx[j]] for s in out]
    return out


@dataclass(frozen=True, eq=False)
class MultilinearForm:
    """A d-linear form on F_p^n.

    Built either from a polynomial (``source``), in which case values come
    from the alternating 2^d-term sum, or from an explicit coefficient tensor
    of shape ``(n,) * d``.
    """

    p: int
    n: int
    d: int
    source: Polynomial | None = None
    tensor: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.source is None and self.tensor is None:
            raise DomainError("a multilinear form needs a source polynomial or a tensor")
        if self.tensor is not None:
            t = np.asarray(self.tensor, dtype=np.int64) % self.p
            if t.shape != (self.n,) * self.d:
                raise ShapeError(f"tensor shape {t.shape} does not match n={self.n}, d={self.d}")
            t.setflags(write=False)
            object.__setattr__(self, "tensor", t)

    @classmethod
    def from_tensor(cls, tensor, p: int) -> "MultilinearForm":
        t = np.asarray(tensor, dtype=np.int64)
        n = t.shape[0] if t.ndim else 1
        return cls(p, n, t.ndim, tensor=t)

    # -- evaluation ----------------------------------------------------------------
    def evaluate(self, hs: Sequence[Sequence[int]]) -> int:
        H = np.asarray(hs, dtype=np.int64).reshape(self.d, self.n)
        return int(self.evaluate_array(H[None])[0])

    __call__ = evaluate

    def evaluate_array(self, H: np.ndarray) -> np.ndarray:
        """Values at an array of argument tuples of shape ``(..., d, n)``."""
        H = np.asarray(H, dtype=np.int64) % self.p
        if H.shape[-2:] != (self.d, self.n):
            raise ShapeError(f"arguments of shape {H.shape[-2:]}, expected {(self.d, self.n)}")
        if self.source is not None:
            return self._eval_source(H)
        out = np.broadcast_to(self.tensor, H.shape[:-2] + self.tensor.shape).copy()
        batch = H.shape[:-2]
        for j in range(self.d - 1, -1, -1):
            out = (out * H[..., j, :].reshape(batch + (1,) * j + (self.n,))).sum(-1) % self.p
        return out

    def _eval_source(self, H: np.ndarray) -> np.ndarray:
        p, d = self.p, self.d
        total = np.zeros(H.shape[:-2], dtype=np.int64)
        for eps in range(1 << d):
            bits = [(eps >> j) & 1 for j in range(d)]
            pt = np.zeros(H.shape[:-2] + (self.n,), dtype=np.int64)
            for j, b in enumerate(bits):
                if b:
                    pt = pt + H[..., j, :]
            sign = -1 if (d - sum(bits)) % 2 else 1
            total += sign * self.source.evaluate_array(pt % p)
        return total % p

    def dense(self) -> np.ndarray:
        """Coefficient tensor ``T[i_1..i_d] = kappa(e_{i_1}, ..., e_{i_d})``."""
        if self.tensor is None:
            fd.check_budget(self.n ** self.d * 2 ** self.d, "dense multilinear tensor")
            eye = np.eye(self.n, dtype=np.int64)
            grid = np.array(list(product(range(self.n), repeat=self.d)), dtype=np.int64).reshape(-1, self.d)
            H = eye[grid]
            vals = self._eval_source(H).reshape((self.n,) * self.d)
            vals.setflags(write=False)
            object.__setattr__(self, "tensor", vals)
        return self.tensor

    def with_tensor(self) -> "MultilinearForm":
        return MultilinearForm(self.p, self.n, self.d, tensor=self.dense())

    def is_zero(self) -> bool:
        return not self.dense().any()

    # -- algebra -----------------------------------------------------------------------
    def scale(self, c: int) -> "MultilinearForm":
        return MultilinearForm(self.p, self.n, self.d, tensor=self.dense() * (c % self.p))

    def __add__(self, other: "MultilinearForm") -> "MultilinearForm":
        if (self.p, self.n, self.d) != (other.p, other.n, other.d):
            raise ShapeError("forms of different shapes")
        return MultilinearForm(self.p, self.n, self.d, tensor=self.dense() + other.dense())

    def fix_slots(self, slots: Sequence[int], y: Sequence[int]) -> "MultilinearForm":
        """Substitute the point ``y`` into the given (0-based) argument slots."""
        t = self.dense()
        y = np.asarray(y, dtype=np.int64) % self.p
        for s in sorted(slots, reverse=True):
            t = np.moveaxis(t, s, -1) @ y % self.p
            # moveaxis followed by contraction keeps the other slots in order
        return MultilinearForm(self.p, self.n, self.d - len(slots), tensor=t)

    def restrict(self, y: Sequence[int]) -> "MultilinearForm":
        """``kappa(., ..., ., y)``: the last argument fixed to ``y``."""
        return self.fix_slots([self.d - 1], y)

    def is_symmetric(self) -> bool:
        t = self.dense()
        return all(np.array_equal(t, np.transpose(t, perm)) for perm in permutations(range(self.d)))


def derive_multilinear(poly: Polynomial, d: int | None = None, *, allow_small_p: bool = False) -> MultilinearForm:
    """The symmetric d-linear form of a polynomial of degree at most ``d``.

    ``d`` defaults to the degree.  Terms of lower degree vanish under d-fold
    differencing, so a zero polynomial with explicit ``d`` gives the zero form.
    The differencing identity holds in every characteristic, but the link
    between kappa and the top-degree coefficients needs ``d < p``; pass
    ``allow_small_p`` to work with ``d >= p`` anyway.
    """
    if d is None:
        d = poly.degree
    if d < 1:
        raise DomainError("derived forms need degree d >= 1")
    if poly.degree > d:
        raise DomainError(f"polynomial of degree {poly.degree} has no {d}-linear derived form")
    if d >= poly.p and not allow_small_p:
        raise UnsupportedCharacteristicError(f"degree {d} requires p > {d}, got p={poly.p}")
    return MultilinearForm(poly.p, poly.N, d, source=poly)


# ---------------------------------------------------------------------------
# analytic rank
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankValue:
    """Rank stored exactly as a kernel count over ``p**(n(d-1))`` tuples."""

    kernel_count: int
    domain_size: int
    p: int
    is_exact: bool = True

    @property
    def density(self) -> Fraction:
        return Fraction(self.kernel_count, self.domain_size)

    @property
    def infinite(self) -> bool:
        return self.kernel_count == 0

    @property
    def rank(self) -> float:
        if self.infinite:
            return math.inf
        ratio = self.domain_size / self.kernel_count
        k = round(math.log(ratio, self.p))
        if Fraction(self.domain_size, self.kernel_count) == Fraction(self.p) ** k:
            return float(k)
        return math.log(ratio, self.p)

    def __float__(self) -> float:
        return self.rank


def _column_vectors(cols: np.ndarray, p: int, n: int, k: int) -> np.ndarray:
    """Tensor products ``h_1 (x) ... (x) h_k`` for encoded k-tuples of points."""
    q = p ** n
    w = np.ones((cols.shape[0], 1), dtype=np.int64)
    for j in range(k):
        idx = (cols // q ** (k - 1 - j)) % q
        h = fd.decode_indices(idx, p, n)
        w = (w[:, :, None] * h[:, None, :]).reshape(cols.shape[0], -1) % p
    return w


def kernel_mask(form: MultilinearForm) -> np.ndarray:
    """For every encoded ``(h_2, ..., h_d)`` whether ``kappa(., h_2, ..., h_d) == 0``.

    Index order has ``h_d`` least significant.
    """
    p, n, d = form.p, form.n, form.d
    if d == 1:
        return np.array([not form.dense().any()])
    total = fd.check_budget(p ** (n * (d - 1)), "kernel enumeration")
    fd.check_budget(total * n, "kernel enumeration")
    R = form.dense().reshape(n, -1)
    mask = np.empty(total, dtype=bool)

    def work(a, b):
        w = _column_vectors(np.arange(a, b), p, n, d - 1)
        mask[a:b] = ~((R @ w.T) % p).any(axis=0)

    fd.map_reduce(work, total, max(1, fd.CHUNK // max(1, n ** (d - 1))))
    return mask


def form_residue_counter(form: MultilinearForm) -> fd.ResidueCounter:
    """Residue counts of ``kappa`` over all ``p**(nd)`` argument tuples."""
    p, n, d = form.p, form.n, form.d
    q = p ** n
    total = fd.check_budget(q ** d, "form expectation")
    if form.source is not None:
        table = form.source.residue_table()
        add = fd.addition_table(p, n)
        signs = [-1 if (d - bin(e).count("1")) % 2 else 1 for e in range(1 << d)]

        def work(a, b):
            k = np.arange(a, b, dtype=np.int64)
            idx = [(k // q ** (d - 1 - j)) % q for j in range(d)]
            vals = np.zeros(b - a, dtype=np.int64)
            for s, sub in zip(signs, _subset_indices(idx, add)):
                vals += s * table[sub]
            return fd.ResidueCounter.from_residues(vals % p, p)
    else:
        T = form.dense().reshape(n, -1)

        def work(a, b):
            k = np.arange(a, b, dtype=np.int64)
            h1 = fd.decode_indices(k // q ** (d - 1), p, n)
            w = _column_vectors(k % q ** (d - 1), p, n, d - 1)
            vals = np.einsum("bi,ij,bj->b", h1, T, w) % p
            return fd.ResidueCounter.from_residues(vals, p)

    return fd.sum_counters(fd.map_reduce(work, total), p)


def analytic_rank(form: MultilinearForm, backend: str = "kernel") -> RankValue:
    """``-log_p E omega^kappa`` computed as an exact kernel count.

    ``backend`` is ``"kernel"`` (test each ``(h_2..h_d)`` against the basis),
    ``"expectation"`` (exact residue count over all tuples) or ``"both"``,
    which computes both and insists they agree.
    """
    p, n, d = form.p, form.n, form.d
    domain = p ** (n * (d - 1))
    if backend not in ("kernel", "expectation", "both"):
        raise DomainError(f"unknown rank backend {backend!r}")
    results = []
    if backend in ("kernel", "both"):
        results.append(int(kernel_mask(form).sum()))
    if backend in ("expectation", "both"):
        s = form_residue_counter(form).exact_sum()
        # E omega^kappa is the kernel density, hence a nonnegative rational
        if s is None or s.numerator % p ** n:
            raise AssertionError("expectation of a multilinear phase is not a kernel density")
        results.append(int(s) // p ** n)
    if len(set(results)) != 1:
        raise AssertionError(f"rank backends disagree: {results}")
    return RankValue(results[0], domain, p)


def polynomial_rank(poly: Polynomial, d: int | None = None, *, allow_small_p: bool = False,
                    backend: str = "kernel") -> RankValue:
    return analytic_rank(derive_multilinear(poly, d, allow_small_p=allow_small_p), backend)


@dataclass(frozen=True)
class RestrictionProfile:
    ranks: tuple[RankValue, ...]
    full: RankValue

    def mean_density(self) -> Fraction:
        return sum((r.density for r in self.ranks), Fraction(0)) / len(self.ranks)

    def identity_holds(self) -> bool:
        return self.mean_density() == self.full.density


def restricted_rank_profile(form: MultilinearForm) -> RestrictionProfile:
    """Rank of ``kappa(., ..., ., y)`` for every ``y`` in F_p^n (index order)."""
    p, n, d = form.p, form.n, form.d
    if d < 2:
        raise DomainError("restrictions need d >= 2")
    mask = kernel_mask(form)
    q = p ** n
    per_y = mask.reshape(-1, q).sum(axis=0)
    sub_domain = p ** (n * (d - 2))
    ranks = tuple(RankValue(int(c), sub_domain, p) for c in per_y)
    return RestrictionProfile(ranks, RankValue(int(mask.sum()), p ** (n * (d - 1)), p))


# ---------------------------------------------------------------------------
# multiset indices and monomials on (F_p^n)^d
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class MultisetIndex:
    """A nondecreasing tuple over ``1..d``."""

    entries: tuple[int, ...]

    def __post_init__(self):
        e = tuple(sorted(int(i) for i in self.entries))
        if any(i < 1 for i in e):
            raise DomainError("multiset entries are 1-based")
        object.__setattr__(self, "entries", e)

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.entries)))

    def multiplicity(self, j: int) -> int:
        return self.entries.count(j)

    @property
    def multiplicities(self) -> dict[int, int]:
        return {j: self.multiplicity(j) for j in self.support}

    def without(self, i: int) -> "MultisetIndex":
        e = list(self.entries)
        if i in e:
            e.remove(i)
        return MultisetIndex(tuple(e))

    def is_subset(self, other: "MultisetIndex") -> bool:
        return all(self.multiplicity(j) <= other.multiplicity(j) for j in self.support)

    def orderings(self) -> list[tuple[int, ...]]:
        """All tuples whose sorted form is this multiset."""
        return sorted(set(permutations(self.entries)))

    def multinomial(self) -> int:
        out = math.factorial(self.size)
        for m in self.multiplicities.values():
            out //= math.factorial(m)
        return out


def all_multisets(d: int, s: int) -> list[MultisetIndex]:
    """Size-``s`` multisets of ``1..d`` in lexicographic order."""
    return [MultisetIndex(c) for c in combinations_with_replacement(range(1, d + 1), s)]


@dataclass(frozen=True, eq=False)
class MonomialTerm:
    """``x -> form(x_{i_1}, ..., x_{i_s})`` for ``x`` in ``(F_p^n)^d``."""

    index: MultisetIndex
    form: MultilinearForm

    def __post_init__(self):
        if self.form.d != self.index.size:
            raise ShapeError(f"form arity {self.form.d} differs from index size {self.index.size}")

    def evaluate(self, xs: Sequence[Sequence[int]]) -> int:
        if self.index.size == 0:
            return int(self.form.dense()) % self.form.p
        return self.form.evaluate([xs[i - 1] for i in self.index.entries])

    def to_polynomial(self, d: int) -> Polynomial:
        """Expand into a polynomial in ``n*d`` variables (block-major)."""
        p, n = self.form.p, self.form.n
        T = self.form.dense()
        terms = []
        for coords in product(range(n), repeat=self.index.size):
            c = int(T[coords]) if self.index.size else int(T)
            if not c:
                continue
            exps = [0] * (n * d)
            for blk, a in zip(self.index.entries, coords):
                exps[(blk - 1) * n + a] += 1
            terms.append((exps, c))
        return Polynomial.from_terms(p, n * d, terms)


@dataclass(frozen=True)
class MonomialSum:
    terms: tuple[MonomialTerm, ...]
    p: int
    top: MonomialTerm | None = None

    def evaluate(self, xs) -> int:
        return sum(t.evaluate(xs) for t in self.terms) % self.p

    def to_polynomial(self, d: int, n: int) -> Polynomial:
        out = Polynomial.zero(self.p, n * d)
        for t in self.terms:
            out = out + t.to_polynomial(d)
        return out


def monomial_partial_derivative(term: MonomialTerm, y: Sequence[int], i: int) -> MonomialSum:
    """Expand ``mu(x) - mu(x - y e_i)`` by multilinearity.

    If ``i`` has multiplicity ``t`` in the index, fixing ``j`` of its slots to
    ``y`` contributes ``-(-1)**j * C(t, j) * kappa(..., y^j)`` with index
    ``V`` minus ``j`` copies of ``i``.  ``top`` is the ``j = 1`` term,
    ``t * kappa(..., y)``.
    """
    p = term.form.p
    V = term.index
    t = V.multiplicity(i)
    if t == 0:
        return MonomialSum((), p, None)
    first = V.entries.index(i)
    terms = []
    top = None
    for j in range(1, t + 1):
        slots = list(range(first + t - j, first + t))
        coeff = -((-1) ** j) * math.comb(t, j)
        form = term.form.fix_slots(slots, y).scale(coeff)
        W = V
        for _ in range(j):
            W = W.without(i)
        mt = MonomialTerm(W, form)
        terms.append(mt)
        if j == 1:
            top = mt
    return MonomialSum(tuple(terms), p, top)


# ---------------------------------------------------------------------------
# the dual operator D_{2^d - 1} applied to a polynomial phase
# ---------------------------------------------------------------------------

def dual_operator(poly: Polynomial, d: int | None = None) -> fd.TableFunction:
    """``x -> E_y prod_{eps != 0} C^{|eps|} omega^{poly(x + eps.y)}``, ``y`` in (F_p^n)^d."""
    p, n = poly.p, poly.N
    d = poly.degree if d is None else d
    q = p ** n
    total = q ** d
    fd.check_budget(total * q * (1 << d), "dual operator")
    table = poly.residue_table()
    add = fd.addition_table(p, n)
    xs = np.arange(q)
    signs = [(-1) ** bin(e).count("1") for e in range(1 << d)]

    def work(a, b):
        k = np.arange(a, b, dtype=np.int64)
        idx = [(k // q ** (d - 1 - j)) % q for j in range(d)]
        subs = _subset_indices(idx, add)
        expo = np.zeros((q, b - a), dtype=np.int64)
        for s, sub in zip(signs[1:], subs[1:]):
            expo += s * table[add[xs[:, None], sub[None, :]]]
        expo %= p
        return np.stack([(expo == j).sum(axis=1) for j in range(p)], axis=1)

    counts = sum(fd.map_reduce(work, total, max(1, fd.CHUNK // q)))
    values = counts.astype(float) @ fd.roots_of_unity(p) / total
    return fd.TableFunction(p, n, values)
