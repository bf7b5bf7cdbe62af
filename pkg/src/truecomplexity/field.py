"""Arithmetic in F_p, index encoding of F_p^N, and dense function tables.

Points of F_p^N are encoded row-major in base p: coordinate 0 is the most
significant digit, so ``(c_0, ..., c_{N-1}) -> sum_j c_j * p**(N-1-j)``.
Every table, golden value and enumeration in the package depends on this.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import BudgetError, DomainError, ShapeError

DEFAULT_BUDGET = 200_000_000
CHUNK = 1 << 15


@dataclass
class _Settings:
    budget: int = int(os.environ.get("TRUECX_BUDGET", DEFAULT_BUDGET))
    threads: int = int(os.environ.get("TRUECX_THREADS", os.cpu_count() or 1))


settings = _Settings()


def check_budget(cost: int, what: str) -> int:
    """Raise BudgetError if ``cost`` exceeds the configured cap; return cost."""
    if cost > settings.budget:
        raise BudgetError(what, cost, settings.budget)
    return cost


@contextmanager
def budget_limit(cap: int):
    old = settings.budget
    settings.budget = int(cap)
    try:
        yield
    finally:
        settings.budget = old


@contextmanager
def thread_count(n: int):
    old = settings.threads
    settings.threads = max(1, int(n))
    try:
        yield
    finally:
        settings.threads = old


def chunk_ranges(total: int, size: int = CHUNK) -> Iterator[tuple[int, int]]:
    for start in range(0, total, size):
        yield start, min(total, start + size)


def map_reduce(func: Callable[[int, int], object], total: int, size: int = CHUNK) -> list:
    """Apply ``func(start, stop)`` to fixed-size index ranges of ``[0, total)``.

    Chunk boundaries do not depend on the thread count and results come back
    in range order, so any reduction over the returned list is deterministic.
    """
    ranges = list(chunk_ranges(total, size))
    if settings.threads <= 1 or len(ranges) <= 1:
        return [func(a, b) for a, b in ranges]
    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        return list(pool.map(lambda r: func(*r), ranges))


# ---------------------------------------------------------------------------
# primes and residues
# ---------------------------------------------------------------------------

def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    # deterministic Miller-Rabin for 64-bit inputs
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if a % p == 0:
            continue
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise DomainError(f"p={p!r} is not a prime")
    return int(p)


@lru_cache(maxsize=None)
def roots_of_unity(p: int) -> np.ndarray:
    """Read-only table ``omega**j = exp(2*pi*i*j/p)`` for ``0 <= j < p``."""
    check_prime(p)
    j = np.arange(p)
    table = np.exp(2j * np.pi * j / p)
    table[0] = 1.0
    table.setflags(write=False)
    return table


def root_of_unity(j: int, p: int) -> complex:
    check_prime(p)
    if not 0 <= j < p:
        raise DomainError(f"residue {j} outside [0, {p})")
    return complex(roots_of_unity(p)[j])


def inverse_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, p - 2, p)


# ---------------------------------------------------------------------------
# index encoding
# ---------------------------------------------------------------------------

def domain_size(p: int, N: int) -> int:
    return p ** N


def _place_values(p: int, N: int) -> np.ndarray:
    return p ** np.arange(N - 1, -1, -1, dtype=np.int64)


def encode_index(point: Sequence[int], p: int, N: int) -> int:
    if len(point) != N:
        raise ShapeError(f"point has {len(point)} coordinates, expected {N}")
    idx = 0
    for c in point:
        c = int(c)
        if not 0 <= c < p:
            raise DomainError(f"coordinate {c} outside [0, {p})")
        idx = idx * p + c
    return idx


def decode_index(index: int, p: int, N: int) -> tuple[int, ...]:
    if not 0 <= index < p ** N:
        raise DomainError(f"index {index} outside [0, {p}^{N})")
    coords = []
    for _ in range(N):
        index, c = divmod(index, p)
        coords.append(c)
    return tuple(reversed(coords))


def decode_indices(indices: np.ndarray, p: int, N: int) -> np.ndarray:
    """Vectorised decode: integer array of shape (...) -> digits (..., N)."""
    indices = np.asarray(indices, dtype=np.int64)
    return (indices[..., None] // _place_values(p, N)) % p


def encode_points(points: np.ndarray, p: int) -> np.ndarray:
    points = np.asarray(points, dtype=np.int64)
    return points @ _place_values(p, points.shape[-1])


def all_points(p: int, N: int) -> np.ndarray:
    check_budget(p ** N * max(N, 1), f"materialise F_{p}^{N}")
    return decode_indices(np.arange(p ** N), p, N)


@lru_cache(maxsize=32)
def addition_table(p: int, N: int) -> np.ndarray:
    """``table[a, b]`` is the index of ``decode(a) + decode(b)``."""
    size = p ** N
    check_budget(size * size, f"addition table for F_{p}^{N}")
    pts = all_points(p, N)
    table = encode_points((pts[:, None, :] + pts[None, :, :]) % p, p)
    table = table.astype(np.int32 if size < 2**31 else np.int64)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=32)
def scaling_table(p: int, N: int) -> np.ndarray:
    """``table[c, a]`` is the index of ``c * decode(a)``."""
    pts = all_points(p, N)
    table = np.stack([encode_points((c * pts) % p, p) for c in range(p)])
    table.setflags(write=False)
    return table


@lru_cache(maxsize=32)
def negation_table(p: int, N: int) -> np.ndarray:
    return scaling_table(p, N)[p - 1]


# ---------------------------------------------------------------------------
# exact counting of sums of roots of unity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidueCounter:
    """``counts[j]`` = number of enumerated points where an F_p-valued
    expression equals ``j``.  Represents ``sum_x omega**expr(x)`` exactly."""

    counts: tuple[int, ...]

    @classmethod
    def zeros(cls, p: int) -> "ResidueCounter":
        return cls((0,) * p)

    @classmethod
    def from_residues(cls, residues: np.ndarray, p: int) -> "ResidueCounter":
        residues = np.asarray(residues).ravel()
        counts = np.bincount(residues.astype(np.int64) % p, minlength=p)
        return cls(tuple(int(c) for c in counts))

    @classmethod
    def from_array(cls, counts) -> "ResidueCounter":
        return cls(tuple(int(c) for c in counts))

    @property
    def p(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __add__(self, other: "ResidueCounter") -> "ResidueCounter":
        if self.p != other.p:
            raise ShapeError("counters over different primes")
        return ResidueCounter(tuple(a + b for a, b in zip(self.counts, other.counts)))

    def is_rational(self) -> bool:
        # 1 + w + ... + w^(p-1) = 0 is the only rational relation among powers of w
        return len(set(self.counts[1:])) <= 1

    def exact_sum(self) -> Fraction | None:
        if not self.is_rational():
            return None
        rest = self.counts[1] if self.p > 1 else 0
        return Fraction(self.counts[0] - rest)

    def exact_mean(self) -> Fraction | None:
        s = self.exact_sum()
        if s is None:
            return None
        return s / self.total

    def sum(self) -> complex:
        return complex(np.dot(np.array(self.counts, dtype=float), roots_of_unity(self.p)))

    def mean(self) -> complex:
        exact = self.exact_mean()
        if exact is not None:
            return complex(float(exact), 0.0)
        return self.sum() / self.total


def sum_counters(counters: Sequence[ResidueCounter], p: int) -> ResidueCounter:
    acc = np.zeros(p, dtype=object)
    for c in counters:
        acc += np.array(c.counts, dtype=object)
    return ResidueCounter.from_array(acc)


# ---------------------------------------------------------------------------
# dense tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TableFunction:
    """A complex-valued function on F_p^N stored densely in index order."""

    p: int
    N: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_prime(self.p)
        vals = np.array(self.values, dtype=np.complex128).ravel()
        if vals.shape[0] != self.p ** self.N:
            raise ShapeError(f"table of length {vals.shape[0]} on F_{self.p}^{self.N}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("table contains NaN or infinite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, p: int, N: int, c: complex = 1.0) -> "TableFunction":
        return cls(p, N, np.full(p ** N, c, dtype=np.complex128))

    @classmethod
    def zeros(cls, p: int, N: int) -> "TableFunction":
        return cls.constant(p, N, 0.0)

    @classmethod
    def from_callable(cls, p: int, N: int, fn: Callable[[tuple[int, ...]], complex]) -> "TableFunction":
        pts = all_points(p, N)
        return cls(p, N, [fn(tuple(int(c) for c in pt)) for pt in pts])

    @classmethod
    def random(cls, p: int, N: int, rng: np.random.Generator, kind: str = "disc") -> "TableFunction":
        """Random table with ``|f| <= 1``: ``disc`` (complex), ``real`` in [-1,1] or ``sign`` (+-1)."""
        size = p ** N
        if kind == "disc":
            r = np.sqrt(rng.random(size))
            vals = r * np.exp(2j * np.pi * rng.random(size))
        elif kind == "real":
            vals = rng.uniform(-1.0, 1.0, size)
        elif kind == "sign":
            vals = rng.choice([-1.0, 1.0], size)
        else:
            raise DomainError(f"unknown random table kind {kind!r}")
        return cls(p, N, vals)

    # -- structure ------------------------------------------------------------
    @property
    def size(self) -> int:
        return self.values.shape[0]

    def same_domain(self, other: "TableFunction") -> None:
        if (self.p, self.N) != (other.p, other.N):
            raise ShapeError(f"F_{self.p}^{self.N} vs F_{other.p}^{other.N}")

    def grid(self) -> np.ndarray:
        return self.values.reshape((self.p,) * self.N)

    def __call__(self, point: Sequence[int]) -> complex:
        return complex(self.values[encode_index(point, self.p, self.N)])

    def shifted(self, h: Sequence[int]) -> "TableFunction":
        """The function ``x -> f(x + h)``."""
        h_idx = encode_index(h, self.p, self.N)
        return TableFunction(self.p, self.N, self.values[addition_table(self.p, self.N)[:, h_idx]])

    # -- arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, TableFunction):
            self.same_domain(other)
            return other.values
        return np.complex128(other)

    def __add__(self, other):
        return TableFunction(self.p, self.N, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return TableFunction(self.p, self.N, self.values - self._coerce(other))

    def __rsub__(self, other):
        return TableFunction(self.p, self.N, self._coerce(other) - self.values)

    def __mul__(self, other):
        return TableFunction(self.p, self.N, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return TableFunction(self.p, self.N, -self.values)

    def conj(self) -> "TableFunction":
        return TableFunction(self.p, self.N, np.conj(self.values))

    def allclose(self, other: "TableFunction", atol: float = 1e-9) -> bool:
        self.same_domain(other)
        return bool(np.max(np.abs(self.values - other.values), initial=0.0) <= atol)

    # -- averages and norms -------------------------------------------------------
    def mean(self) -> complex:
        return complex(np.sum(self.values) / self.size)

    def inner(self, other: "TableFunction") -> complex:
        """``E_x f(x) * conj(g(x))``."""
        self.same_domain(other)
        return complex(np.sum(self.values * np.conj(other.values)) / self.size)

    def pairing(self, other: "TableFunction") -> complex:
        """Bilinear pairing ``E_x f(x) * g(x)`` (no conjugation)."""
        self.same_domain(other)
        return complex(np.sum(self.values * other.values) / self.size)

    def lq_norm(self, q: float) -> float:
        if math.isinf(q):
            return self.linf_norm()
        return float((np.sum(np.abs(self.values) ** q) / self.size) ** (1.0 / q))

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.values)) / self.size)

    def l2_norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.values) ** 2) / self.size))

    def linf_norm(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))


def inner_product(f: TableFunction, g: TableFunction) -> complex:
    return f.inner(g)


def l1_norm(f: TableFunction) -> float:
    return f.l1_norm()


def l2_norm(f: TableFunction) -> float:
    return f.l2_norm()


def linf_norm(f: TableFunction) -> float:
    return f.linf_norm()
