"""Linear forms over F_p, power-coefficient matrices, degree-s independence,
Cauchy-Schwarz complexity and row-independence certificates."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from . import field as fd
from .errors import BudgetError, DomainError, ShapeError, UnsupportedCharacteristicError
from .multilinear import all_multisets


# ---------------------------------------------------------------------------
# exact linear algebra mod p
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Elimination:
    rank: int
    rref: np.ndarray
    pivots: tuple[int, ...]
    nullspace: np.ndarray  # one basis vector per row


def row_reduce(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p and the pivot columns."""
    R = np.array(A, dtype=np.int64) % p
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = R[r] * fd.inverse_mod(int(R[r, c]), p) % p
        others = np.nonzero(R[:, c])[0]
        for o in others:
            if o != r:
                R[o] = (R[o] - R[o, c] * R[r]) % p
        pivots.append(c)
        r += 1
    return R, pivots


@dataclass(frozen=True, eq=False)
class FpMatrix:
    values: np.ndarray
    p: int

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=np.int64)) % self.p
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def eliminate(self) -> Elimination:
        return matrix_rank_nullspace(self)

    @property
    def rank(self) -> int:
        return self.eliminate().rank


def matrix_rank_nullspace(M: FpMatrix) -> Elimination:
    p = M.p
    R, pivots = row_reduce(M.values, p)
    cols = M.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for r, c in enumerate(pivots):
            basis[k, c] = -R[r, f] % p
    return Elimination(len(pivots), R[: len(pivots)], tuple(pivots), basis)


def solve(A: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """A solution of ``A x = b`` supported on pivot columns, or None."""
    A = np.asarray(A, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1) % p
    R, pivots = row_reduce(np.hstack([A, b]), p)
    n = A.shape[1]
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = R[r, n]
    return x


def normalize(v: np.ndarray, p: int) -> np.ndarray:
    """Scale ``v`` so that its first nonzero entry is 1."""
    v = np.asarray(v, dtype=np.int64) % p
    nz = np.nonzero(v)[0]
    if nz.size == 0:
        return v
    return v * fd.inverse_mod(int(v[nz[0]]), p) % p


def in_span(vectors: Sequence[Sequence[int]], v: Sequence[int], p: int) -> bool:
    if len(vectors) == 0:
        return not np.any(np.asarray(v) % p)
    return solve(np.asarray(vectors, dtype=np.int64).T, np.asarray(v), p) is not None


# ---------------------------------------------------------------------------
# forms and systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearForm:
    coeffs: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.coeffs)

    def __call__(self, xs):
        return sum(c * x for c, x in zip(self.coeffs, xs))

    def __str__(self) -> str:
        parts = []
        for u, c in enumerate(self.coeffs):
            if c:
                parts.append(f"x{u + 1}" if c == 1 else f"{c}*x{u + 1}")
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class LinearSystem:
    p: int
    forms: tuple[LinearForm, ...]
    zero_forms: tuple[int, ...] = field(init=False, default=())
    proportional_pairs: tuple[tuple[int, int], ...] = field(init=False, default=())

    def __post_init__(self):
        fd.check_prime(self.p)
        forms = tuple(LinearForm(tuple(int(c) % self.p for c in getattr(f, "coeffs", f))) for f in self.forms)
        if not forms:
            raise ShapeError("a system needs at least one form")
        if len({f.d for f in forms}) != 1:
            raise ShapeError("all forms must have the same number of variables")
        object.__setattr__(self, "forms", forms)
        zero = tuple(i for i, f in enumerate(forms) if not any(f.coeffs))
        pairs = []
        for i in range(len(forms)):
            for j in range(i + 1, len(forms)):
                if i in zero or j in zero:
                    continue
                if matrix_rank_nullspace(FpMatrix([forms[i].coeffs, forms[j].coeffs], self.p)).rank < 2:
                    pairs.append((i, j))
        object.__setattr__(self, "zero_forms", zero)
        object.__setattr__(self, "proportional_pairs", tuple(pairs))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], p: int) -> "LinearSystem":
        return cls(p, tuple(LinearForm(tuple(int(c) % p for c in r)) for r in rows))

    @property
    def m(self) -> int:
        return len(self.forms)

    @property
    def d(self) -> int:
        return self.forms[0].d

    @property
    def degenerate(self) -> bool:
        return bool(self.zero_forms or self.proportional_pairs)

    def coefficient_matrix(self) -> np.ndarray:
        return np.array([f.coeffs for f in self.forms], dtype=np.int64)

    def to_text(self) -> str:
        return "\n".join(",".join(str(c) for c in f.coeffs) for f in self.forms) + "\n"


def parse_system(text: str, p: int) -> LinearSystem:
    """One form per line as comma-separated coefficients; ``#`` starts a comment."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([int(tok) for tok in line.replace(" ", "").split(",")])
        except ValueError as exc:
            raise DomainError(f"line {lineno}: cannot parse coefficients {line!r}") from exc
    if not rows:
        raise DomainError("system file has no forms")
    return LinearSystem.from_rows(rows, p)


def progression_system(length: int, p: int) -> LinearSystem:
    """``{x, x+y, ..., x+(length-1)y}``."""
    return LinearSystem.from_rows([(1, i) for i in range(length)], p)


# ---------------------------------------------------------------------------
# power matrices and independence
# ---------------------------------------------------------------------------

def power_coefficient_matrix(system: LinearSystem, s: int) -> FpMatrix:
    """Row ``i`` holds the coefficients of ``L_i^s`` on the monomials of degree ``s``.

    Columns are size-``s`` multisets of ``1..d`` in lexicographic order and
    the entry for ``V`` is ``multinomial(V) * prod_{u in V} c_{iu}``.
    """
    p = system.p
    if s < 1:
        raise DomainError("s must be at least 1")
    if s >= p:
        raise UnsupportedCharacteristicError(f"power matrices need s < p (s={s}, p={p})")
    cols = all_multisets(system.d, s)
    M = np.zeros((system.m, len(cols)), dtype=np.int64)
    for i, f in enumerate(system.forms):
        for j, V in enumerate(cols):
            val = V.multinomial() % p
            for u in V.entries:
                val = val * f.coeffs[u - 1] % p
            M[i, j] = val
    return FpMatrix(M, p)


def symmetric_tensor_matrix(system: LinearSystem, s: int) -> FpMatrix:
    """Rows are the full tensors ``L_i^{(x) s}`` over ``[d]^s`` (no multiset merging)."""
    p = system.p
    cols = list(product(range(system.d), repeat=s))
    M = np.zeros((system.m, len(cols)), dtype=np.int64)
    for i, f in enumerate(system.forms):
        for j, U in enumerate(cols):
            M[i, j] = math.prod(f.coeffs[u] for u in U) % p
    return FpMatrix(M, p)


@dataclass(frozen=True)
class IndependenceVerdict:
    s: int
    independent: bool
    rank: int
    nullspace: tuple[tuple[int, ...], ...]

    def to_json(self) -> dict:
        return {"s": self.s, "independent": self.independent, "rank": self.rank,
                "nullspace": [list(v) for v in self.nullspace]}


def degree_independence(system: LinearSystem, s: int) -> IndependenceVerdict:
    M = power_coefficient_matrix(system, s)
    # relations among rows live in the nullspace of the transpose
    el = matrix_rank_nullspace(FpMatrix(M.values.T, system.p))
    return IndependenceVerdict(s, el.rank == system.m, el.rank,
                               tuple(tuple(int(c) for c in normalize(v, system.p)) for v in el.nullspace))


def _s_range(system: LinearSystem, s_max: int | None) -> range:
    top = system.p - 1 if s_max is None else s_max
    if top >= system.p:
        warnings.warn(f"s_max={top} truncated to p-1={system.p - 1}", stacklevel=3)
        top = system.p - 1
    return range(1, top + 1)


def minimal_independence_degree(system: LinearSystem, s_max: int | None = None) -> int | None:
    for s in _s_range(system, s_max):
        if degree_independence(system, s).independent:
            return s
    return None


# ---------------------------------------------------------------------------
# Cauchy-Schwarz complexity
# ---------------------------------------------------------------------------

def set_partitions(items: Sequence[int], max_blocks: int) -> Iterator[list[list[int]]]:
    """Partitions of ``items`` into at most ``max_blocks`` nonempty classes
    (restricted-growth enumeration)."""
    items = list(items)
    n = len(items)
    if n == 0:
        yield []
        return
    labels = [0] * n

    def rec(i, used):
        if i == n:
            blocks = [[] for _ in range(used)]
            for it, lab in zip(items, labels):
                blocks[lab].append(it)
            yield blocks
            return
        for lab in range(min(used + 1, max_blocks)):
            labels[i] = lab
            yield from rec(i + 1, max(used, lab + 1))

    yield from rec(0, 0)


def _min_classes(system: LinearSystem, i: int) -> int:
    p = system.p
    target = system.forms[i].coeffs
    others = [j for j in range(system.m) if j != i]
    for k in range(1, len(others) + 1):
        for blocks in set_partitions(others, k):
            if all(not in_span([system.forms[j].coeffs for j in b], target, p) for b in blocks):
                return k
    return math.inf


def cs_complexity(system: LinearSystem, cap: int = 8) -> int | float:
    """Least ``k`` such that for every ``i`` the other forms split into ``k+1``
    classes whose spans avoid ``L_i``.  Infinite when some form lies in the
    span of a single other form (e.g. proportional pairs)."""
    if system.m > cap:
        raise BudgetError(f"partition search over {system.m} forms (cap {cap}); bound k instead", system.m, cap)
    if system.m == 1:
        return 0
    k = max(_min_classes(system, i) for i in range(system.m)) - 1
    return max(k, 0)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RowCertificate:
    row: int
    independent: bool
    column_coefficients: tuple[int, ...] | None = None  # sum_j c_j * column_j = e_row
    spanning_combination: tuple[int, ...] | None = None  # row = sum_{j != row} a_j * row_j

    def check(self, M: FpMatrix) -> bool:
        A, p = M.values, M.p
        if self.independent:
            e = np.zeros(A.shape[0], dtype=np.int64)
            e[self.row] = 1
            return bool(np.array_equal(A @ np.array(self.column_coefficients) % p, e))
        a = np.array(self.spanning_combination, dtype=np.int64)
        return bool(a[self.row] == 0 and np.array_equal(a @ A % p, A[self.row]))


def row_independence_certificate(M: FpMatrix, i: int) -> RowCertificate:
    """Column coefficients reaching ``e_i`` if row ``i`` is outside the span of
    the other rows (nonzero only on pivot columns, so at most ``rows`` of
    them); otherwise a combination of the other rows equal to row ``i``."""
    A, p = M.values, M.p
    e = np.zeros(A.shape[0], dtype=np.int64)
    e[i] = 1
    x = solve(A, e, p)
    if x is not None:
        return RowCertificate(i, True, column_coefficients=tuple(int(v) for v in x))
    others = [j for j in range(A.shape[0]) if j != i]
    a = solve(A[others].T, A[i], p)
    full = np.zeros(A.shape[0], dtype=np.int64)
    if a is not None:
        full[others] = a
    return RowCertificate(i, False, spanning_combination=tuple(int(v) for v in full))


# ---------------------------------------------------------------------------
# aggregate analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemAnalysis:
    system: LinearSystem
    verdicts: tuple[IndependenceVerdict, ...]
    s_star: int | None
    cs_complexity: int | float | None
    offdiagonal: dict  # s -> per-form "L_i^s outside span of the others"
    warnings: tuple[str, ...] = ()

    @property
    def predicted_true_complexity(self) -> int | None:
        return None if self.s_star is None else self.s_star - 1

    def monotone(self) -> bool:
        seen = False
        for v in self.verdicts:
            if seen and not v.independent:
                return False
            seen |= v.independent
        return True

    def to_json(self) -> dict:
        cs = self.cs_complexity
        return {
            "forms": [list(f.coeffs) for f in self.system.forms],
            "p": self.system.p,
            "independence": [v.to_json() for v in self.verdicts],
            "s_star": self.s_star,
            "predicted_true_complexity": self.predicted_true_complexity,
            "cs_complexity": cs if cs is None or cs != math.inf else "inf",
            "cs_definition": "external: partition definition",
            "offdiagonal_independence": {str(s): v for s, v in self.offdiagonal.items()},
            "degeneracies": {"zero_forms": list(self.system.zero_forms),
                             "proportional_pairs": [list(t) for t in self.system.proportional_pairs]},
            "warnings": list(self.warnings),
        }


def analyze_system(system: LinearSystem, s_max: int | None = None, cs_cap: int = 8) -> SystemAnalysis:
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        srange = _s_range(system, s_max)
    notes += [str(w.message) for w in caught]
    verdicts = tuple(degree_independence(system, s) for s in srange)
    s_star = next((v.s for v in verdicts if v.independent), None)
    offdiag = {}
    for s in srange:
        M = power_coefficient_matrix(system, s)
        offdiag[s] = [row_independence_certificate(M, i).independent for i in range(system.m)]
    try:
        cs = cs_complexity(system, cs_cap)
    except BudgetError as exc:
        cs = None
        notes.append(str(exc))
    if system.degenerate:
        notes.append("degenerate system: counting statements assume nondegenerate forms")
    return SystemAnalysis(system, verdicts, s_star, cs, offdiag, tuple(notes))
