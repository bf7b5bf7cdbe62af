"""Phase combinations, decompositions ``f = f' + g + h``, the rank-gap filter
and a clause-by-clause decomposition validator."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import field as fd
from .errors import ContractError, ShapeError
from .multilinear import RankValue, polynomial_rank
from .poly import Polynomial, parse_polynomial, phase_table
from .uniformity import gowers_norm

RECON_TOL = 1e-9


@dataclass(frozen=True)
class PhaseCombination:
    """``sum_j lambda_j omega^{pi_j}`` with real coefficients."""

    terms: tuple[tuple[float, Polynomial], ...]
    p: int
    N: int

    @classmethod
    def of(cls, terms: Sequence[tuple[float, Polynomial]], p: int | None = None, N: int | None = None):
        terms = tuple((float(l), q) for l, q in terms)
        if terms:
            p, N = terms[0][1].p, terms[0][1].N
            if any((q.p, q.N) != (p, N) for _, q in terms):
                raise ShapeError("all phases must live on one domain")
        if p is None or N is None:
            raise ShapeError("an empty combination needs p and N")
        return cls(terms, p, N)

    @property
    def M(self) -> float:
        return float(sum(abs(l) for l, _ in self.terms))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(q.degree for _, q in self.terms)

    def table(self, indices: Sequence[int] | None = None) -> fd.TableFunction:
        idx = range(len(self.terms)) if indices is None else indices
        vals = np.zeros(self.p ** self.N, dtype=complex)
        for j in idx:
            lam, q = self.terms[j]
            vals += lam * phase_table(q).table.values
        return fd.TableFunction(self.p, self.N, vals)

    def subset(self, indices: Sequence[int]) -> "PhaseCombination":
        return PhaseCombination(tuple(self.terms[j] for j in indices), self.p, self.N)


@dataclass(frozen=True, eq=False)
class Decomposition:
    f: fd.TableFunction
    combination: PhaseCombination
    g: fd.TableFunction
    h: fd.TableFunction
    params: dict = field(default_factory=dict)  # s, k, epsilon, eta, R, M0

    def reconstruction_error(self) -> float:
        rebuilt = self.combination.table() + self.g + self.h
        return float(np.max(np.abs(rebuilt.values - self.f.values)))


def term_ranks(comb: PhaseCombination, degree: int) -> list[RankValue]:
    """Rank of every phase as a degree-``degree`` polynomial (lower degree: rank 0)."""
    return [polynomial_rank(q, degree) for _, q in comb.terms]


def _rank_below(rv: RankValue, x: float) -> bool:
    """``r < x``, exactly whenever ``x`` is an integer."""
    if rv.infinite:
        return False
    if float(x).is_integer():
        return rv.density > Fraction(1, rv.p ** int(x)) if x >= 0 else False
    return rv.rank < x - 1e-12


# ---------------------------------------------------------------------------
# rank-gap filter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bound:
    name: str
    lhs: float
    rhs: float
    slack: float = 1e-9

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.slack

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


@dataclass(frozen=True, eq=False)
class FilterReport:
    decomposition: Decomposition
    t: int
    R1: float
    low: tuple[int, ...]
    middle: tuple[int, ...]
    high: tuple[int, ...]
    ranks: tuple[RankValue, ...]
    fL_norm: float
    h2_norm: float
    epsilon: float
    precondition_value: float  # c M p^{R_1} with c = ||f||_{U^m}
    bounds: tuple[Bound, ...]

    @property
    def precondition_holds(self) -> bool:
        return self.precondition_value <= self.epsilon ** 2 + 1e-12

    @property
    def guarantee_holds(self) -> bool:
        return self.h2_norm <= 5 * self.epsilon + 1e-9

    def to_json(self) -> dict:
        return {
            "t": self.t, "R1": self.R1, "low": list(self.low), "middle": list(self.middle),
            "high": list(self.high), "ranks": [r.rank if not r.infinite else "inf" for r in self.ranks],
            "fL_l2": self.fL_norm, "h2_l2": self.h2_norm, "five_epsilon": 5 * self.epsilon,
            "guarantee_holds": self.guarantee_holds, "precondition_value": self.precondition_value,
            "precondition_holds": self.precondition_holds,
            "bounds": [b.to_json() for b in self.bounds],
        }


def gap_length(M: float, epsilon: float, p: int) -> int:
    """Least integer ``t >= 1`` with ``M^2 p^{-t} <= epsilon^2``."""
    t = max(1, math.ceil(2 * math.log(M / epsilon, p))) if M > 0 else 1
    while M * M * p ** (-t) > epsilon ** 2:
        t += 1
    while t > 1 and M * M * p ** (-(t - 1)) <= epsilon ** 2:
        t -= 1
    return t


def rank_gap_filter(f: fd.TableFunction, combination: PhaseCombination, g: fd.TableFunction,
                    h: fd.TableFunction, epsilon: float, M: float, R: float, eta: float | None = None,
                    degree: int | None = None, ranks: Sequence[RankValue] | None = None) -> FilterReport:
    """Drop the low-rank phases of a decomposition into the L^2 error.

    Windows ``[R_1, R_1 + t)`` are scanned from ``R_1 = R`` in steps of ``t``
    and the first one carrying weight at most ``epsilon`` is used.
    """
    p = f.p
    m = degree if degree is not None else max(combination.degrees, default=1)
    comb_table = combination.table()
    g_norm = gowers_norm(g, m + 1).value
    eta = g_norm if eta is None else eta
    violations = []
    err = float(np.max(np.abs((comb_table + g + h).values - f.values)))
    if err > RECON_TOL:
        violations.append(f"f != sum + g + h (max error {err:.3g})")
    if combination.M > M + 1e-12:
        violations.append(f"sum |lambda| = {combination.M:.6g} exceeds M = {M:.6g}")
    if g_norm > eta + 1e-9:
        violations.append(f"||g||_U^{m + 1} = {g_norm:.6g} exceeds eta = {eta:.6g}")
    if eta > epsilon ** 2 / M + 1e-12:
        violations.append(f"eta = {eta:.6g} exceeds epsilon^2/M = {epsilon ** 2 / M:.6g}")
    if h.l2_norm() > epsilon + 1e-9:
        violations.append(f"||h||_2 = {h.l2_norm():.6g} exceeds epsilon = {epsilon:.6g}")
    if any(d > m for d in combination.degrees):
        violations.append(f"a phase has degree above m = {m}")
    if violations:
        raise ContractError(violations)

    ranks = tuple(ranks) if ranks is not None else tuple(term_ranks(combination, m))
    lam = [abs(l) for l, _ in combination.terms]
    t = gap_length(M, epsilon, p)
    R1 = R
    limit = R + t * M / epsilon
    while True:
        weight = sum(w for w, r in zip(lam, ranks) if not _rank_below(r, R1) and _rank_below(r, R1 + t))
        if weight <= epsilon + 1e-12:
            break
        R1 += t
        assert R1 <= limit + t, "no rank gap found although the weights are bounded"
    low = tuple(j for j, r in enumerate(ranks) if _rank_below(r, R1))
    high = tuple(j for j, r in enumerate(ranks) if not _rank_below(r, R1 + t))
    middle = tuple(j for j in range(len(ranks)) if j not in low and j not in high)

    fL = combination.table(low)
    fM = combination.table(middle)
    fH = combination.table(high)
    h1 = h + fM
    h2 = h1 + fL
    new = Decomposition(f, combination.subset(high), g, h2,
                        {"k": m, "s": m, "epsilon": 5 * epsilon, "eta": eta, "R": R})

    f_norm = gowers_norm(f, m).value
    fL_l2 = fL.l2_norm()
    bounds = (
        Bound("<f_L,f> <= M p^R1 ||f||_U^m", abs(fL.inner(f)), M * p ** R1 * f_norm),
        Bound("<f_L,f_H> <= M^2 p^-t", abs(fL.inner(fH)), M * M * p ** (-t)),
        Bound("<f_L,g> <= M eta", abs(fL.inner(g)), M * eta),
        Bound("<f_L,h'> <= 2 eps ||f_L||_2", abs(fL.inner(h1)), 2 * epsilon * fL_l2),
        Bound("sum_H |lambda| <= M", combination.subset(high).M, M),
        Bound("||f_M||_2 <= eps", fM.l2_norm(), epsilon),
    )
    return FilterReport(new, t, float(R1), low, middle, high, ranks, fL_l2, h2.l2_norm(), epsilon,
                        f_norm * M * p ** R1, bounds)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Clause:
    name: str
    lhs: float
    rhs: float
    passed: bool

    def to_json(self) -> dict:
        return {"clause": self.name, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


@dataclass(frozen=True)
class DecompositionReport:
    clauses: tuple[Clause, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failed(self) -> list[str]:
        return [c.name for c in self.clauses if not c.passed]


def verify_decomposition(dec: Decomposition) -> DecompositionReport:
    """Check reconstruction, ``M <= M0``, degrees in ``[s, k]``, ranks,
    ``||g||_{U^{k+1}} <= eta`` and ``||h||_2 <= epsilon``.  Never raises on
    a failed clause."""
    P = dec.params
    comb = dec.combination
    clauses = [Clause("reconstruction", dec.reconstruction_error(), RECON_TOL,
                      dec.reconstruction_error() <= RECON_TOL)]
    if P.get("M0") is not None:
        clauses.append(Clause("M <= M0", comb.M, P["M0"], comb.M <= P["M0"] + 1e-12))
    k = P.get("k", max(comb.degrees, default=1))
    s = P.get("s", min(comb.degrees, default=1))
    for j, (_, q) in enumerate(comb.terms):
        clauses.append(Clause(f"degree[{j}] in [s,k]", q.degree, k, s <= q.degree <= k))
        if P.get("R") is not None:
            rv = polynomial_rank(q, max(q.degree, 1))
            clauses.append(Clause(f"rank[{j}] >= R", rv.rank, P["R"], not _rank_below(rv, P["R"])))
    if P.get("eta") is not None:
        gn = gowers_norm(dec.g, k + 1).value
        clauses.append(Clause("||g||_U^(k+1) <= eta", gn, P["eta"], gn <= P["eta"] + 1e-9))
    if P.get("epsilon") is not None:
        hn = dec.h.l2_norm()
        clauses.append(Clause("||h||_2 <= epsilon", hn, P["epsilon"], hn <= P["epsilon"] + 1e-9))
    return DecompositionReport(tuple(clauses))


# ---------------------------------------------------------------------------
# JSON + binary storage
# ---------------------------------------------------------------------------

def _write_table(path: Path, t: fd.TableFunction):
    np.asarray(t.values, dtype="<c16").tofile(path)


def _read_table(path: Path, p: int, N: int) -> fd.TableFunction:
    vals = np.fromfile(path, dtype="<c16")
    return fd.TableFunction(p, N, vals)


def save_decomposition(dec: Decomposition, path, ranks: Sequence[RankValue] | None = None) -> dict:
    path = Path(path)
    stem = path.with_suffix("")
    refs = {}
    for name in ("f", "g", "h"):
        ref = stem.with_name(f"{stem.name}.{name}.bin")
        _write_table(ref, getattr(dec, name))
        refs[f"{name}_ref"] = ref.name
    k = dec.params.get("k", max(dec.combination.degrees, default=1))
    if ranks is None:
        ranks = [polynomial_rank(q, max(q.degree, 1)) for _, q in dec.combination.terms]
    doc = {
        "p": dec.f.p, "n": dec.f.N,
        "terms": [{"lambda": l, "polynomial_text": str(q), "rank": None if r.infinite else r.rank}
                  for (l, q), r in zip(dec.combination.terms, ranks)],
        **refs,
        "params": {key: dec.params.get(key) for key in ("s", "k", "epsilon", "eta", "R", "M0")},
    }
    doc["params"]["k"] = k
    path.write_text(json.dumps(doc, indent=2))
    return doc


def load_decomposition(path) -> Decomposition:
    path = Path(path)
    doc = json.loads(path.read_text())
    p, n = doc["p"], doc["n"]
    terms = [(t["lambda"], parse_polynomial(t["polynomial_text"], p, n)) for t in doc["terms"]]
    comb = PhaseCombination.of(terms, p, n)
    g = _read_table(path.parent / doc["g_ref"], p, n)
    h = _read_table(path.parent / doc["h_ref"], p, n)
    if doc.get("f_ref"):
        f = _read_table(path.parent / doc["f_ref"], p, n)
    else:
        f = comb.table() + g + h
    params = {k: v for k, v in doc.get("params", {}).items() if v is not None}
    return Decomposition(f, comb, g, h, params)
