"""Explicit witnesses: power polynomials, off-diagonal phase tuples whose
product average is exactly 1, and counterexamples for dependent systems."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import field as fd
from .counting import CountReport, balanced_part, set_solution_density, system_average
from .errors import ConstructionError, UnsupportedCharacteristicError
from .linsys import LinearSystem, degree_independence
from .poly import PhaseFunction, Polynomial, compose_with_form, phase_table
from .uniformity import UniformityReport, gowers_norm

MAX_ATTEMPTS = 100


def power_polynomial(s: int, p: int, n: int) -> Polynomial:
    """``x_1^s + ... + x_n^s``."""
    fd.check_prime(p)
    if s >= p:
        raise UnsupportedCharacteristicError(f"x^s with s={s} >= p={p} reduces to a different function")
    terms = []
    for i in range(n):
        exps = [0] * n
        exps[i] = s
        terms.append((exps, 1))
    return Polynomial.from_terms(p, n, terms)


def relation_for(system: LinearSystem, s: int, i: int) -> np.ndarray | None:
    """A vector ``c`` with ``c_i != 0`` and ``sum_j c_j L_j^s = 0``, if one exists."""
    for v in degree_independence(system, s).nullspace:
        if v[i] % system.p:
            return np.array(v, dtype=np.int64)
    return None


def relation_is_sound(system: LinearSystem, s: int, c: Sequence[int], n: int) -> bool:
    """``sum_j c_j (pi_s o L_j)`` is the zero polynomial."""
    pi = power_polynomial(s, system.p, n)
    total = Polynomial.zero(system.p, n * system.d)
    for cj, form in zip(c, system.forms):
        if cj % system.p:
            total = total + compose_with_form(pi, form.coeffs).scale(int(cj))
    return total.is_zero()


@dataclass(frozen=True, eq=False)
class OffDiagonalWitness:
    system: LinearSystem
    degrees: tuple[int, ...]
    relations: np.ndarray  # row j: relation used for form j
    mu: tuple[int, ...]
    exponents: tuple[Polynomial, ...]
    functions: tuple[PhaseFunction, ...]
    average: CountReport
    norms: tuple[UniformityReport, ...]
    attempts: int
    seed: int | None

    def certification(self) -> dict:
        return {
            "average_re": self.average.average.real,
            "average_im": self.average.average.imag,
            "exact_average": None if self.average.exact_average is None else str(self.average.exact_average),
            "norms": [{"i": i, "s_i": s, "u_norm": r.value,
                       "u_norm_power": None if r.exact_power is None else str(r.exact_power)}
                      for i, (s, r) in enumerate(zip(self.degrees, self.norms))],
        }

    def to_json(self) -> dict:
        return {
            "p": self.system.p, "n": self.functions[0].N,
            "forms": [list(f.coeffs) for f in self.system.forms],
            "degrees": list(self.degrees),
            "relations": self.relations.tolist(),
            "mu": list(self.mu), "seed": self.seed, "attempts": self.attempts,
            "terms": [{"lambda": 1.0, "polynomial_text": str(q)} for q in self.exponents],
            "certification": self.certification(),
        }


def offdiagonal_example(system: LinearSystem, degrees: Sequence[int], n: int, seed: int | None = 0,
                        certify: bool = True) -> OffDiagonalWitness:
    """Phases ``f_i = omega^{sum_j mu_j c_{ji} pi_{s_j}}`` with ``prod_i f_i(L_i(x)) = 1``.

    ``c_{j.}`` is a relation among the ``L^{s_j}`` with ``c_{jj} != 0``; the
    multipliers ``mu`` are redrawn until every exponent keeps a nonzero
    multiple of its own ``pi_{s_i}``.
    """
    p, m = system.p, system.m
    degrees = tuple(int(s) for s in degrees)
    if len(degrees) != m:
        raise ConstructionError(f"{len(degrees)} degrees for {m} forms")
    rel = np.zeros((m, m), dtype=np.int64)
    for j, s in enumerate(degrees):
        c = relation_for(system, s, j)
        if c is None:
            raise ConstructionError(
                f"no relation sum_i c_i L_i^{s} = 0 with c_{j + 1} != 0: the system is degree-{s} "
                f"independent at form {j + 1}")
        rel[j] = c
    rng = np.random.default_rng(seed)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        mu = rng.integers(1, p, m)
        a = [sum(int(mu[j]) * int(rel[j, i]) for j in range(m) if degrees[j] == degrees[i]) % p
             for i in range(m)]
        if all(a):
            break
    else:
        raise ConstructionError(f"p={p} too small: {MAX_ATTEMPTS} draws of mu all cancelled")
    pis = {s: power_polynomial(s, p, n) for s in set(degrees)}
    exps = []
    for i in range(m):
        e = Polynomial.zero(p, n)
        for j in range(m):
            e = e + pis[degrees[j]].scale(int(mu[j]) * int(rel[j, i]))
        exps.append(e)
    fs = tuple(phase_table(e) for e in exps)
    if certify:
        avg = system_average(list(fs), system, exact=True)
        norms = tuple(gowers_norm(f, s) for f, s in zip(fs, degrees))
    else:
        avg, norms = None, ()
    return OffDiagonalWitness(system, degrees, rel, tuple(int(x) for x in mu), tuple(exps), fs,
                              avg, norms, attempt, seed)


@dataclass(frozen=True, eq=False)
class CounterexampleWitness:
    function_witness: OffDiagonalWitness
    residues: tuple[int, ...]
    indicator: fd.TableFunction
    set_report: CountReport
    balanced_norm: float

    @property
    def density(self) -> Fraction:
        return self.set_report.density

    def to_json(self) -> dict:
        return {
            "function_witness": self.function_witness.to_json(),
            "set": {"residues": list(self.residues), **self.set_report.to_json(),
                    "balanced_u_norm": self.balanced_norm},
        }


def dependent_counterexample(system: LinearSystem, s: int, n: int, residues: Sequence[int] = (0,),
                             seed: int | None = 0) -> CounterexampleWitness:
    """Witnesses that degree-``s`` dependence defeats ``U^s`` control.

    The function witness uses degree ``s`` at every position.  The set witness
    is the level set ``A = {x : pi_s(x) in residues}`` used at every position,
    with its exact solution density against ``delta^m``.
    """
    p = system.p
    if degree_independence(system, s).independent:
        raise ConstructionError(f"the system is degree-{s} independent; no counterexample of this kind")
    witness = offdiagonal_example(system, [s] * system.m, n, seed)
    vals = phase_table(power_polynomial(s, p, n)).residues
    A = fd.TableFunction(p, n, np.isin(vals, [r % p for r in residues]).astype(float))
    report = set_solution_density([A] * system.m, system)
    bal = gowers_norm(balanced_part(A), s).value
    return CounterexampleWitness(witness, tuple(int(r) % p for r in residues), A, report, bal)
