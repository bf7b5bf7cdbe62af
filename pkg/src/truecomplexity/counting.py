"""Averages ``E_x prod_i f_i(L_i(x))`` over ``(F_p^n)^d`` and solution
densities of sets, with a reparametrization by the image of the system."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import field as fd
from .errors import DomainError, ShapeError
from .linsys import LinearSystem, row_reduce
from .poly import PhaseFunction, parse_polynomial


@dataclass(frozen=True)
class CountReport:
    average: complex
    exact_average: Fraction | None
    cost: int
    method: str
    free_blocks: int
    density: Fraction | None = None
    expected: Fraction | None = None
    counter: fd.ResidueCounter | None = None

    @property
    def deviation(self) -> Fraction | None:
        if self.density is None:
            return None
        return self.density - self.expected

    def to_json(self) -> dict:
        out = {"average_re": self.average.real, "average_im": self.average.imag,
               "exact_average": None if self.exact_average is None else str(self.exact_average),
               "cost": self.cost, "method": self.method, "free_blocks": self.free_blocks}
        if self.density is not None:
            out.update(density=str(self.density), density_float=float(self.density),
                       expected=str(self.expected), deviation=str(self.deviation),
                       deviation_float=float(self.deviation))
        return out


def image_parametrization(system: LinearSystem) -> np.ndarray:
    """Pivot columns of the coefficient matrix: ``L(x)`` over ``x`` in
    ``(F_p^n)^d`` is uniform on ``{C_B z}`` with ``z`` in ``(F_p^n)^rho``."""
    C = system.coefficient_matrix() % system.p
    _, pivots = row_reduce(C, system.p)
    return C[:, pivots]


def _form_indices(coef: np.ndarray, k: np.ndarray, p: int, n: int) -> list[np.ndarray]:
    """Index in F_p^n of ``sum_u coef[i, u] z_u`` for every form ``i``."""
    q = p ** n
    r = coef.shape[1]
    add = fd.addition_table(p, n)
    scale = fd.scaling_table(p, n)
    zs = [(k // q ** (r - 1 - u)) % q for u in range(r)]
    out = []
    for row in coef:
        idx = np.zeros_like(k)
        for c, z in zip(row, zs):
            if c:
                idx = add[idx, scale[c, z]]
        out.append(idx)
    return out


def _check_functions(fs, system: LinearSystem):
    if len(fs) != system.m:
        raise ShapeError(f"{len(fs)} functions for {system.m} forms")
    p, n = fs[0].p, fs[0].N
    if p != system.p:
        raise ShapeError(f"functions over F_{p} but system over F_{system.p}")
    for f in fs:
        if (f.p, f.N) != (p, n):
            raise ShapeError("functions must share the domain F_p^n")
    return p, n


def system_average(fs: Sequence, system: LinearSystem, subset: Sequence[int] | None = None,
                   method: str = "reparametrized", exact: bool | None = None) -> CountReport:
    """``E_{x in (F_p^n)^d} prod_{i in subset} f_i(L_i(x))``.

    Every ``f_i`` may be a ``TableFunction`` or a ``PhaseFunction``; when all
    are phases the sum is accumulated as exact residue counts.
    """
    p, n = _check_functions(fs, system)
    subset = range(system.m) if subset is None else sorted(set(subset))
    if method == "reparametrized":
        coef = image_parametrization(system)
    elif method == "direct":
        coef = system.coefficient_matrix() % p
    else:
        raise DomainError(f"unknown counting method {method!r}")
    q = p ** n
    r = coef.shape[1]
    total = fd.check_budget(q ** r, f"{method} system average")
    fd.check_budget(total * max(1, len(subset)), f"{method} system average")
    all_phase = all(isinstance(fs[i], PhaseFunction) for i in subset)
    if exact and not all_phase:
        raise DomainError("exact averages need phase inputs")
    use_exact = all_phase if exact is None else exact

    if use_exact:
        tabs = [fs[i].residues for i in subset]

        def work(a, b):
            k = np.arange(a, b, dtype=np.int64)
            idx = _form_indices(coef[list(subset)], k, p, n)
            s = np.zeros(b - a, dtype=np.int64)
            for t, ix in zip(tabs, idx):
                s += t[ix]
            return fd.ResidueCounter.from_residues(s % p, p)

        counter = fd.sum_counters(fd.map_reduce(work, total), p)
        ex = counter.exact_mean()
        avg = complex(float(ex)) if ex is not None else counter.mean()
        return CountReport(avg, ex, total, method, r, counter=counter)

    tabs = [(fs[i].table if isinstance(fs[i], PhaseFunction) else fs[i]).values for i in subset]

    def work(a, b):
        k = np.arange(a, b, dtype=np.int64)
        idx = _form_indices(coef[list(subset)], k, p, n)
        prod = np.ones(b - a, dtype=complex)
        for t, ix in zip(tabs, idx):
            prod *= t[ix]
        return prod.sum()

    avg = complex(sum(fd.map_reduce(work, total))) / total
    return CountReport(avg, None, total, method, r)


def _indicator(A) -> np.ndarray:
    vals = A.values if isinstance(A, fd.TableFunction) else np.asarray(A)
    if np.iscomplexobj(vals):
        if np.any(vals.imag != 0):
            raise DomainError("indicator tables must be real 0/1")
        vals = vals.real
    if not np.all((vals == 0) | (vals == 1)):
        raise DomainError("indicator tables must take only the values 0 and 1")
    return vals.astype(bool)


def set_solution_density(sets: Sequence, system: LinearSystem, method: str = "reparametrized") -> CountReport:
    """Exact density of ``x`` with ``L_i(x) in A_i`` for every ``i``."""
    if len(sets) != system.m:
        raise ShapeError(f"{len(sets)} sets for {system.m} forms")
    masks = [_indicator(A) for A in sets]
    size = masks[0].shape[0]
    p = system.p
    n = round(np.log(size) / np.log(p))
    if p ** n != size or any(m.shape[0] != size for m in masks):
        raise ShapeError("indicator tables must share a domain F_p^n")
    coef = image_parametrization(system) if method == "reparametrized" else system.coefficient_matrix() % p
    q = p ** n
    total = fd.check_budget(q ** coef.shape[1], f"{method} set density")

    def work(a, b):
        k = np.arange(a, b, dtype=np.int64)
        ok = np.ones(b - a, dtype=bool)
        for m, ix in zip(masks, _form_indices(coef, k, p, n)):
            ok &= m[ix]
        return int(ok.sum())

    hits = sum(fd.map_reduce(work, total))
    density = Fraction(hits, total)
    expected = Fraction(1)
    for m in masks:
        expected *= Fraction(int(m.sum()), size)
    return CountReport(complex(float(density)), density, total, method, coef.shape[1], density, expected)


def balanced_part(A) -> fd.TableFunction:
    """``A - delta * 1`` where ``delta`` is the density of ``A``."""
    mask = _indicator(A)
    if not isinstance(A, fd.TableFunction):
        raise DomainError("balanced_part needs a TableFunction indicator")
    delta = Fraction(int(mask.sum()), mask.shape[0])
    return fd.TableFunction(A.p, A.N, mask.astype(float) - float(delta))


def indicator_table(indices: Sequence[int], p: int, n: int) -> fd.TableFunction:
    vals = np.zeros(p ** n)
    idx = np.asarray(list(indices), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= p ** n):
        raise DomainError(f"set indices must lie in [0, {p ** n})")
    vals[idx] = 1.0
    return fd.TableFunction(p, n, vals)


def parse_set_spec(spec: str, p: int, n: int) -> fd.TableFunction:
    """``poly:<polynomial>:in:<r1,r2,...>`` or whitespace/comma separated indices."""
    if spec.startswith("poly:"):
        body = spec[len("poly:"):]
        if ":in:" not in body:
            raise DomainError("set spec must look like poly:<polynomial>:in:<residues>")
        text, residues = body.rsplit(":in:", 1)
        allowed = {int(r) % p for r in residues.replace(" ", "").split(",") if r}
        vals = parse_polynomial(text, p, n).residue_table()
        return fd.TableFunction(p, n, np.isin(vals, sorted(allowed)).astype(float))
    tokens = spec.replace(",", " ").split()
    try:
        return indicator_table([int(t) for t in tokens], p, n)
    except ValueError as exc:
        raise DomainError(f"cannot parse set spec {spec[:40]!r}") from exc
