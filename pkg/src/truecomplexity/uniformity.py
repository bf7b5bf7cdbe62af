"""Gowers uniformity norms, Gowers inner products, phase correlations and a
brute-force inverse-theorem oracle."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import field as fd
from .errors import DomainError, ShapeError
from .multilinear import _subset_indices
from .poly import PhaseFunction, Polynomial, monomials_up_to, phase_table

_BATCH = 1 << 20


def shift_indices(p: int, N: int, hs: np.ndarray) -> np.ndarray:
    """``out[j, x]`` = index of ``x + decode(hs[j])``, without a full addition table."""
    pts = fd.all_points(p, N)
    H = fd.decode_indices(np.asarray(hs, dtype=np.int64), p, N)
    return fd.encode_points((H[:, None, :] + pts[None, :, :]) % p, p)


def multiplicative_derivative(f: fd.TableFunction, h: Sequence[int]) -> fd.TableFunction:
    """``x -> f(x + h) * conj(f(x))``."""
    if len(h) != f.N:
        raise ShapeError(f"shift has {len(h)} coordinates, expected {f.N}")
    return f.shifted(h) * f.conj()


@dataclass(frozen=True)
class UniformityReport:
    k: int
    value: float
    exact_power: Fraction | None = None
    counter: fd.ResidueCounter | None = None
    cost: int = 0

    @property
    def power(self) -> float:
        if self.exact_power is not None:
            return float(self.exact_power)
        return self.value ** (2 ** self.k)


def _as_table(f) -> fd.TableFunction:
    return f.table if isinstance(f, PhaseFunction) else f


# -- floating point recursion ------------------------------------------------------

def _u2_fourth_power(G: np.ndarray, p: int, N: int) -> float:
    """``sum_rows ||g||_{U^2}^4`` for a batch of tables ``G`` of shape ``(B, p**N)``."""
    F = np.fft.fftn(G.reshape((G.shape[0],) + (p,) * N), axes=tuple(range(1, N + 1)))
    F = np.abs(F.reshape(G.shape[0], -1) / G.shape[1]) ** 2
    return float((F ** 2).sum())


def _power_float(G: np.ndarray, p: int, N: int, levels: int) -> float:
    """Sum over rows of ``E_{h} ||Delta_h g||_{U^2}^4`` with ``levels`` derivatives."""
    q = G.shape[1]
    if levels == 0:
        return _u2_fourth_power(G, p, N)
    total = 0.0
    step = max(1, _BATCH // (q * G.shape[0]))
    for a, b in fd.chunk_ranges(q, step):
        idx = shift_indices(p, N, np.arange(a, b))
        D = G[:, idx] * np.conj(G)[:, None, :]
        total += _power_float(D.reshape(-1, q), p, N, levels - 1) / q
    return total


# -- exact residue recursion for phases --------------------------------------------------

def _phase_counts(r: np.ndarray, p: int, N: int, levels: int) -> np.ndarray:
    """Residue counts of ``sum_{x,h_1..h_{levels+1}}`` of the iterated difference.

    The last level is done through per-table histograms: over ``(x, h)`` the
    value ``s(x+h) - s(x)`` takes residue ``j`` exactly
    ``sum_a N_a N_{a+j}`` times, where ``N_a`` counts ``s == a``.
    """
    q = r.shape[1]
    if levels == 0:
        B = r.shape[0]
        hist = np.zeros((B, p), dtype=np.int64)
        for a in range(p):
            hist[:, a] = (r == a).sum(axis=1)
        counts = np.zeros(p, dtype=np.int64)
        for j in range(p):
            counts[j] = int((hist * np.roll(hist, -j, axis=1)).sum())
        return counts
    total = np.zeros(p, dtype=np.int64)
    step = max(1, _BATCH // (q * r.shape[0]))
    for a, b in fd.chunk_ranges(q, step):
        idx = shift_indices(p, N, np.arange(a, b))
        D = (r[:, idx] - r[:, None, :]) % p
        total += _phase_counts(D.reshape(-1, q), p, N, levels - 1)
    return total


def phase_norm_counter(phase: PhaseFunction, k: int) -> fd.ResidueCounter:
    """Exact residue counts whose mean is ``||omega^pi||_{U^k}^{2^k}``."""
    p, N = phase.p, phase.N
    # the histogram trick saves one factor of p**N over the naive sum
    fd.check_budget(p ** (N * k), f"exact U^{k} norm")
    counts = _phase_counts(phase.residues[None, :], p, N, k - 1)
    return fd.ResidueCounter.from_array(counts)


def gowers_norm(f, k: int, exact: bool | None = None) -> UniformityReport:
    """``||f||_{U^k}`` for a table or a polynomial phase.

    Phases go through exact residue counting unless ``exact=False``; the
    2^k-th power is then kept as a rational whenever it is one.
    """
    if k < 1:
        raise DomainError("U^k norms need k >= 1")
    is_phase = isinstance(f, PhaseFunction)
    if exact and not is_phase:
        raise DomainError("exact norms need a PhaseFunction input")
    tab = _as_table(f)
    p, N = tab.p, tab.N
    cost = p ** (N * (k + 1))
    if is_phase and exact is not False:
        counter = phase_norm_counter(f, k)
        power = counter.exact_mean()
        val = float(power) if power is not None else counter.mean().real
        return UniformityReport(k, max(val, 0.0) ** (1.0 / 2 ** k), power, counter, cost)
    if k == 1:
        return UniformityReport(1, abs(tab.mean()), cost=p ** N)
    fd.check_budget(p ** (N * (k - 1)), f"U^{k} norm")
    power = _power_float(tab.values[None, :], p, N, k - 2)
    return UniformityReport(k, max(power, 0.0) ** (1.0 / 2 ** k), cost=cost)


def gowers_norm_naive(f: fd.TableFunction, k: int) -> float:
    """Direct ``E_{x,h}`` definition; a cross-check for small domains."""
    f = _as_table(f)
    return abs(gowers_inner_product([f] * (1 << k))) ** (1.0 / 2 ** k)


def norm_profile(f, ks: Sequence[int]) -> list[UniformityReport]:
    reports = [gowers_norm(f, k) for k in sorted(ks)]
    return reports


def gowers_inner_product(fs: Sequence) -> complex:
    """``E_{x,h_1..h_K} prod_eps C^{|eps|} f_eps(x + eps.h)`` over ``eps`` in {0,1}^K.

    ``fs[e]`` belongs to the ``eps`` whose bit ``j`` (of ``e``) is ``eps_{j+1}``.
    """
    fs = [_as_table(f) for f in fs]
    K = len(fs).bit_length() - 1
    if len(fs) != 1 << K or K < 1:
        raise ShapeError(f"need 2^K functions with K >= 1, got {len(fs)}")
    p, N = fs[0].p, fs[0].N
    for g in fs[1:]:
        fs[0].same_domain(g)
    q = p ** N
    total = fd.check_budget(q ** K, "Gowers inner product")
    fd.check_budget(q ** (K + 1) * len(fs), "Gowers inner product")
    add = fd.addition_table(p, N)
    vals = [g.values if bin(e).count("1") % 2 == 0 else np.conj(g.values) for e, g in enumerate(fs)]
    xs = np.arange(q)

    def work(a, b):
        k = np.arange(a, b, dtype=np.int64)
        idx = [(k // q ** j) % q for j in range(K)]
        prod = np.ones((q, b - a), dtype=complex)
        for v, sub in zip(vals, _subset_indices(idx, add)):
            prod *= v[add[xs[:, None], sub[None, :]]]
        return prod.sum()

    return complex(sum(fd.map_reduce(work, total, max(1, fd.CHUNK // q)))) / q ** (K + 1)


def correlation(f: fd.TableFunction, poly: Polynomial) -> complex:
    """``E_x f(x) omega^{-poly(x)}``."""
    f = _as_table(f)
    if (f.p, f.N) != (poly.p, poly.N):
        raise ShapeError("function and polynomial live on different domains")
    return f.inner(phase_table(poly).table)


# -- inverse-theorem oracle ------------------------------------------------------------

@dataclass(frozen=True)
class InverseResult:
    polynomial: Polynomial
    correlation: complex
    candidates: int
    mode: str
    seed: int | None = None


def _better(c: complex, best: complex | None, tol: float = 1e-9) -> bool:
    if best is None:
        return True
    if abs(c) > abs(best) + tol:
        return True
    # ties: prefer the phase-aligned candidate, then the earlier one
    return abs(abs(c) - abs(best)) <= tol and c.real > best.real + tol


def inverse_search(f, d: int, mode: str = "exhaustive", samples: int = 10_000,
                   seed: int | None = None) -> InverseResult:
    """Maximise ``|correlation(f, pi)|`` over polynomials of degree ``<= d``.

    Exhaustive mode walks every canonical coefficient vector; ties in
    magnitude go to the larger real part, then to the earlier candidate.
    """
    f = _as_table(f)
    p, N = f.p, f.N
    monos = monomials_up_to(d, p, N)
    M = len(monos)
    pts = fd.all_points(p, N)
    q = pts.shape[0]
    basis = np.zeros((M, q), dtype=np.int64)
    for j, m in enumerate(monos):
        basis[j] = Polynomial.from_terms(p, N, [(m, 1)]).evaluate_array(pts)
    omega_conj = np.conj(fd.roots_of_unity(p))
    if mode == "exhaustive":
        count = p ** M
        fd.check_budget(count * q, f"exhaustive inverse search over {count} candidates")
        place = p ** np.arange(M - 1, -1, -1, dtype=np.int64)

        def coeffs(a, b):
            return (np.arange(a, b, dtype=np.int64)[:, None] // place[None, :]) % p
    elif mode == "sampling":
        count = samples
        fd.check_budget(count * q, "sampled inverse search")
        rng = np.random.default_rng(seed)
        drawn = rng.integers(0, p, (samples, M))

        def coeffs(a, b):
            return drawn[a:b]
    else:
        raise DomainError(f"unknown search mode {mode!r}")

    def work(a, b):
        C = coeffs(a, b)
        res = (C @ basis) % p
        corr = (f.values[None, :] * omega_conj[res]).mean(axis=1)
        best_i, best_c = None, None
        for i, c in enumerate(corr):
            if _better(complex(c), best_c):
                best_i, best_c = i, complex(c)
        return C[best_i], best_c

    best_vec, best_c = None, None
    for vec, c in fd.map_reduce(work, count, max(1, fd.CHUNK * 4 // q)):
        if _better(c, best_c):
            best_vec, best_c = vec, c
    poly = Polynomial.from_terms(p, N, zip(monos, (int(v) for v in best_vec)))
    return InverseResult(poly, best_c, count, mode, seed if mode == "sampling" else None)
