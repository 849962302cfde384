"""Root numbers and central values of L(f, s) from Hecke eigenvalues.

For a weight-2 newform of prime level q the completed L-function is
Lambda(s) = (sqrt(q)/2pi)^s Gamma(s + 1/2) L(f, s) in the unitary
normalization, with Lambda(s) = eps Lambda(1 - s). Shifting the contour of
(1/2pi i) int Lambda(1/2 + z) A^{-z} dz/z gives, for every A > 0,

    L(f, 1/2) = S(A) + eps S(1/A),
    S(A) = sum_n lambda(n) n^{-1/2} exp(-2 pi n A / sqrt(q)).

The sum converges geometrically, and the A-independence of the right-hand
side is what identifies eps.

The same module evaluates L(sym^2 f, 1) through a smoothed approximate
functional equation; it feeds the Rankin-Selberg route to the harmonic
weights in `tracesums`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import loggamma

from . import arith
from .modsym import EigenSystem

AFE_TOL = 1e-10
ROOT_SAMPLES = (0.8, 1.25)
ROOT_FALLBACK = (0.5, 0.8, 1.25, 2.0)
CONSISTENCY_TOL = 1e-8


class InsufficientCoefficientsError(ValueError):
    """The eigensystem does not reach far enough for the requested accuracy."""


class IndeterminateSignError(RuntimeError):
    """Neither or both signs make the functional equation A-independent."""


@dataclass
class CentralValue:
    form_index: int
    epsilon: int
    value: float
    truncation_length: int
    est_error: float


def required_terms(q: int, A: float, tol: float = AFE_TOL) -> int:
    """Smallest N with the Deligne-bound tail of S(A) beyond N below tol.

    Uses |lambda(n)| <= tau(n) <= 2 sqrt(n), so each tail term is at most
    2 exp(-alpha n) with alpha = 2 pi A / sqrt(q).
    """
    alpha = 2.0 * math.pi * A / math.sqrt(q)
    # 2 e^{-alpha (N+1)} / (1 - e^{-alpha}) <= tol
    bound = math.log(2.0 / (tol * (1.0 - math.exp(-alpha)))) / alpha
    return max(1, math.ceil(bound))


def _tail_bound(q: int, A: float, N: int) -> float:
    alpha = 2.0 * math.pi * A / math.sqrt(q)
    return 2.0 * math.exp(-alpha * (N + 1)) / (1.0 - math.exp(-alpha))


def afe_sum(es: EigenSystem, form: int, A: float, tol: float = AFE_TOL) -> float:
    """S(A) = sum_n lambda_f(n) n^{-1/2} exp(-2 pi n A / sqrt(q)).

    Raises:
        ValueError: if A <= 0.
        InsufficientCoefficientsError: if n_max is below `required_terms`.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    N = required_terms(es.level, A, tol)
    if N > es.n_max:
        raise InsufficientCoefficientsError(
            f"need lambda(n) up to n = {N} for A = {A}, eigensystem has {es.n_max}")
    n = np.arange(1, N + 1)
    terms = es.lam[form, 1:N + 1] / np.sqrt(n) * np.exp(-2.0 * math.pi * n * A / math.sqrt(es.level))
    return math.fsum(terms)


def _sign_spreads(es: EigenSystem, form: int, samples) -> dict[int, float]:
    values = {A: afe_sum(es, form, A) for A in set(samples) | {1.0 / A for A in samples}}
    spreads = {}
    for eps in (1, -1):
        lv = [values[A] + eps * values[1.0 / A] for A in samples]
        spreads[eps] = max(lv) - min(lv)
    return spreads


def root_number(es: EigenSystem, form: int) -> int:
    """The sign eps in Lambda(s) = eps Lambda(1 - s), found by A-consistency.

    The pair (0.8, 1.25) on its own is reciprocal, so under eps = +1 the two
    values coincide identically and only eps = -1 is really tested. The
    decision is therefore always made on the wider set (0.5, 0.8, 1.25, 2.0),
    which contains non-reciprocal pairs and so tests both signs.

    Raises:
        IndeterminateSignError: if both or neither sign is consistent.
    """
    spreads = _sign_spreads(es, form, ROOT_FALLBACK)
    ok = [eps for eps, sp in spreads.items() if sp < CONSISTENCY_TOL]
    if len(ok) != 1:
        raise IndeterminateSignError(
            f"form {form}: spreads {spreads[1]:.3g} (+1), {spreads[-1]:.3g} (-1)")
    return ok[0]


def fill_root_numbers(es: EigenSystem) -> EigenSystem:
    es.eps = np.array([root_number(es, f) for f in range(es.num_forms)], dtype=int)
    return es


def central_value(es: EigenSystem, form: int) -> CentralValue:
    """L(f, 1/2) = (1 + eps) S(1); exactly zero when eps = -1."""
    eps = int(es.eps[form]) if es.eps[form] else root_number(es, form)
    N = required_terms(es.level, 1.0)
    if eps == -1:
        return CentralValue(form, -1, 0.0, 0, 0.0)
    value = 2.0 * afe_sum(es, form, 1.0)
    return CentralValue(form, eps, value, N, 2.0 * _tail_bound(es.level, 1.0, N))


def central_values(es: EigenSystem) -> np.ndarray:
    return np.array([central_value(es, f).value for f in range(es.num_forms)])


def sign_table(es: EigenSystem) -> list[tuple[int, int, int]]:
    """(form, eps, sign of lambda(q)): the empirical eps versus lambda(q) relation."""
    return [(f, int(es.eps[f]), int(np.sign(es.lam[f, es.level])))
            for f in range(es.num_forms)] if es.level <= es.n_max else []


# --------------------------------------------------------------------------
# L(sym^2 f, 1)


def _log_gamma_factor(s):
    """log of Gamma_R(s + 1) Gamma_C(s + 1) for the symmetric square."""
    s = np.asarray(s, dtype=complex)
    return (-(s + 1) / 2 * math.log(math.pi) + loggamma((s + 1) / 2)
            + math.log(2.0) - (s + 1) * math.log(2 * math.pi) + loggamma(s + 1))


def afe_cutoff(s: float, y, h: float = 0.05):
    """V_s(y) = (1/2 pi i) int_(sigma) gamma(s+z)/gamma(s) y^{-z} dz/z.

    gamma is the symmetric-square gamma factor, which decays like
    exp(-3 pi |t| / 4) on vertical lines, so the trapezoid rule converges
    geometrically. For each y the line Re z = sigma is placed near the
    saddle of |y^{-z} gamma(s+z)| so that the integral carries no
    cancellation; V_s(y) itself decays like exp(-c y^{2/3}).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty(y.shape)
    sig_grid = np.linspace(0.25, 40.0, 160)
    log_mag = _log_gamma_factor(s + sig_grid).real - _log_gamma_factor(s).real - np.log(sig_grid)
    log_y = np.log(y)
    choice = np.argmin(log_mag[None, :] - sig_grid[None, :] * log_y[:, None], axis=1)
    # points sharing a contour share the gamma evaluations
    for k in np.unique(choice):
        sigma = float(sig_grid[k])
        idx = np.nonzero(choice == k)[0]
        t_max = 60.0 + 3.0 * sigma
        t = np.arange(0.0, t_max + h / 2, h)
        z = sigma + 1j * t
        w = np.full(t.shape, h)
        w[0] = h / 2
        g = np.exp(_log_gamma_factor(s + z) - _log_gamma_factor(s)) / z * w
        for j0 in range(0, len(idx), 256):
            sel = idx[j0:j0 + 256]
            # conjugate symmetry in t: (1/2pi) int_R = (1/pi) Re int_0^inf
            vals = np.exp(-z[None, :] * log_y[sel, None]) @ g
            out[sel] = vals.real / math.pi
    return out


@lru_cache(maxsize=64)
def _sym2_kernels(q: int, scale: float, tol: float):
    """Truncation length N and the cutoff values V_1(n/(qX)), V_0(nX/q), n <= N."""
    N = max(q, 8)
    while True:
        v1 = afe_cutoff(1.0, [N / (q * scale)])[0]
        v0 = afe_cutoff(0.0, [N * scale / q])[0]
        if max(abs(v1) / N, abs(v0)) * N * 10 < tol:
            break
        N = int(N * 1.2) + 1
    n = np.arange(1, N + 1, dtype=float)
    return N, afe_cutoff(1.0, n / (q * scale)), afe_cutoff(0.0, n * scale / q)


def symmetric_square_coefficients(es: EigenSystem, form: int, n_max: int) -> np.ndarray:
    """Dirichlet coefficients b_n of L(sym^2 f, s), n <= n_max.

    Euler factor 1 - lambda(p^2) X + lambda(p^2) X^2 - X^3 at p != q and
    1 - X/q at q.
    """
    q = es.level
    primes = arith.primes_up_to(n_max)
    if primes and primes[-1] > es.n_max:
        raise InsufficientCoefficientsError(
            f"need lambda(p) for p <= {n_max}, eigensystem has {es.n_max}")
    b = np.zeros(n_max + 1)
    b[1] = 1.0
    local: dict[int, list[float]] = {}
    for p in primes:
        seq = [1.0]
        if p == q:
            k = 1
            while p**k <= n_max:
                seq.append(seq[-1] / q)
                k += 1
        else:
            lp = es.lam[form, p]
            lp2 = lp * lp - 1.0
            k = 1
            while p**k <= n_max:
                nxt = lp2 * seq[k - 1]
                if k >= 2:
                    nxt -= lp2 * seq[k - 2]
                if k >= 3:
                    nxt += seq[k - 3]
                seq.append(nxt)
                k += 1
        local[p] = seq
    spf = arith.spf_table(max(n_max, 2))
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        b[n] = local[p][k] * b[m]
    return b


def symmetric_square_at_one(es: EigenSystem, form: int, scale: float = 1.0,
                            tol: float = 1e-13) -> float:
    """L(sym^2 f, 1) via the smoothed approximate functional equation.

    With conductor q^2, root number +1 and a free balance parameter X,
    L(1) = sum b_n/n V_1(n/(qX)) + (2 pi^2/q) sum b_n V_0(nX/q).
    The result must not depend on X, which makes ``scale`` a self-check.
    """
    q = es.level
    N, v1, v0 = _sym2_kernels(q, float(scale), float(tol))
    if N > es.n_max:
        raise InsufficientCoefficientsError(
            f"L(sym^2, 1) needs lambda(p) for p <= {N}; eigensystem has {es.n_max}")
    b = symmetric_square_coefficients(es, form, N)
    n = np.arange(1, N + 1, dtype=float)
    first = b[1:] / n * v1
    second = b[1:] * v0
    return math.fsum(first) + 2.0 * math.pi**2 / q * math.fsum(second)
