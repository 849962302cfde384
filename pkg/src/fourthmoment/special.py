"""Bessel kernels and smooth cutoff weights.

`bessel_j1` and `bessel_y0` are scalar evaluators built from two pieces: the
power series (summed in `decimal` arithmetic so that the alternating
cancellation near the switch point costs nothing) and the Hankel asymptotic
expansion for large arguments. The vectorized `j1` / `y0` wrappers call
scipy and are what the long trace-formula sums use.

The cutoffs are separable products of a fixed bump. `CutoffProfile` is the
weight F_{M,N}(x, y) = (MN)^{-1/2} B(x/M) B(y/N) with B = 1 on [1, 2] and
support [1/2, 3]; `SieveTestFunction` is a product of a C-infinity bump on
[1, 2] normalized so that it and its first two derivatives are bounded by 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Callable

import numpy as np
from scipy import special as _sp

# Above this argument the asymptotic expansion is used. At 25 the smallest
# Hankel term is below 1e-19, well under the float64 rounding floor.
SERIES_SWITCH = 25.0

_PI = Decimal("3.14159265358979323846264338327950288419716939937510582097494459")
_EULER_GAMMA = Decimal("0.57721566490153286060651209008240243104215933593992359880576723")
_SERIES_DIGITS = 60


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    return x


def j1_series(x: float) -> float:
    """J_1(x) from sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!)."""
    with localcontext() as ctx:
        ctx.prec = _SERIES_DIGITS
        h = Decimal(x) / 2
        h2 = h * h
        term = h
        total = term
        k = 0
        eps = Decimal(10) ** (-_SERIES_DIGITS + 5)
        while True:
            k += 1
            term = -term * h2 / (k * (k + 1))
            total += term
            if abs(term) < eps * (1 + abs(total)):
                return float(total)


def _j0_series_decimal(h2: Decimal, eps: Decimal) -> Decimal:
    term = Decimal(1)
    total = term
    k = 0
    while True:
        k += 1
        term = -term * h2 / (k * k)
        total += term
        if abs(term) < eps:
            return total


def y0_series(x: float) -> float:
    """Y_0(x) from the logarithmic series.

    Y_0(x) = (2/pi) [ (ln(x/2) + gamma) J_0(x)
             + sum_{k>=1} (-1)^(k+1) H_k (x^2/4)^k / (k!)^2 ],
    with H_k the harmonic numbers.
    """
    with localcontext() as ctx:
        ctx.prec = _SERIES_DIGITS
        h = Decimal(x) / 2
        h2 = h * h
        eps = Decimal(10) ** (-_SERIES_DIGITS + 5)
        j0 = _j0_series_decimal(h2, eps)
        term = Decimal(1)
        harmonic = Decimal(0)
        tail = Decimal(0)
        k = 0
        while True:
            k += 1
            term = -term * h2 / (k * k)
            harmonic += Decimal(1) / k
            piece = -term * harmonic
            tail += piece
            if abs(piece) < eps:
                break
        total = (2 / _PI) * ((h.ln() + _EULER_GAMMA) * j0 + tail)
        return float(total)


def _hankel_coefficients(nu: float, x: float) -> tuple[float, float]:
    """P(nu, x) and Q(nu, x), each truncated at its smallest term."""
    mu = 4.0 * nu * nu
    p_sum, q_sum = 0.0, 0.0
    term = 1.0  # a_k(nu) / x^k
    smallest = math.inf
    k = 0
    while True:
        mag = abs(term)
        if mag > smallest or mag < 1e-18:
            break
        smallest = mag
        if k % 2 == 0:
            p_sum += term if (k // 2) % 2 == 0 else -term
        else:
            q_sum += term if (k // 2) % 2 == 0 else -term
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if term == 0.0:
            break
    return p_sum, q_sum


def j1_asymptotic(x: float) -> float:
    """Hankel expansion of J_1 for large x."""
    p, q = _hankel_coefficients(1.0, x)
    w = x - 0.75 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(w) - q * math.sin(w))


def y0_asymptotic(x: float) -> float:
    """Hankel expansion of Y_0 for large x."""
    p, q = _hankel_coefficients(0.0, x)
    w = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.sin(w) + q * math.cos(w))


def bessel_j1(x: float) -> float:
    """Bessel function J_1 at a nonnegative real argument.

    Absolute error is at the float64 rounding level (well under 1e-12).

    Raises:
        ValueError: if x is negative or not finite.
    """
    x = _check_finite(x)
    if x < 0:
        raise ValueError("bessel_j1 expects x >= 0")
    if x == 0.0:
        return 0.0
    if x < SERIES_SWITCH:
        return j1_series(x)
    return j1_asymptotic(x)


def bessel_y0(x: float) -> float:
    """Bessel function Y_0 at a positive real argument.

    Raises:
        ValueError: if x <= 0 (logarithmic singularity) or not finite.
    """
    x = _check_finite(x)
    if x <= 0:
        raise ValueError("bessel_y0 expects x > 0")
    if x < SERIES_SWITCH:
        return y0_series(x)
    return y0_asymptotic(x)


def j1(x):
    """Vectorized J_1 for bulk sums."""
    return _sp.j1(x)


def y0(x):
    """Vectorized Y_0 for bulk sums."""
    return _sp.y0(x)


# --------------------------------------------------------------------------
# cutoff bump on [1/2, 3]


def smoothstep(t):
    """Quintic 6t^5 - 15t^4 + 10t^3 clamped to [0, 1]; C^2 at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def _smoothstep_d1(t):
    inside = (t > 0) & (t < 1)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30.0 * t * t * (t - 1.0) ** 2, 0.0)


def _smoothstep_d2(t):
    inside = (t > 0) & (t < 1)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 60.0 * t * (t - 1.0) * (2.0 * t - 1.0), 0.0)


def plateau_bump(u, order: int = 0):
    """The default profile B and its first two derivatives.

    B rises from 0 at u = 1/2 to 1 at u = 1, stays at 1 on [1, 2] and falls
    back to 0 at u = 3.
    """
    u = np.asarray(u, dtype=float)
    rise = (u - 0.5) / 0.5
    fall = 3.0 - u
    if order == 0:
        return np.where(u < 1.0, smoothstep(rise), np.where(u <= 2.0, 1.0, smoothstep(fall)))
    if order == 1:
        return np.where(u < 1.0, 2.0 * _smoothstep_d1(rise),
                        np.where(u <= 2.0, 0.0, -_smoothstep_d1(fall)))
    if order == 2:
        return np.where(u < 1.0, 4.0 * _smoothstep_d2(rise),
                        np.where(u <= 2.0, 0.0, _smoothstep_d2(fall)))
    raise ValueError("order must be 0, 1 or 2")


@dataclass(frozen=True)
class CutoffProfile:
    """Separable weight F(x, y) = (MN)^{-1/2} B(x/M) B(y/N).

    ``shape`` may be replaced by any callable supported in [1/2, 3] and
    bounded by 1; the support and size checks below then still apply.
    """

    scale_m: float
    scale_n: float
    shape: Callable = field(default=plateau_bump, compare=False)
    name: str = "plateau-quintic"

    def __post_init__(self):
        if not (self.scale_m > 0 and self.scale_n > 0):
            raise ValueError("scales must be positive")

    @property
    def norm(self) -> float:
        return 1.0 / math.sqrt(self.scale_m * self.scale_n)

    def support(self) -> tuple[tuple[float, float], tuple[float, float]]:
        M, N = self.scale_m, self.scale_n
        return (0.5 * M, 3.0 * M), (0.5 * N, 3.0 * N)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        bx = self.shape(x / self.scale_m)
        by = self.shape(y / self.scale_n)
        out = self.norm * bx * by
        return out if out.ndim else float(out)


def cutoff_eval(p: CutoffProfile, x: float, y: float) -> float:
    """Value of F_{M,N}(x, y); exactly 0 outside the support rectangle."""
    return p(x, y)


# --------------------------------------------------------------------------
# large-sieve test function


def _psi(t, order: int = 0):
    """exp(-1/(t(1-t))) on (0, 1) and its derivatives; 0 elsewhere."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    s = np.where(inside, t * (1.0 - t), 1.0)
    val = np.where(inside, np.exp(-1.0 / s), 0.0)
    if order == 0:
        return val
    h1 = (1.0 - 2.0 * t) / s**2
    if order == 1:
        return val * h1
    h2 = (-2.0 * s - 2.0 * (1.0 - 2.0 * t) ** 2) / s**3
    if order == 2:
        return val * (h2 + h1 * h1)
    raise ValueError("order must be 0, 1 or 2")


def _psi_normalizer() -> float:
    t = np.linspace(0.0, 1.0, 200_001)
    peak = max(float(np.max(np.abs(_psi(t, k)))) for k in range(3))
    # the grid maximum undershoots the true supremum by O(h^2); pad it
    return peak * (1.0 + 1e-6)


_PSI_SCALE = _psi_normalizer()


def unit_bump(u, order: int = 0):
    """C-infinity bump supported on [1, 2] with |B2|, |B2'|, |B2''| <= 1."""
    return _psi(np.asarray(u, dtype=float) - 1.0, order) / _PSI_SCALE


@dataclass(frozen=True)
class SieveTestFunction:
    """g(m, n, c) = B2(m/M) B2(n/N) B2(c/C), supported in the dyadic box."""

    scale_m: float
    scale_n: float
    scale_c: float

    def __call__(self, m, n, c):
        out = (unit_bump(np.asarray(m, dtype=float) / self.scale_m)
               * unit_bump(np.asarray(n, dtype=float) / self.scale_n)
               * unit_bump(np.asarray(c, dtype=float) / self.scale_c))
        return out if np.ndim(out) else float(out)

    def partial(self, j: int, k: int, l: int, m, n, c):
        """Exact mixed partial derivative of order (j, k, l)."""
        M, N, C = self.scale_m, self.scale_n, self.scale_c
        return (unit_bump(np.asarray(m, dtype=float) / M, j) / M**j
                * unit_bump(np.asarray(n, dtype=float) / N, k) / N**k
                * unit_bump(np.asarray(c, dtype=float) / C, l) / C**l)


def sieve_test_function(M: float, N: float, C: float) -> SieveTestFunction:
    if min(M, N, C) <= 0:
        raise ValueError("M, N, C must be positive")
    return SieveTestFunction(float(M), float(N), float(C))


def check_derivative_bounds(g: SieveTestFunction, points: int = 9, rel_step: float = 1e-3,
                            slack: float = 1e-3) -> bool:
    """Finite-difference check of |d^{j+k+l} g| <= M^-j N^-k C^-l, j,k,l <= 2.

    Central differences are taken on a grid of interior points of the support
    box; `slack` absorbs the O(h^2) difference error.
    """
    M, N, C = g.scale_m, g.scale_n, g.scale_c
    frac = np.linspace(1.02, 1.98, points)
    mm, nn, cc = np.meshgrid(frac * M, frac * N, frac * C, indexing="ij")
    hm, hn, hc = rel_step * M, rel_step * N, rel_step * C

    def diff(order, h, axis):
        if order == 0:
            return [(0.0, 1.0)]
        if order == 1:
            return [(-h, -0.5 / h), (h, 0.5 / h)]
        return [(-h, 1.0 / h**2), (0.0, -2.0 / h**2), (h, 1.0 / h**2)]

    for j in range(3):
        for k in range(3):
            for l in range(3):
                est = np.zeros_like(mm)
                for dm, wm in diff(j, hm, 0):
                    for dn, wn in diff(k, hn, 1):
                        for dc, wc in diff(l, hc, 2):
                            est += wm * wn * wc * g(mm + dm, nn + dn, cc + dc)
                bound = M**-j * N**-k * C**-l
                if np.max(np.abs(est)) > bound * (1.0 + slack):
                    return False
    return True
