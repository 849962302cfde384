"""The amplifier c_l built from Hecke eigenvalues at primes and prime squares.

For a form f and length L the coefficients are c_p = lambda_f(p) at primes
p <= sqrt(L), c_{p^2} = -1, and zero elsewhere (primes dividing q dropped).
By the Hecke relation lambda(p)^2 - lambda(p^2) = 1 the amplified value
Lambda_f = sum_l c_l lambda_f(l) is exactly the number of those primes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arith, lfun


@dataclass
class AmplifierCoefficients:
    length: float
    level: int
    form: int
    entries: dict[int, float] = field(default_factory=dict)

    def norm2_sq(self) -> float:
        return math.fsum(v * v for v in self.entries.values())

    def norm1(self) -> float:
        return math.fsum(abs(v) for v in self.entries.values())


def amplifier_primes(q: int, L: float) -> list[int]:
    """Primes p <= sqrt(L) not dividing q."""
    return [p for p in arith.primes_up_to(math.isqrt(int(math.floor(L)))) if q % p]


def build_amplifier(es, form: int, L: float) -> AmplifierCoefficients:
    """Per-form coefficients; needs lambda(p^2) <= n_max, i.e. L <= n_max."""
    if L < 4:
        raise ValueError("amplifier length must be at least 4")
    q = es.level
    primes = amplifier_primes(q, L)
    if primes and primes[-1] ** 2 > es.n_max:
        raise ValueError(f"length {L} needs lambda up to {primes[-1] ** 2}, n_max is {es.n_max}")
    entries: dict[int, float] = {}
    for p in primes:
        entries[p] = float(es.lam[form, p])
        entries[p * p] = -1.0
    return AmplifierCoefficients(length=L, level=q, form=form, entries=dict(sorted(entries.items())))


def raw_amplified_value(es, form: int, coeffs: AmplifierCoefficients) -> float:
    """sum_l c_l lambda_f(l) straight from the definition."""
    return math.fsum(c * es.lam[form, l] for l, c in coeffs.entries.items())


def amplified_value(es, form: int, coeffs: AmplifierCoefficients, check_tol: float = 1e-8) -> float:
    """Lambda_f(c), returned in closed form as the number of amplifier primes.

    The raw sum is computed as well and must agree to ``check_tol``.
    """
    closed = float(len(amplifier_primes(es.level, coeffs.length)))
    raw = raw_amplified_value(es, form, coeffs)
    if abs(raw - closed) > check_tol:
        raise ArithmeticError(f"raw amplifier {raw} disagrees with prime count {closed}")
    return closed


def prime_count_normalized(L: float, q: int = 1) -> float:
    """Lambda log L / (2 sqrt L), eigenvalue-free (q = 1 means no exclusions)."""
    count = len(amplifier_primes(q, L)) if q > 1 else len(arith.primes_up_to(math.isqrt(int(L))))
    return count * math.log(L) / (2.0 * math.sqrt(L))


@dataclass
class AmplifiedRow:
    form: int
    weight: float
    amplified: float
    central_value: float
    term: float
    implied_bound: float
    convexity_ratio: float


def amplified_moment(es, L: float, delta: float = 25 / 3136) -> tuple[float, list[AmplifiedRow]]:
    """Amplified fourth moment sum_f w_f Lambda_f^2 L(f,1/2)^4 and per-form bounds.

    Since Lambda_f is the same for every form, each term is bounded by the
    total; the implied individual bound is (total/(w_f Lambda_f^2))^{1/4}.
    ``convexity_ratio`` is L(f,1/2)/q^{1/4 - delta}, a diagnostic only.
    """
    if es.weights is None:
        raise ValueError("eigensystem has no harmonic weights")
    central = lfun.central_values(es)
    rows = []
    terms = []
    for f in range(es.num_forms):
        coeffs = build_amplifier(es, f, L)
        lam = amplified_value(es, f, coeffs)
        term = float(es.weights[f]) * lam**2 * central[f] ** 4
        terms.append(term)
        rows.append([f, float(es.weights[f]), lam, float(central[f]), term])
    total = math.fsum(terms)
    out = []
    for f, w, lam, cv, term in rows:
        bound = (total / (w * lam**2)) ** 0.25 if lam > 0 else math.inf
        out.append(AmplifiedRow(f, w, lam, cv, term, bound,
                                cv / es.level ** (0.25 - delta)))
    return total, out


def weight_size_ratio(es) -> np.ndarray:
    """w_f q / log q per form; diagnostic for the w_f << log q / q bound."""
    return np.asarray(es.weights) * es.level / math.log(es.level)
