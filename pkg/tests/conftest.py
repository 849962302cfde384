from functools import lru_cache

import pytest

from fourthmoment import arith
from fourthmoment.pipeline import weighted_eigensystem

SMALL_LEVELS = (11, 37, 67, 101)


def levels_up_to(bound, start=11):
    return [p for p in arith.primes_up_to(bound) if p >= start]


@lru_cache(maxsize=None)
def weighted(q: int, n_max: int | None = None):
    """Session-wide cache of weighted eigensystems (treat as read-only)."""
    return weighted_eigensystem(q, n_max)


@pytest.fixture(scope="session")
def es11():
    return weighted(11)


@pytest.fixture(scope="session")
def es37():
    return weighted(37)


def eta_coefficients_11(n_max: int) -> list[int]:
    """a_n of q prod (1 - q^k)^2 (1 - q^{11k})^2 by integer power series."""
    series = [0] * (n_max + 1)
    series[0] = 1
    for k in range(1, n_max + 1):
        for step, power in ((k, 2), (11 * k, 2)):
            if step > n_max:
                continue
            for _ in range(power):
                for i in range(n_max, step - 1, -1):
                    series[i] -= series[i - step]
    # shift by q^1
    return [0] + series[:n_max]
