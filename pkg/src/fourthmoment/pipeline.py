"""Convenience assembly: eigensystem, root numbers and weights in one call."""

from __future__ import annotations

from . import lfun, tracesums
from .modsym import EigenSystem, eigensystem


def default_n_max(q: int) -> int:
    """Coefficients needed by the central values and the symmetric-square weights."""
    return max(200, 12 * q)


def weighted_eigensystem(q: int, n_max: int | None = None, weights: str = "rankin-selberg",
                         petersson_c_max: int = 200_000, n_eq: int = 8,
                         rng_seed: int = 0) -> EigenSystem:
    """Eigensystem of level q with root numbers and harmonic weights filled.

    Args:
        weights: "rankin-selberg" (truncation-free) or "petersson" (least
            squares on the m = 1 column of the trace formula).
    """
    es = eigensystem(q, n_max or default_n_max(q), rng_seed=rng_seed)
    if es.num_forms == 0:
        return es
    lfun.fill_root_numbers(es)
    if weights == "rankin-selberg":
        tracesums.rankin_selberg_weights(es)
    elif weights == "petersson":
        tracesums.harmonic_weights(es, max(n_eq, es.num_forms), c_max=petersson_c_max,
                                   residual_tol=float("inf"))
    else:
        raise ValueError(f"unknown weight method {weights!r}")
    return es
