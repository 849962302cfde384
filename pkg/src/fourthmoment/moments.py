"""Twisted fourth moments M(l) = sum_f w_f lambda_f(l) L(f, 1/2)^4.

Both the harmonic average (weights w_f) and the natural average (uniform
weight 1/|family|) are built from one per-form breakdown. The main-term
polynomial is a plug-in; only its leading term (log q)^6/(60 pi^2) ships as
a preset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import lfun


def leading_main_term(x: float) -> float:
    """(1/(60 pi^2)) x^6, the leading term of the degree-6 main term in x = log q."""
    return x**6 / (60.0 * math.pi**2)


MAIN_TERM_PRESETS: dict[str, Callable[[float], float]] = {"leading": leading_main_term}


@dataclass
class MomentReport:
    level: int
    twist: int
    harmonic_value: float
    natural_value: float
    per_form: list[tuple[float, float, float]] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {"q": self.level, "l": self.twist, "g": len(self.per_form),
                "harmonic_value": self.harmonic_value, "natural_value": self.natural_value}


def fourth_moment(es, l: int, central: np.ndarray | None = None) -> MomentReport:
    """M(l) in harmonic and natural normalization from cached data.

    Args:
        es: eigensystem with weights filled (and root numbers, or they are
            computed on the fly).
        l: the twist, 1 <= l < q.
        central: optional precomputed L(f, 1/2) values.

    Raises:
        ValueError: if l >= q, l < 1, l beyond n_max, or weights are missing.
            An empty family (genus 0, e.g. q = 13) gives M(l) = 0.
    """
    q = es.level
    if l < 1 or l >= q:
        raise ValueError(f"twist must satisfy 1 <= l < q (got l={l}, q={q})")
    if l > es.n_max:
        raise ValueError("twist beyond the eigensystem's n_max")
    if es.num_forms == 0:
        return MomentReport(level=q, twist=l, harmonic_value=0.0, natural_value=0.0,
                            diagnostics={"empty_family": True})
    if es.weights is None:
        raise ValueError("eigensystem has no harmonic weights")
    if central is None:
        central = lfun.central_values(es)
    g = es.num_forms
    lam_l = es.lam[:, l]
    fourth = central**4
    per_form = [(float(lam_l[f]), float(central[f]), float(es.weights[f])) for f in range(g)]
    harmonic = math.fsum(es.weights * lam_l * fourth)
    natural = math.fsum(lam_l * fourth) / g if g else 0.0
    return MomentReport(level=q, twist=l, harmonic_value=harmonic, natural_value=natural,
                        per_form=per_form,
                        diagnostics={"weight_method": es.diagnostics.get("weight_method")})


@dataclass
class SweepRow:
    q: int
    l: int
    g: int | None
    harmonic_value: float | None
    natural_value: float | None
    residual: float | None = None
    ratio: float | None = None
    error: str | None = None


def moment_sweep(q_range: Sequence[int], l: int, main_term: Callable[[float], float] | None = None,
                 loader: Callable[[int], object] | None = None) -> list[SweepRow]:
    """M(l) for each level, with optional comparison against P(log q).

    Per-level failures are recorded in the row's ``error`` field and do not
    stop the sweep. ``loader(q)`` returns a weighted eigensystem; the default
    computes one.
    """
    if loader is None:
        from .pipeline import weighted_eigensystem as loader
    rows = []
    for q in q_range:
        try:
            es = loader(q)
            rep = fourth_moment(es, l)
            row = SweepRow(q=q, l=l, g=es.num_forms, harmonic_value=rep.harmonic_value,
                           natural_value=rep.natural_value)
            if main_term is not None:
                p = main_term(math.log(q))
                row.residual = rep.harmonic_value - p
                row.ratio = rep.harmonic_value / p if p else None
        except Exception as exc:  # recorded per level, sweep continues
            row = SweepRow(q=q, l=l, g=None, harmonic_value=None, natural_value=None,
                           error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows
