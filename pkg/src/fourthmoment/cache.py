"""Plain-text persistence for eigensystems.

File layout (whitespace separated, one record per line)::

    EIGSYS 1
    level 37
    forms 2
    n_max 444
    precision 1e-10
    form 0 -1 6.53479251610000e-01
    lam 1.00000000000000e+00 ...          (n_max values, lambda(1..n_max))
    form 1 1 -
    lam ...
    end

Each form line carries the index, the root number (0 if undetermined) and
the harmonic weight, or ``-`` when no weights are attached. Every float is
written with 15 significant digits, so reading a file back and writing it
again reproduces it byte for byte.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .modsym import EigenSystem

MAGIC = "EIGSYS"
VERSION = 1
DIGITS = 15
ENV_CACHE_DIR = "FOURTHMOMENT_CACHE"


class CacheFormatError(ValueError):
    """Malformed file or unsupported format version."""


def _fmt(x: float) -> str:
    return f"{x:.{DIGITS - 1}e}" if np.isfinite(x) else repr(float(x))


def quantize(x) -> np.ndarray:
    """Values as they read back after a write (15 significant digits)."""
    arr = np.asarray(x, dtype=float)
    return np.vectorize(lambda v: float(_fmt(v)), otypes=[float])(arr) if arr.size else arr


def serialize(es: EigenSystem) -> str:
    g = es.num_forms
    lines = [f"{MAGIC} {VERSION}", f"level {es.level}", f"forms {g}", f"n_max {es.n_max}",
             f"precision {es.precision!r}"]
    for f in range(g):
        w = "-" if es.weights is None else _fmt(float(es.weights[f]))
        lines.append(f"form {f} {int(es.eps[f])} {w}")
        lines.append("lam " + " ".join(_fmt(float(v)) for v in es.lam[f, 1:]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse(text: str) -> EigenSystem:
    """Inverse of `serialize`.

    Raises:
        CacheFormatError: on a bad magic, a version other than 1, or any
            structural inconsistency.
    """
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0][0] != MAGIC or len(rows[0]) != 2:
        raise CacheFormatError("missing EIGSYS header")
    if rows[0][1] != str(VERSION):
        raise CacheFormatError(f"unsupported cache version {rows[0][1]} (expected {VERSION})")
    try:
        head = {r[0]: r[1] for r in rows[1:5]}
        q, g, n_max = int(head["level"]), int(head["forms"]), int(head["n_max"])
        precision = float(head["precision"])
    except (KeyError, ValueError, IndexError) as exc:
        raise CacheFormatError(f"bad header: {exc}") from exc
    body = rows[5:]
    if len(body) != 2 * g + 1 or body[-1] != ["end"]:
        raise CacheFormatError("truncated or oversized body")
    lam = np.zeros((g, n_max + 1))
    eps = np.zeros(g, dtype=int)
    weights = []
    for f in range(g):
        form, values = body[2 * f], body[2 * f + 1]
        if form[0] != "form" or int(form[1]) != f or len(form) != 4:
            raise CacheFormatError(f"bad form record {form}")
        eps[f] = int(form[2])
        if eps[f] not in (-1, 0, 1):
            raise CacheFormatError(f"root number {eps[f]} not in {{-1, 0, 1}}")
        weights.append(None if form[3] == "-" else float(form[3]))
        if values[0] != "lam" or len(values) != n_max + 1:
            raise CacheFormatError(f"form {f}: expected {n_max} eigenvalues")
        lam[f, 1:] = [float(v) for v in values[1:]]
    if any(w is None for w in weights) and not all(w is None for w in weights):
        raise CacheFormatError("weights present for some forms only")
    w_arr = None if (not weights or weights[0] is None) else np.array(weights)
    return EigenSystem(level=q, n_max=n_max, lam=lam, eps=eps, weights=w_arr,
                       precision=precision)


def atomic_write_text(path: Path, text: str) -> None:
    """Write through a temporary file in the same directory and rename.

    A failure at any point leaves the previous file (if any) untouched and
    removes the temporary file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_CACHE_DIR)
    return Path(env) if env else Path.home() / ".cache" / "fourthmoment"


def cache_path(cache_dir, q: int) -> Path:
    return Path(cache_dir) / f"eigsys_q{q}.txt"


def save(es: EigenSystem, cache_dir) -> Path:
    path = cache_path(cache_dir, es.level)
    atomic_write_text(path, serialize(es))
    return path


def load(cache_dir, q: int, n_max: int | None = None, need_weights: bool = True) -> EigenSystem | None:
    """Cached eigensystem for level q, or None if absent or insufficient.

    A cached file with a larger n_max is truncated to the requested size.
    """
    path = cache_path(cache_dir, q)
    if not path.exists():
        return None
    es = parse(path.read_text(encoding="ascii"))
    if n_max is not None and es.n_max < n_max:
        return None
    if need_weights and es.num_forms and es.weights is None:
        return None
    if n_max is not None and es.n_max > n_max:
        es = EigenSystem(level=es.level, n_max=n_max, lam=es.lam[:, : n_max + 1].copy(),
                         eps=es.eps, weights=es.weights, precision=es.precision)
    return es
