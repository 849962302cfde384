"""Hecke eigenvalues of weight-2 newforms of prime level via modular symbols.

Manin symbols for Gamma_0(q) are the q + 1 points (c : d) of the projective
line over F_q, stored with index 0 for (0 : 1) and index 1 + d for (1 : d).
The space of modular symbols is their span modulo the two-term relation
x + xS = 0 and the three-term relation x + xT + xT^2 = 0. Working in the
quotient by the star involution (c : d) -> (-c : d) halves the dimension;
the kernel of the boundary map there is the cuspidal plus space, of
dimension equal to the genus of X_0(q).

All linear algebra on the symbol spaces is exact (fractions). Hecke
eigenvalues are then extracted in floating point: the left eigenvectors of a
random combination of Hecke matrices give linear functionals phi_f, and
a_f(p) = phi_f(T_p x) / phi_f(x) for a fixed Manin symbol x. Applying T_p to a
single symbol costs O(p log p), so eigenvalues at all primes up to a few
thousand are cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import arith


SPLIT_ATTEMPTS = 25


class EigenSeparationError(RuntimeError):
    """Eigenvalues of the splitting operator are too close to separate."""


# --------------------------------------------------------------------------
# exact sparse row reduction


def _reduce(relations: list[dict[int, int]], ncols: int):
    """Row-reduce a list of sparse integer relations over Q.

    Returns (pivots, free): pivots maps a pivot column to its fully reduced
    row (a dict with a 1 at the pivot and entries only in free columns), and
    free is the sorted list of non-pivot columns.
    """
    pivots: dict[int, dict[int, Fraction]] = {}
    for rel in relations:
        row = {k: Fraction(v) for k, v in rel.items() if v}
        changed = True
        while changed:
            changed = False
            for col in [c for c in row if c in pivots]:
                coef = row.get(col)
                if not coef:
                    continue
                for k, v in pivots[col].items():
                    nv = row.get(k, 0) - coef * v
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
                changed = True
        if not row:
            continue
        piv = min(row)
        scale = row[piv]
        row = {k: v / scale for k, v in row.items()}
        for other in pivots.values():
            coef = other.get(piv)
            if coef:
                for k, v in row.items():
                    nv = other.get(k, 0) - coef * v
                    if nv:
                        other[k] = nv
                    else:
                        other.pop(k, None)
        pivots[piv] = row
    free = [c for c in range(ncols) if c not in pivots]
    return pivots, free


def _nullspace(mat: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of the right kernel of a dense rational matrix."""
    rels = [{j: v for j, v in enumerate(row) if v} for row in mat]
    # _reduce expects integer-like entries only through Fraction(), which
    # accepts Fractions unchanged
    pivots, free = _reduce(rels, ncols)
    basis = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for p, row in pivots.items():
            vec[p] = -row.get(f, Fraction(0))
        basis.append(vec)
    return basis


def _solve_in_basis(basis: list[list[Fraction]], vec: list[Fraction]) -> list[Fraction]:
    """Coordinates of vec in the span of basis (exact; raises if outside)."""
    n, dim = len(basis), len(vec)
    # augmented system: columns are basis vectors
    rows = [[basis[j][i] for j in range(n)] + [vec[i]] for i in range(dim)]
    piv_rows = []
    r = 0
    for col in range(n):
        sel = next((i for i in range(r, dim) if rows[i][col] != 0), None)
        if sel is None:
            raise ValueError("basis is rank deficient")
        rows[r], rows[sel] = rows[sel], rows[r]
        pv = rows[r][col]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(dim):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_rows.append(r)
        r += 1
    for i in range(r, dim):
        if rows[i][n] != 0:
            raise ValueError("vector is not in the span of the basis")
    return [rows[i][n] for i in piv_rows]


# --------------------------------------------------------------------------
# Manin symbols


def _symbol_index(c: int, d: int, q: int) -> int:
    c %= q
    d %= q
    if c == 0:
        return 0
    return 1 + (d * pow(c, -1, q)) % q


def _symbol_rep(i: int) -> tuple[int, int]:
    return (0, 1) if i == 0 else (1, i - 1)


@dataclass
class ManinSymbolSpace:
    """Modular symbols of weight 2 for Gamma_0(q), q prime.

    Attributes:
        level: the prime q.
        symbols: the q + 1 representatives (c, d).
        relation_matrix: integer rows of the two- and three-term relations.
        star: integer matrix of (c : d) -> (-c : d) on the symbols.
        sign: 0 for the full space, +1 for the quotient by x - x*.
    """

    level: int
    symbols: list[tuple[int, int]]
    relation_matrix: np.ndarray
    star: np.ndarray
    sign: int = 0
    empty: bool = False
    # quotient data
    free: list[int] = field(default_factory=list, repr=False)
    coords: list[list[Fraction]] = field(default_factory=list, repr=False)
    boundary: list[list[Fraction]] = field(default_factory=list, repr=False)
    _cusp_basis: list[list[Fraction]] | None = field(default=None, repr=False)
    _inverses: np.ndarray | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        """Rank of the quotient by the relations (2g + 1 when sign = 0)."""
        return len(self.free)

    # -- symbol to quotient coordinates ----------------------------------

    def symbol_coords(self, i: int) -> list[Fraction]:
        return self.coords[i]

    def coords_of_counts(self, counts: np.ndarray) -> list[Fraction]:
        """Quotient coordinates of sum_i counts[i] * symbol_i (integer counts)."""
        out = [Fraction(0)] * self.dimension
        for i in np.nonzero(counts)[0]:
            ci = int(counts[i])
            for j, v in enumerate(self.coords[i]):
                if v:
                    out[j] += ci * v
        return out

    # -- modular symbols {a/b, c/d} ----------------------------------------

    def _zero_to(self, num: int, den: int, counts: np.ndarray, sgn: int) -> None:
        """Add sgn * {0, num/den} to counts via continued fractions."""
        q = self.level
        if den == 0:
            counts[0] += sgn  # {0, oo} is the symbol (0 : 1)
            return
        if num == 0:
            return
        if den < 0:
            num, den = -num, -den
        # convergents p_j/q_j; {0, a/b} = sum_{j=-1..n} {p_{j-1}/q_{j-1}, p_j/q_j}
        # and the j-th piece is the Manin symbol ((-1)^(j-1) q_j : q_{j-1})
        counts[0] += sgn  # j = -1
        q_prev2, q_prev = 1, 0
        a, b = num, den
        j = 0
        while b:
            t = a // b
            a, b = b, a - t * b
            q_cur = t * q_prev + q_prev2
            c = q_cur if j % 2 == 1 else -q_cur
            counts[_symbol_index(c, q_prev, q)] += sgn
            q_prev2, q_prev = q_prev, q_cur
            j += 1

    def _zero_to_many(self, nums: np.ndarray, dens: np.ndarray, counts: np.ndarray,
                      sgn: int) -> None:
        """Vectorized `_zero_to` for many cusps num/den, den >= 0."""
        q = self.level
        nums = np.asarray(nums, dtype=np.int64)
        dens = np.asarray(dens, dtype=np.int64)
        infinite = dens == 0
        counts[0] += sgn * int(infinite.sum())  # {0, oo} is the symbol (0 : 1)
        live = (nums != 0) & ~infinite
        a, b = nums[live], dens[live]
        counts[0] += sgn * len(a)
        q_prev2 = np.ones_like(a)
        q_prev = np.zeros_like(a)
        j = 0
        inv = self._inverse_table()
        while len(a):
            t = a // b
            a, b = b, a - t * b
            q_cur = t * q_prev + q_prev2
            c = q_cur if j % 2 == 1 else -q_cur
            cm = c % q
            idx = np.where(cm == 0, 0, 1 + (q_prev % q) * inv[cm] % q)
            np.add.at(counts, idx, sgn)
            q_prev2, q_prev = q_prev, q_cur
            keep = b != 0
            a, b, q_prev, q_prev2 = a[keep], b[keep], q_prev[keep], q_prev2[keep]
            j += 1

    def _inverse_table(self) -> np.ndarray:
        if self._inverses is None:
            q = self.level
            inv = np.zeros(q, dtype=np.int64)
            for x in range(1, q):
                inv[x] = pow(x, -1, q)
            self._inverses = inv
        return self._inverses

    def hecke_counts(self, n: int, i: int) -> np.ndarray:
        """T_n applied to Manin symbol i, as integer counts over symbols.

        Vectorized over the translations b; see `hecke_counts_reference`.
        """
        q = self.level
        counts = np.zeros(q + 1, dtype=np.int64)
        c0, d0 = self.symbols[i]
        for a in arith.divisors(n):
            if a % q == 0:
                continue
            d = n // a
            b = np.arange(d, dtype=np.int64)
            if c0 == 0:
                counts[0] += d
                self._zero_to_many(b, np.full(d, d), counts, -1)
            else:
                self._zero_to_many(b, np.full(d, d), counts, 1)
                num = b * d0 - a
                den = np.full(d, d * d0)
                self._zero_to_many(num, den, counts, -1)
        return counts

    def hecke_counts_reference(self, n: int, i: int) -> np.ndarray:
        """T_n applied to Manin symbol i, as integer counts over symbols.

        Uses T_n{alpha, beta} = sum {(a alpha + b)/d, (a beta + b)/d} over
        ad = n, 0 <= b < d, gcd(a, q) = 1, with the symbol (1 : d) written as
        {-1/d, 0} and (0 : 1) as {0, oo}.
        """
        q = self.level
        counts = np.zeros(q + 1, dtype=np.int64)
        c0, d0 = self.symbols[i]
        for a in arith.divisors(n):
            if a % q == 0:
                continue
            d = n // a
            for b in range(d):
                if c0 == 0:
                    # {0, oo} -> {b/d, oo}
                    self._zero_to(1, 0, counts, 1)
                    self._zero_to(b, d, counts, -1)
                else:
                    # {-1/d0, 0} -> {(b d0 - a)/(d d0), b/d}
                    self._zero_to(b, d, counts, 1)
                    self._zero_to(b * d0 - a, d * d0, counts, -1)
        return counts

    def hecke_on_quotient(self, n: int) -> list[list[Fraction]]:
        """Matrix of T_n on the quotient basis; column j = T_n(e_j)."""
        cols = [self.coords_of_counts(self.hecke_counts(n, i)) for i in self.free]
        dim = self.dimension
        return [[cols[j][r] for j in range(dim)] for r in range(dim)]

    # -- cuspidal plus subspace --------------------------------------------

    def cuspidal_basis(self) -> list[list[Fraction]]:
        """Basis (quotient coordinates) of the cuspidal subspace, sign-adjusted."""
        if self._cusp_basis is None:
            mats = [row for row in self.boundary]
            if self.sign == 0:
                # intersect with the +1 eigenspace of star
                st = self.star_on_quotient()
                dim = self.dimension
                mats = mats + [[st[r][c] - (1 if r == c else 0) for c in range(dim)]
                               for r in range(dim)]
            self._cusp_basis = _nullspace(mats, self.dimension)
        return self._cusp_basis

    def star_on_quotient(self) -> list[list[Fraction]]:
        cols = []
        for i in self.free:
            counts = np.zeros(self.level + 1, dtype=np.int64)
            counts[int(np.nonzero(self.star[:, i])[0][0])] = 1
            cols.append(self.coords_of_counts(counts))
        dim = self.dimension
        return [[cols[j][r] for j in range(dim)] for r in range(dim)]


def _relations(q: int, sign: int) -> list[dict[int, int]]:
    rels = []
    seen = set()
    for i in range(q + 1):
        c, d = _symbol_rep(i)
        j = _symbol_index(d, -c, q)  # (c, d) S
        key = ("S",) + tuple(sorted((i, j)))
        if key not in seen:
            seen.add(key)
            rel: dict[int, int] = {}
            for k in (i, j):
                rel[k] = rel.get(k, 0) + 1
            rels.append(rel)
        j1 = _symbol_index(d, -c - d, q)  # (c, d) T
        c1, d1 = d, -c - d
        j2 = _symbol_index(d1, -c1 - d1, q)  # (c, d) T^2
        key = ("T",) + tuple(sorted((i, j1, j2)))
        if key not in seen:
            seen.add(key)
            rel = {}
            for k in (i, j1, j2):
                rel[k] = rel.get(k, 0) + 1
            rels.append(rel)
        if sign:
            js = _symbol_index(-c, d, q)
            if js != i:
                rels.append({i: 1, js: -sign})
    return rels


def _relation_matrix(rels: list[dict[int, int]], n: int) -> np.ndarray:
    mat = np.zeros((len(rels), n), dtype=np.int64)
    for r, rel in enumerate(rels):
        for k, v in rel.items():
            mat[r, k] += v
    return mat


def build_space(q: int, sign: int = 0) -> ManinSymbolSpace:
    """Manin symbol space of prime level q.

    Levels 2, 3, 5, 7 are accepted and flagged ``empty`` (no cusp forms).

    Args:
        q: a prime.
        sign: 0 for the full space, +1 to quotient by the star involution.

    Raises:
        ValueError: for composite q or sign outside {0, 1}.
    """
    q = int(q)
    if not arith.is_prime(q):
        raise ValueError(f"level must be prime, got {q}")
    if sign not in (0, 1):
        raise ValueError("sign must be 0 or 1")
    n = q + 1
    symbols = [_symbol_rep(i) for i in range(n)]
    rels = _relations(q, sign)
    star = np.zeros((n, n), dtype=np.int64)
    for i, (c, d) in enumerate(symbols):
        star[_symbol_index(-c, d, q), i] = 1
    pivots, free = _reduce(rels, n)
    coords = []
    pos = {f: k for k, f in enumerate(free)}
    for i in range(n):
        vec = [Fraction(0)] * len(free)
        if i in pos:
            vec[pos[i]] = Fraction(1)
        else:
            for k, v in pivots[i].items():
                if k != i:
                    vec[pos[k]] -= v
        coords.append(vec)
    # boundary: (c : d) -> [cusp of c] - [cusp of d]; the two cusps of
    # X_0(q) are oo (q | x) and 0 (otherwise). Rows: oo, 0.
    boundary = [[Fraction(0)] * len(free) for _ in range(2)]
    for k, i in enumerate(free):
        c, d = symbols[i]
        boundary[0 if c % q == 0 else 1][k] += 1
        boundary[0 if d % q == 0 else 1][k] -= 1
    space = ManinSymbolSpace(
        level=q, symbols=symbols, relation_matrix=_relation_matrix(rels, n),
        star=star, sign=sign, empty=q < 11, free=free, coords=coords, boundary=boundary)
    return space


def genus_x0(q: int) -> int:
    """Genus of X_0(q) for a prime q."""
    if q == 2 or q == 3:
        return 0
    nu2 = 2 if q % 4 == 1 else 0
    nu3 = 2 if q % 3 == 1 else 0
    g = Fraction(q + 1, 12) - Fraction(nu2, 4) - Fraction(nu3, 3)
    return int(g)


def cuspidal_plus_dimension(space: ManinSymbolSpace) -> int:
    """Dimension of the star-fixed part of the cuspidal subspace."""
    return len(space.cuspidal_basis())


def _restrict(space: ManinSymbolSpace, mat: list[list[Fraction]]) -> list[list[Fraction]]:
    basis = space.cuspidal_basis()
    dim = space.dimension
    cols = []
    for v in basis:
        image = [sum((mat[r][c] * v[c] for c in range(dim) if v[c]), Fraction(0))
                 for r in range(dim)]
        cols.append(_solve_in_basis(basis, image))
    g = len(basis)
    return [[cols[j][i] for j in range(g)] for i in range(g)]


def hecke_matrix(space: ManinSymbolSpace, n: int, bound: int = 10**4) -> np.ndarray:
    """Exact matrix of T_n on the cuspidal plus subspace.

    Returns an integer array when every entry is integral (the usual case),
    otherwise an object array of Fractions.

    Raises:
        ValueError: for n < 1, n > bound, or gcd(n, q) > 1 with n != q.
    """
    n = int(n)
    q = space.level
    if n < 1:
        raise ValueError("n must be positive")
    if n > bound:
        raise ValueError(f"n exceeds the configured bound {bound}")
    if math.gcd(n, q) != 1 and n != q:
        raise ValueError("n must be coprime to the level, or equal to it")
    mat = _restrict(space, space.hecke_on_quotient(n))
    if all(v.denominator == 1 for row in mat for v in row):
        return np.array([[int(v) for v in row] for row in mat], dtype=np.int64).reshape(
            len(mat), len(mat))
    return np.array(mat, dtype=object)


# --------------------------------------------------------------------------
# eigensystems


@dataclass
class EigenSystem:
    """Normalized Hecke eigenvalues of every newform of prime level q.

    ``lam[f, n]`` is lambda_f(n) = a_f(n)/sqrt(n) for 1 <= n <= n_max
    (column 0 is unused). ``eps[f]`` is the root number (0 if not yet
    determined) and ``weights[f]`` the harmonic weight, or None.
    """

    level: int
    n_max: int
    lam: np.ndarray
    eps: np.ndarray
    weights: np.ndarray | None = None
    precision: float = 1e-10
    diagnostics: dict = field(default_factory=dict)

    @property
    def num_forms(self) -> int:
        return self.lam.shape[0]

    def __len__(self) -> int:
        return self.num_forms

    def lam_at(self, form: int, n: int) -> float:
        return float(self.lam[form, n])


def _split_operator(space, primes, rng):
    coeffs = rng.integers(-50, 51, size=len(primes))
    coeffs[0] = coeffs[0] or 1
    g = cuspidal_plus_dimension(space)
    total = np.zeros((g, g))
    for c, p in zip(coeffs, primes):
        total += int(c) * hecke_matrix(space, p).astype(float)
    return total, coeffs


def _extend_multiplicatively(ap: dict[int, np.ndarray], q: int, n_max: int,
                             g: int) -> np.ndarray:
    lam = np.zeros((g, n_max + 1))
    lam[:, 1] = 1.0
    spf = arith.spf_table(max(n_max, 2))
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        if m > 1:
            lam[:, n] = lam[:, m] * lam[:, n // m]
            continue
        # prime power p^k
        lp = ap.get(p)
        if lp is None:
            lam[:, n] = np.nan
            continue
        if k == 1:
            lam[:, n] = lp
        elif p == q:
            lam[:, n] = lp * lam[:, n // p]
        elif k == 2:
            lam[:, n] = lp * lp - 1.0
        else:
            lam[:, n] = lp * lam[:, n // p] - lam[:, n // (p * p)]
    return lam


def _cuspidal_spectrum(split: np.ndarray) -> np.ndarray:
    """Sorted real eigenvalues of the splitting operator, checked for gaps."""
    vals = np.linalg.eigvals(split)
    if np.max(np.abs(vals.imag)) > 1e-7:
        raise EigenSeparationError("splitting operator has non-real spectrum")
    vals = np.sort(vals.real)
    if len(vals) > 1:
        gap = float(np.min(np.diff(vals)))
        scale = max(1.0, float(np.max(np.abs(vals))))
        if gap < 1e-6 * scale:
            raise EigenSeparationError(
                f"eigenvalue gap {gap:.3g} below tolerance; retry with more split primes")
    return vals


def _symbol_functionals(space: ManinSymbolSpace, primes, coeffs, cusp_vals):
    """Left eigenvectors of the splitting operator on the whole quotient.

    The quotient carries one extra (Eisenstein) eigenvector besides the
    cuspidal ones; it is recognized by its eigenvalue sum c_i (1 + p_i).
    Returns functionals as arrays over the q + 1 Manin symbols.
    """
    dim = space.dimension
    total = np.zeros((dim, dim))
    for c, p in zip(coeffs, primes):
        mat = space.hecke_on_quotient(p)
        total += int(c) * np.array([[float(v) for v in row] for row in mat])
    vals, vecs = np.linalg.eig(total.T)
    vals, vecs = vals.real, vecs.real
    coord = np.array([[float(v) for v in row] for row in space.coords])  # (q+1, dim)
    funcs = []
    for lam in cusp_vals:
        k = int(np.argmin(np.abs(vals - lam)))
        if abs(vals[k] - lam) > 1e-6 * max(1.0, abs(lam)):
            raise EigenSeparationError("cuspidal eigenvalue not found on the full space")
        funcs.append(coord @ vecs[:, k])
    return np.array(funcs)


def eigensystem(q: int, n_max: int, rng_seed: int = 0, split_primes: int = 4,
                prime_bound: int | None = None) -> EigenSystem:
    """Hecke eigenvalues lambda_f(n), n <= n_max, for every newform of level q.

    The root numbers are left undetermined (0); `lfun.root_number` fills them.
    With ``prime_bound`` set, a_p is computed only for p <= prime_bound and
    lambda(n) is NaN whenever n has a larger prime factor.

    Raises:
        ValueError: for composite q or n_max < 2.
        EigenSeparationError: if every random splitting operator tried has
            clustered eigenvalues; retry with another seed or more split primes.
    """
    q = int(q)
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    space = build_space(q, sign=1)
    g = cuspidal_plus_dimension(space)
    if g == 0:
        return EigenSystem(level=q, n_max=n_max, lam=np.zeros((0, n_max + 1)),
                           eps=np.zeros(0, dtype=int), diagnostics={"genus": 0})
    primes = [p for p in arith.primes_up_to(60) if p != q][:split_primes]
    rng = np.random.default_rng(rng_seed)
    failure = None
    for attempt in range(1, SPLIT_ATTEMPTS + 1):
        split, coeffs = _split_operator(space, primes, rng)
        try:
            cusp_vals = _cuspidal_spectrum(split)
            # the Eisenstein vector has T_p-eigenvalue 1 + p and must stay apart
            eis = float(sum(int(c) * (1 + p) for c, p in zip(coeffs, primes)))
            scale = max(1.0, abs(eis), float(np.max(np.abs(cusp_vals))))
            if np.min(np.abs(cusp_vals - eis)) < 1e-6 * scale:
                raise EigenSeparationError("a cuspidal eigenvalue collides with the Eisenstein one")
            funcs = _symbol_functionals(space, primes, coeffs, cusp_vals)
            break
        except EigenSeparationError as exc:
            failure = exc
    else:
        raise EigenSeparationError(f"{SPLIT_ATTEMPTS} splitting attempts failed: {failure}")
    # one shared anchor symbol when every functional is well away from zero
    # there; otherwise each form gets the symbol where it is largest
    rel = np.abs(funcs) / np.max(np.abs(funcs), axis=1, keepdims=True)
    shared = int(np.argmax(np.min(rel, axis=0)))
    if rel[:, shared].min() > 1e-2:
        anchors = [shared] * g
    else:
        anchors = [int(np.argmax(r)) for r in rel]
    all_primes = arith.primes_up_to(min(n_max, prime_bound or n_max))
    ap: dict[int, np.ndarray] = {}
    for p in all_primes:
        vals = np.empty(g)
        cache: dict[int, np.ndarray] = {}
        for k, (f, x) in enumerate(zip(funcs, anchors)):
            if x not in cache:
                cache[x] = space.hecke_counts(p, x).astype(float)
            vals[k] = (cache[x] @ f) / f[x]
        ap[p] = vals / math.sqrt(p)
    deviation = 0.0
    if q in ap:
        aq = ap[q] * math.sqrt(q)
        deviation = float(np.max(np.abs(np.abs(aq) - 1.0)))
        ap[q] = np.sign(aq) / math.sqrt(q)
    lam = _extend_multiplicatively(ap, q, n_max, g)
    # deterministic order: lexicographic in rounded (lambda(2), lambda(3), ...)
    keys = [tuple(round(float(lam[f, p]), 6) for p in all_primes) for f in range(g)]
    order = sorted(range(g), key=lambda f: keys[f])
    lam = lam[order]
    residual = _hecke_residual_primes(space, funcs[order], [anchors[i] for i in order],
                                      lam, primes)
    return EigenSystem(
        level=q, n_max=n_max, lam=lam, eps=np.zeros(g, dtype=int),
        diagnostics={"genus": g, "level_eigenvalue_deviation": deviation,
                     "split_coefficients": [int(c) for c in coeffs],
                     "split_attempts": attempt,
                     "split_primes": primes, "eigen_residual": residual})


def _hecke_residual_primes(space, funcs, anchors, lam, primes) -> float:
    """max |phi_f T_p - a_p phi_f| over cuspidal symbols, small primes."""
    worst = 0.0
    basis = space.cuspidal_basis()
    coord_free = [space.free[j] for j in range(space.dimension)]
    for p in primes:
        mat = space.hecke_on_quotient(p)
        matf = np.array([[float(v) for v in row] for row in mat])
        for k, f in enumerate(funcs):
            # phi restricted to quotient coordinates
            w = f[coord_free]
            for v in basis:
                vf = np.array([float(x) for x in v])
                lhs = w @ (matf @ vf)
                rhs = lam[k, p] * math.sqrt(p) * (w @ vf)
                worst = max(worst, abs(lhs - rhs) / max(1.0, float(np.max(np.abs(w)))))
    return worst


def hecke_relation_residual(es: EigenSystem, limit: int = 1000) -> float:
    """max |lambda(m)lambda(n) - sum_{d | (m,n), (d,q)=1} lambda(mn/d^2)| over mn <= limit."""
    limit = min(limit, es.n_max)
    q = es.level
    worst = 0.0
    for m in range(1, limit + 1):
        for n in range(m, limit // m + 1):
            g = math.gcd(m, n)
            rhs = np.zeros(es.num_forms)
            for d in arith.divisors(g):
                if d % q:
                    rhs += es.lam[:, m * n // (d * d)]
            diff = es.lam[:, m] * es.lam[:, n] - rhs
            if diff.size:
                worst = max(worst, float(np.max(np.abs(diff))))
    return worst
