"""Exact arithmetic primitives: divisor count, Mobius, Euler phi, modular
inverses and Kloosterman sums.

The scalar functions read from a shared smallest-prime-factor sieve when the
argument is inside the sieve range and fall back to trial division above it.
Kloosterman sums are evaluated directly over the units of the modulus; the
batch evaluators at the bottom of the module reuse FFT tables per modulus
(or per prime power, via twisted multiplicativity) for the long c-sums of the
trace formula.
"""

from __future__ import annotations

import math
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as _fft

DEFAULT_SIEVE_BOUND = 10**6


class _Sieve:
    """Lazily grown smallest-prime-factor table."""

    def __init__(self, bound: int = DEFAULT_SIEVE_BOUND):
        self.bound = bound
        self._spf: np.ndarray | None = None
        self._lock = threading.Lock()

    @property
    def spf(self) -> np.ndarray:
        if self._spf is None:
            with self._lock:
                if self._spf is None:
                    self._spf = spf_table(self.bound)
        return self._spf


def spf_table(n: int) -> np.ndarray:
    """Smallest prime factor of every integer 0..n (0 and 1 map to themselves)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for i in range(2, math.isqrt(n) + 1):
        if spf[i] == 0:
            block = spf[i * i :: i]
            block[block == 0] = i
    unset = np.nonzero(spf == 0)[0]
    spf[unset] = unset
    return spf


_SIEVE = _Sieve()


def set_sieve_bound(bound: int) -> None:
    """Replace the shared sieve; the table is rebuilt on next use."""
    global _SIEVE
    _SIEVE = _Sieve(bound)


def _check_positive(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    return n


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of n >= 1 as {p: exponent}."""
    n = _check_positive(n)
    out: dict[int, int] = {}
    if n <= _SIEVE.bound:
        spf = _SIEVE.spf
        while n > 1:
            p = int(spf[n])
            out[p] = out.get(p, 0) + 1
            n //= p
        return out
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    return factorize(n) == {n: 1}


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, a in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(a + 1)]
    return sorted(divs)


def divisor_tau(n: int) -> int:
    """Number of positive divisors of n."""
    return math.prod(a + 1 for a in factorize(n).values())


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(a > 1 for a in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def euler_phi(n: int) -> int:
    n = _check_positive(n)
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def _tables_from_spf(n: int):
    spf = spf_table(max(n, 2))[: n + 1]
    idx = np.arange(n + 1)
    p = spf.copy()
    p[:2] = 1
    rest = idx.copy()
    rest[0] = 1
    k = np.zeros(n + 1, dtype=np.int64)
    # strip the smallest prime completely: n = p^k * rest
    alive = idx >= 2
    while alive.any():
        hit = alive & (rest % np.maximum(p, 2) == 0)
        if not hit.any():
            break
        rest[hit] //= p[hit]
        k[hit] += 1
        alive = hit
    return spf, p, k, rest


def tau_table(n: int) -> np.ndarray:
    """Divisor counts tau(0..n) (entry 0 is 0)."""
    _, p, k, rest = _tables_from_spf(n)
    out = np.zeros(n + 1, dtype=np.int64)
    if n >= 1:
        out[1] = 1
    for i in range(2, n + 1):
        out[i] = (k[i] + 1) * out[rest[i]]
    return out


def phi_table(n: int) -> np.ndarray:
    """Euler phi(0..n) (entry 0 is 0), by the standard sieve."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in primes_up_to(n):
        phi[p::p] -= phi[p::p] // p
    return phi


def mobius_table(n: int) -> np.ndarray:
    """Mobius mu(0..n) (entry 0 is 0)."""
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    for p in primes_up_to(n):
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def mod_inverse(a: int, m: int) -> int:
    """Inverse of a modulo m by the extended Euclidean algorithm."""
    if m == 1:
        return 0
    r0, r1 = a % m, m
    s0, s1 = 1, 0
    while r1:
        quo = r0 // r1
        r0, r1 = r1, r0 - quo * r1
        s0, s1 = s1, s0 - quo * s1
    if r0 != 1:
        raise ValueError(f"{a} is not invertible modulo {m}")
    return s0 % m


def _primitive_root(modulus: int, p: int, a: int) -> int:
    """Generator of the cyclic unit group mod p^a, p odd (or modulus 2, 4)."""
    if modulus in (2, 4):
        return modulus - 1
    order = p - 1
    factors = list(factorize(order))
    for g in range(2, p):
        if all(pow(g, order // r, p) != 1 for r in factors):
            break
    if a > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _cyclic_units(modulus: int, p: int, a: int) -> tuple[np.ndarray, np.ndarray]:
    g = _primitive_root(modulus, p, a)
    order = euler_phi(modulus)
    powers = np.ones(1, dtype=np.int64)
    while len(powers) < order:
        step = pow(g, len(powers), modulus)
        powers = np.concatenate([powers, powers * step % modulus])
    powers = powers[:order]
    # (g^j)^-1 = g^(order - j)
    inverses = powers[(-np.arange(order)) % order]
    return powers, inverses


def _units_and_inverses(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Units x mod c and their inverses.

    Cyclic unit groups (odd prime powers, 2, 4) use a primitive-root power
    table; other moduli fall back to a vectorized extended Euclid.
    """
    if c == 1:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    fac = factorize(c)
    if len(fac) == 1:
        (p, a), = fac.items()
        if p != 2 or a <= 2:
            return _cyclic_units(c, p, a)
    return _euclid_units(c)


def _euclid_units(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Units mod c with inverses from a vectorized extended Euclid."""
    if c == 1:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    x = np.arange(c, dtype=np.int64)
    x = x[np.gcd(x, c) == 1]
    r0, r1 = x.copy(), np.full_like(x, c)
    s0, s1 = np.ones_like(x), np.zeros_like(x)
    while np.any(r1):
        nz = r1 != 0
        quo = np.zeros_like(x)
        quo[nz] = r0[nz] // r1[nz]
        r0, r1 = np.where(nz, r1, r0), np.where(nz, r0 - quo * r1, 0)
        s0, s1 = np.where(nz, s1, s0), np.where(nz, s0 - quo * s1, s1)
    return x, s0 % c


def kloosterman(m: int, n: int, c: int) -> float:
    """S(m, n; c) = sum over units x mod c of cos(2 pi (m x + n xbar) / c)."""
    c = int(c)
    if c < 1:
        raise ValueError(f"modulus must be >= 1, got {c}")
    if c == 1:
        return 1.0
    x, xinv = _euclid_units(c)
    phase = (int(m) % c * x + int(n) % c * xinv) % c
    return math.fsum(np.cos(2.0 * np.pi * phase / c))


def weil_bound(m: int, n: int, c: int) -> float:
    """tau(c) * gcd(m, n, c)^(1/2) * c^(1/2)."""
    g = math.gcd(math.gcd(int(m), int(n)), int(c))
    return divisor_tau(c) * math.sqrt(g) * math.sqrt(c)


@dataclass
class KloostermanTable:
    """Memoized S(m, n; c), keyed by (m mod c, n mod c, c)."""

    max_c: int
    entries: dict[tuple[int, int, int], float] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __call__(self, m: int, n: int, c: int) -> float:
        if c > self.max_c:
            raise ValueError(f"modulus {c} exceeds table cap {self.max_c}")
        key = (m % c, n % c, c)
        val = self.entries.get(key)
        if val is None:
            val = kloosterman(*key)
            with self._lock:
                self.entries[key] = val
                self.entries[(key[1], key[0], c)] = val
        return val


# --------------------------------------------------------------------------
# Batch evaluation

def _unit_lift(r: int, step: int, c: int) -> int:
    """A unit modulo c congruent to r modulo step (gcd(r, step) == 1)."""
    u = r % step if step > 1 else 1
    while math.gcd(u, c) != 1:
        u += step
    return u


def _build_first_arg_table(g: int, c: int) -> np.ndarray:
    """S(g, t; c) for every t mod c, one FFT over the units."""
    x, xinv = _units_and_inverses(c)
    a = np.zeros(c, dtype=complex)
    # sum_y e(g * ybar / c) e(t y / c), indexed by y = x
    a[x] = np.exp(2j * np.pi * ((g * xinv) % c) / c)
    return (c * _fft.ifft(a)).real


_cached_table = lru_cache(maxsize=4096)(_build_first_arg_table)


def _first_arg_table(g: int, c: int) -> np.ndarray:
    if c <= 4096:
        return _cached_table(g, c)
    return _build_first_arg_table(g, c)


def kloosterman_row(m: int, c: int) -> np.ndarray:
    """S(m, t; c) for t = 0..c-1.

    Uses S(g u, t; c) = S(g, t u; c) for a unit u, so only one table per
    divisor g = gcd(m, c) is built.
    """
    c = int(c)
    if c == 1:
        return np.ones(1)
    m %= c
    g = math.gcd(m, c)
    u = _unit_lift(m // g, c // g, c)
    table = _first_arg_table(g, c)
    t = np.arange(c, dtype=np.int64)
    return table[(t * u) % c]


def kloosterman_many(m: np.ndarray, n: np.ndarray, c: int) -> np.ndarray:
    """Vectorized S(m_i, n_i; c) for one modulus."""
    c = int(c)
    m = np.asarray(m, dtype=np.int64) % c
    n = np.asarray(n, dtype=np.int64) % c
    out = np.empty(np.broadcast(m, n).shape)
    m, n = np.broadcast_arrays(m, n)
    for mv in np.unique(m):
        sel = m == mv
        out[sel] = kloosterman_row(int(mv), c)[n[sel]]
    return out


def _valuation(x: np.ndarray, p: int, cap: int) -> tuple[np.ndarray, np.ndarray]:
    v = np.zeros_like(x)
    rest = x.copy()
    while True:
        hit = (rest % p == 0) & (v < cap) & (rest != 0)
        if not hit.any():
            return v, rest
        v[hit] += 1
        rest[hit] //= p


def _pow_mod(base: np.ndarray, exp: int, mod: int) -> np.ndarray:
    out = np.ones_like(base)
    b = base % mod
    while exp:
        if exp & 1:
            out = out * b % mod
        b = b * b % mod
        exp >>= 1
    return out


def kloosterman_progression(q: int, ms, ns, k_max: int,
                            k_min: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """S(m_j, n_j; q k) for k = k_min..k_max and every pair j.

    The modulus is split into prime powers; for c = P c' with gcd(P, c') = 1,
    S(m, n; c) = S(m c'bar, n c'bar; P) S(m Pbar, n Pbar; c'), and the prime
    power factor reads from a per-P FFT table. Work is grouped by prime power
    so each table is built once. Returns (moduli, values[k, j]).
    """
    ms = np.asarray(ms, dtype=np.int64)
    ns = np.asarray(ns, dtype=np.int64)
    if ms.shape != ns.shape or ms.ndim != 1:
        raise ValueError("ms and ns must be equal-length 1-d sequences")
    if np.any(ms < 1) or np.any(ns < 1):
        raise ValueError("pair entries must be positive")
    if k_min < 1:
        raise ValueError("k_min must be positive")
    ks = np.arange(k_min, k_max + 1, dtype=np.int64)
    cs = q * ks
    count = len(ks)
    values = np.ones((count, len(ms)))
    if count == 0:
        return cs, values

    # prime-power decomposition of every c = q k, grouped by (p, a)
    groups: dict[tuple[int, int], list[np.ndarray]] = defaultdict(list)
    spf = _SIEVE.spf if k_max <= _SIEVE.bound else spf_table(k_max)
    rest_q, v_q = ks.copy(), np.zeros(count, dtype=np.int64)
    while True:
        hit = rest_q % q == 0
        if not hit.any():
            break
        v_q[hit] += 1
        rest_q[hit] //= q
    for a in np.unique(v_q + 1):
        groups[(q, int(a))].append(np.nonzero(v_q + 1 == a)[0])
    rest = rest_q
    while True:
        alive = rest > 1
        if not alive.any():
            break
        idx = np.nonzero(alive)[0]
        p = spf[rest[idx]]
        for pv in np.unique(p):
            sub = idx[p == pv]
            a = np.zeros(len(sub), dtype=np.int64)
            r = rest[sub]
            while True:
                hit = r % pv == 0
                if not hit.any():
                    break
                a[hit] += 1
                r[hit] //= pv
            rest[sub] = r
            for av in np.unique(a):
                groups[(int(pv), int(av))].append(sub[a == av])

    for (p, a), chunks in groups.items():
        rows = np.concatenate(chunks)
        big = p**a
        cofactor = cs[rows] // big
        w = _pow_mod(cofactor % big, euler_phi(big) - 1, big)
        w2 = w * w % big
        v, mrest = _valuation(ms, p, a)
        for vv in np.unique(v):
            cols = np.nonzero(v == vv)[0]
            if vv >= a:
                # m = 0 mod P: Ramanujan sum, blind to the unit twist
                table = _first_arg_table(0, big)
                t = np.broadcast_to(ns[cols] % big, (len(rows), len(cols)))
            else:
                table = _first_arg_table(int(p**vv), big)
                t = ((ns[cols] % big) * (mrest[cols] % big)) % big
                t = (w2[:, None] * t[None, :]) % big
            values[np.ix_(rows, cols)] *= table[t]
    return cs, values
