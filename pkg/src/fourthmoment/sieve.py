"""Large-sieve harness for trilinear forms in Kloosterman sums.

The trilinear form is

    sum_m a_m sum_n b_n sum_{(c, r) = 1} g(m, n, c) S(d m rbar, +-n; s c),

with rbar the inverse of r modulo s c, compared against the bound

    d^theta s C sqrt(r) (1 + X^-1)^{2 theta} / (1 + X)
        * (1 + X + sqrt(M/rs)) (1 + X + sqrt(N/rs)) |a|_2 |b|_2,
    X = sqrt(d M N) / (s C sqrt(r)),

with the epsilon factor and implied constant set to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import arith
from .special import SieveTestFunction, check_derivative_bounds, sieve_test_function


def _squarefree(n: int) -> bool:
    return arith.mobius(n) != 0


@dataclass
class SieveInstance:
    """One configuration of the trilinear form.

    ``a`` holds a_m for the integers m in (M, 2M] in increasing order, and
    ``b`` likewise for n in (N, 2N].
    """

    r: int
    s: int
    d: int
    M: float
    N: float
    C: float
    a: np.ndarray
    b: np.ndarray
    g: SieveTestFunction
    sign: int = 1

    def __post_init__(self):
        r, s, d = self.r, self.s, self.d
        if min(r, s, d) < 1:
            raise ValueError("r, s, d must be positive")
        if math.gcd(r, s) != 1 or math.gcd(r, d) != 1 or math.gcd(s, d) != 1:
            raise ValueError("r, s, d must be pairwise coprime")
        if not (_squarefree(r) and _squarefree(s)):
            raise ValueError("r and s must be square-free")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.a = np.asarray(self.a, dtype=complex)
        self.b = np.asarray(self.b, dtype=complex)
        if len(self.a) != len(self.m_range) or len(self.b) != len(self.n_range):
            raise ValueError("sequence lengths must match the dyadic ranges")

    @property
    def m_range(self) -> np.ndarray:
        return _dyadic(self.M)

    @property
    def n_range(self) -> np.ndarray:
        return _dyadic(self.N)

    @property
    def c_range(self) -> np.ndarray:
        cs = np.arange(max(1, math.ceil(self.C)), math.floor(2 * self.C) + 1)
        return cs[np.gcd(cs, self.r) == 1]

    @property
    def x_d(self) -> float:
        return math.sqrt(self.d * self.M * self.N) / (self.s * self.C * math.sqrt(self.r))


def _dyadic(X: float) -> np.ndarray:
    """Integers in (X, 2X]."""
    return np.arange(math.floor(X) + 1, math.floor(2 * X) + 1)


def trilinear_sum(inst: SieveInstance) -> complex:
    """Direct evaluation over the support of g, one modulus s c at a time."""
    ms, ns = inst.m_range, inst.n_range
    total = []
    gm = inst.g
    for c in inst.c_range:
        mod = int(inst.s * c)
        gv = gm(ms[:, None], ns[None, :], float(c))
        if not np.any(gv):
            continue
        rbar = arith.mod_inverse(inst.r, mod)
        first = (inst.d * ms % mod) * rbar % mod
        second = (inst.sign * ns) % mod
        S = arith.kloosterman_many(first[:, None], second[None, :], mod)
        weighted = inst.a[:, None] * inst.b[None, :] * gv * S
        total.append(weighted.sum())
    re = math.fsum(t.real for t in total)
    im = math.fsum(t.imag for t in total)
    return complex(re, im)


def trilinear_sum_naive(inst: SieveInstance) -> complex:
    """Reference triple loop with Kloosterman sums evaluated from scratch."""
    re, im = [], []
    for i, m in enumerate(inst.m_range):
        for j, n in enumerate(inst.n_range):
            for c in inst.c_range:
                w = inst.g(float(m), float(n), float(c))
                if w == 0.0:
                    continue
                mod = int(inst.s * c)
                rbar = pow(inst.r, -1, mod) if mod > 1 else 0
                S = arith.kloosterman(int(inst.d * m * rbar), int(inst.sign * n), mod)
                v = inst.a[i] * inst.b[j] * w * S
                re.append(v.real)
                im.append(v.imag)
    return complex(math.fsum(re), math.fsum(im))


def ls_bound_rhs(inst: SieveInstance, theta=Fraction(7, 64)) -> float:
    """The bound's value with C^epsilon dropped and implied constant 1."""
    theta = float(theta)
    if not 0.0 <= theta <= 0.25:
        raise ValueError("theta must lie in [0, 1/4]")
    X = inst.x_d
    rs = inst.r * inst.s
    shape = (inst.d**theta * inst.s * inst.C * math.sqrt(inst.r)
             * (1.0 + 1.0 / X) ** (2.0 * theta) / (1.0 + X)
             * (1.0 + X + math.sqrt(inst.M / rs)) * (1.0 + X + math.sqrt(inst.N / rs)))
    return shape * float(np.linalg.norm(inst.a)) * float(np.linalg.norm(inst.b))


def random_admissible(rng: np.random.Generator, bound: int = 7) -> tuple[int, int, int]:
    """Random pairwise coprime (r, s, d) <= bound with r, s square-free."""
    while True:
        r, s, d = (int(v) for v in rng.integers(1, bound + 1, size=3))
        if (_squarefree(r) and _squarefree(s) and math.gcd(r, s) == 1
                and math.gcd(r, d) == 1 and math.gcd(s, d) == 1):
            return r, s, d


def random_sequence(rng: np.random.Generator, length: int, kind: str = "rademacher") -> np.ndarray:
    if kind == "rademacher":
        return rng.choice([-1.0, 1.0], size=length).astype(complex)
    if kind == "unit-circle":
        return np.exp(2j * np.pi * rng.random(length))
    raise ValueError(f"unknown sequence kind {kind!r}")


@dataclass
class RatioStats:
    ratios: list[float]
    instances: list[tuple[int, int, int, int]]

    @property
    def max(self) -> float:
        return max(self.ratios)

    @property
    def mean(self) -> float:
        return float(np.mean(self.ratios))


def ratio_experiment(trials: int, size: float, rng_seed: int, theta=Fraction(7, 64),
                     kind: str = "rademacher") -> RatioStats:
    """|trilinear_sum| / ls_bound_rhs over random instances at M = N = C = size.

    The derivative condition on the test function is checked before any
    trial runs.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    g = sieve_test_function(size, size, size)
    if not check_derivative_bounds(g):
        raise ArithmeticError("test function fails the derivative condition")
    rng = np.random.default_rng(rng_seed)
    ratios, meta = [], []
    for _ in range(trials):
        r, s, d = random_admissible(rng)
        sign = int(rng.choice([-1, 1]))
        a = random_sequence(rng, len(_dyadic(size)), kind)
        b = random_sequence(rng, len(_dyadic(size)), kind)
        inst = SieveInstance(r, s, d, size, size, size, a, b, g, sign)
        ratios.append(abs(trilinear_sum(inst)) / ls_bound_rhs(inst, theta))
        meta.append((r, s, d, sign))
    return RatioStats(ratios, meta)
