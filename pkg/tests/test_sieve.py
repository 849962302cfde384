from fractions import Fraction

import numpy as np
import pytest

from fourthmoment import sieve
from fourthmoment.special import sieve_test_function


def make_instance(rng, size, r=1, s=1, d=1, sign=1, M=None, N=None, C=None, kind="unit-circle"):
    M, N, C = M or size, N or size, C or size
    g = sieve_test_function(M, N, C)
    a = sieve.random_sequence(rng, len(sieve._dyadic(M)), kind)
    b = sieve.random_sequence(rng, len(sieve._dyadic(N)), kind)
    return sieve.SieveInstance(r, s, d, M, N, C, a, b, g, sign)


@pytest.mark.parametrize("seed", range(6))
def test_fast_sum_matches_naive_oracle(seed):
    rng = np.random.default_rng(seed)
    r, s, d = sieve.random_admissible(rng, bound=6)
    size = float(rng.integers(6, 20))
    inst = make_instance(rng, size, r, s, d, sign=int(rng.choice([-1, 1])))
    fast = sieve.trilinear_sum(inst)
    slow = sieve.trilinear_sum_naive(inst)
    assert abs(fast - slow) <= 1e-8 * max(1.0, abs(slow))


def test_unequal_box_matches_oracle():
    rng = np.random.default_rng(7)
    inst = make_instance(rng, 0, r=3, s=2, d=5, sign=-1, M=9.0, N=14.0, C=11.0)
    assert abs(sieve.trilinear_sum(inst) - sieve.trilinear_sum_naive(inst)) <= 1e-8


@pytest.mark.parametrize("vary", ["M", "N"])
def test_rhs_monotone_in_lengths(vary):
    rhs = []
    for X in (8, 16, 32, 64, 128):
        M, N = (X, 16) if vary == "M" else (16, X)
        g = sieve_test_function(M, N, 16)
        inst = sieve.SieveInstance(3, 2, 5, M, N, 16, np.ones(len(sieve._dyadic(M))),
                                   np.ones(len(sieve._dyadic(N))), g)
        rhs.append(sieve.ls_bound_rhs(inst))
    assert all(a < b for a, b in zip(rhs, rhs[1:]))


def test_theta_dependence_matches_formula():
    rng = np.random.default_rng(1)
    inst = make_instance(rng, 10.0, r=5, s=3, d=7, C=40.0)
    X = inst.x_d
    assert X < 1
    ratio = sieve.ls_bound_rhs(inst, Fraction(7, 64)) / sieve.ls_bound_rhs(inst, 0)
    assert ratio == pytest.approx((inst.d * (1 + 1 / X) ** 2) ** (7 / 64), rel=1e-12)


def test_single_term_ratio():
    g = sieve_test_function(1.2, 1.2, 1.5)
    inst = sieve.SieveInstance(1, 1, 1, 1.2, 1.2, 1.5, [1.0], [1.0], g)
    direct = abs(sieve.trilinear_sum_naive(inst)) / sieve.ls_bound_rhs(inst)
    assert abs(sieve.trilinear_sum(inst)) / sieve.ls_bound_rhs(inst) == pytest.approx(direct)


def test_experiment_is_seed_deterministic():
    a = sieve.ratio_experiment(4, 24, rng_seed=3)
    b = sieve.ratio_experiment(4, 24, rng_seed=3)
    c = sieve.ratio_experiment(4, 24, rng_seed=4)
    assert a.ratios == b.ratios and a.instances == b.instances
    assert a.ratios != c.ratios


@pytest.mark.parametrize("kwargs", [
    dict(r=2, s=2, d=1), dict(r=4, s=1, d=1), dict(r=1, s=3, d=3), dict(r=1, s=1, d=1, sign=2),
    dict(r=0, s=1, d=1),
])
def test_instance_validation(kwargs):
    with pytest.raises(ValueError):
        make_instance(np.random.default_rng(0), 8.0, **kwargs)


def test_sequence_length_checked():
    g = sieve_test_function(8, 8, 8)
    with pytest.raises(ValueError):
        sieve.SieveInstance(1, 1, 1, 8, 8, 8, np.ones(3), np.ones(8), g)


def test_theta_range_checked():
    inst = make_instance(np.random.default_rng(0), 8.0)
    with pytest.raises(ValueError):
        sieve.ls_bound_rhs(inst, Fraction(1, 3))


def test_derivative_condition_holds():
    from fourthmoment.special import check_derivative_bounds
    assert check_derivative_bounds(sieve_test_function(16, 32, 64))
