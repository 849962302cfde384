import math

import numpy as np
import pytest
from scipy import special as sp

from fourthmoment import arith, tracesums
from fourthmoment.modsym import EigenSystem
from fourthmoment.special import CutoffProfile, plateau_bump

from conftest import weighted

# Largest |lhs|/rhs seen on the geometric C grid below (q=11, l=1, M=N=8,
# c_max=2e5): about 424 at C=272, decaying on either side. Rounded up.
LEMMA1_GRID_CONSTANT = 500.0


def naive_delta(q, m, n, c_max):
    total = math.fsum(
        -2 * math.pi * arith.kloosterman(m, n, c) / c * sp.j1(4 * math.pi * math.sqrt(m * n) / c)
        for c in range(q, c_max + 1, q))
    return float(m == n) + total


@pytest.mark.parametrize("q", [11, 37])
def test_petersson_table_matches_direct_sum(q):
    pairs = [(1, 1), (1, 2), (2, 3), (4, 4), (5, 7)]
    values, _ = tracesums.petersson_table(q, pairs, c_max=3000)
    for (m, n), v in zip(pairs, values):
        assert v == pytest.approx(naive_delta(q, m, n, 3000), abs=1e-12)


def test_petersson_delta_is_symmetric():
    a = tracesums.petersson_delta(37, 2, 5, c_max=20000).value
    b = tracesums.petersson_delta(37, 5, 2, c_max=20000).value
    assert a == pytest.approx(b, abs=1e-13)


def test_auto_truncation_refuses_infeasible_tolerance():
    with pytest.raises(tracesums.TruncationError):
        tracesums.petersson_delta(11, 1, 1, tol=1e-6)


def test_petersson_delta_validates_arguments():
    with pytest.raises(ValueError):
        tracesums.petersson_delta(11, 0, 1, c_max=100)
    with pytest.raises(ValueError):
        tracesums.petersson_delta(11, 1, 1, tol=0)


def test_weil_majorant_decreases_and_cap_meets_it():
    vals = [tracesums.weil_tail_majorant(11, 2, 3, c) for c in (1e3, 1e4, 1e5, 1e6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    cap = tracesums.weil_cap(11, 2, 3, 1e-2)
    assert tracesums.weil_tail_majorant(11, 2, 3, cap) <= 1e-2


def test_held_out_pair_q11():
    es = weighted(11)
    d = tracesums.petersson_delta(11, 1, 2, c_max=200_000)
    spectral = float(np.sum(es.weights * es.lam[:, 2]))
    assert abs(spectral - d.value) < max(1e-4, 10 * d.tail_estimate)


def test_rankin_selberg_weights_agree_with_petersson_fit():
    es = weighted(37)
    bare = EigenSystem(level=es.level, n_max=es.n_max, lam=es.lam.copy(), eps=es.eps,
                       weights=None, precision=es.precision)
    fitted = tracesums.harmonic_weights(bare, n_eq=8, c_max=200_000, residual_tol=1e-3)
    assert np.all(es.weights > 0)
    np.testing.assert_allclose(fitted.weights, es.weights, rtol=1e-2)


def test_harmonic_weights_needs_enough_equations():
    es = weighted(67)
    with pytest.raises(ValueError):
        tracesums.harmonic_weights(es, n_eq=es.num_forms - 1, deltas=np.zeros(es.num_forms - 1))


@pytest.mark.parametrize("q", [11, 37, 67, 101])
def test_rankin_selberg_weights_reproduce_delta_11(q):
    es = weighted(q)
    assert np.all(es.weights > 0)
    d = tracesums.petersson_delta(q, 1, 1, c_max=100_000)
    assert abs(es.weights.sum() - d.value) < max(1e-4, 5 * d.tail_estimate)


def test_t_sum_matches_brute_force():
    profile = CutoffProfile(5.0, 4.0, plateau_bump)
    q, a, e = 11, 1, 2
    for c in (11, 33, 121):
        expected = 0.0
        for m in range(1, 16):
            for n in range(1, 13):
                w = profile(m, n)
                if w == 0:
                    continue
                expected += (arith.divisor_tau(m) * arith.divisor_tau(n) / c
                             * arith.kloosterman(m, a * e * n, c)
                             * sp.j1(4 * math.pi * math.sqrt(a * e * m * n) / c) * w)
        assert tracesums.t_sum(q, c, a, e, profile) == pytest.approx(expected, abs=1e-12)


def test_t_sum_requires_multiple_of_q():
    with pytest.raises(ValueError):
        tracesums.t_sum(11, 12, 1, 1, CutoffProfile(4.0, 4.0, plateau_bump))


def test_lemma1_requires_large_c():
    with pytest.raises(ValueError):
        tracesums.lemma1_ratio(11, 1, 8, 8, 8.0)


def test_lemma1_rhs_formula():
    assert tracesums.lemma1_rhs(4, 8, 8, 16, theta=0.0) == pytest.approx(2 * 0.5)


def test_lemma1_ratio_at_most_ten_just_above_threshold():
    res = tracesums.lemma1_ratio(11, 1, 8, 8, 2 * 8 + 1)
    assert res.ratio <= 10


def test_lemma1_ratio_bounded_on_geometric_grid():
    ratios = [tracesums.lemma1_ratio(11, 1, 8, 8, C).ratio for C in (17, 68, 272, 1088, 4352)]
    assert max(ratios) <= LEMMA1_GRID_CONSTANT
    # far past the transition scale the ratio decays
    assert ratios[-1] < ratios[2]


def test_od_tail_is_stable_in_quadrature_order():
    profile = CutoffProfile(6.0, 6.0, plateau_bump)
    a = tracesums.t_od_tail(11, 11, 1, 1, profile, n_max=18, order=24)
    b = tracesums.t_od_tail(11, 11, 1, 1, profile, n_max=18, order=32)
    assert np.isfinite(a)
    assert a == pytest.approx(b, rel=1e-7, abs=1e-12)


def test_od_tail_requires_c_at_least_q():
    with pytest.raises(ValueError):
        tracesums.t_od_tail(11, 5, 1, 1, CutoffProfile(6.0, 6.0, plateau_bump), n_max=18)
