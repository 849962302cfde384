import math

import numpy as np
import pytest

from fourthmoment import amplifier, arith

from conftest import levels_up_to, weighted


@pytest.mark.parametrize("q", [11, 37, 101])
def test_hecke_relation_at_primes(q):
    es = weighted(q)
    for p in arith.primes_up_to(math.isqrt(es.n_max)):
        if q % p:
            np.testing.assert_allclose(es.lam[:, p] ** 2 - es.lam[:, p * p], 1.0, atol=1e-9)


@pytest.mark.parametrize("q", [11, 37, 67])
def test_raw_sum_equals_prime_count(q):
    es = weighted(q)
    for L in (4, 30, 100, 200):
        for f in range(es.num_forms):
            c = amplifier.build_amplifier(es, f, L)
            closed = amplifier.amplified_value(es, f, c)
            assert closed == len(amplifier.amplifier_primes(q, L))
            assert abs(amplifier.raw_amplified_value(es, f, c) - closed) < 1e-9


def test_amplified_value_is_form_independent():
    es = weighted(101)
    values = {amplifier.amplified_value(es, f, amplifier.build_amplifier(es, f, 900))
              for f in range(es.num_forms)}
    assert len(values) == 1


@pytest.mark.parametrize("q", [11, 67])
def test_norm_inequalities(q):
    es = weighted(q)
    for L in (25, 120, 200):
        for f in range(es.num_forms):
            c = amplifier.build_amplifier(es, f, L)
            lam = amplifier.amplified_value(es, f, c)
            assert c.norm2_sq() <= 5 * lam
            assert c.norm1() <= 3 * lam


def test_primes_dividing_level_are_dropped():
    assert amplifier.amplifier_primes(11, 200) == [2, 3, 5, 7, 13]
    assert amplifier.amplifier_primes(13, 200) == [2, 3, 5, 7, 11]


def test_length_validation():
    es = weighted(11)
    with pytest.raises(ValueError):
        amplifier.build_amplifier(es, 0, 3)
    with pytest.raises(ValueError):
        amplifier.build_amplifier(es, 0, 10 * es.n_max)


@pytest.mark.parametrize("L", [1e2, 1e3, 1e4, 1e6])
def test_normalized_prime_count_in_range(L):
    assert 0.4 <= amplifier.prime_count_normalized(L) <= 1.6


def test_amplified_moment_bounds_each_form():
    es = weighted(37)
    total, rows = amplifier.amplified_moment(es, 37 ** (25 / 392) * 4)
    for r in rows:
        assert r.term <= total + 1e-15
        assert r.central_value <= r.implied_bound + 1e-12


def test_weight_size_ratio_shape():
    es = weighted(67)
    assert amplifier.weight_size_ratio(es).shape == (es.num_forms,)
