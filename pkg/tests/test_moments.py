import math

import numpy as np
import pytest

from fourthmoment import arith, lfun, moments
from fourthmoment.modsym import EigenSystem

from conftest import levels_up_to, weighted


@pytest.mark.parametrize("q", [q for q in levels_up_to(101) if q != 13])
def test_untwisted_moment_positive(q):
    rep = moments.fourth_moment(weighted(q), 1)
    assert rep.harmonic_value > 0
    assert rep.natural_value > 0


def test_moment_is_independent_of_form_order():
    es = weighted(67)
    order = np.arange(es.num_forms)[::-1]
    flipped = EigenSystem(level=es.level, n_max=es.n_max, lam=es.lam[order].copy(),
                          eps=es.eps[order].copy(), weights=es.weights[order].copy(),
                          precision=es.precision)
    for l in (1, 2, 5):
        a = moments.fourth_moment(es, l)
        b = moments.fourth_moment(flipped, l)
        assert abs(a.harmonic_value - b.harmonic_value) < 1e-12
        assert abs(a.natural_value - b.natural_value) < 1e-12


@pytest.mark.parametrize("q", [37, 67, 101])
def test_prime_twist_bounded_by_deligne(q):
    es = weighted(q)
    m1 = moments.fourth_moment(es, 1).harmonic_value
    for p in arith.primes_up_to(q - 1):
        assert abs(moments.fourth_moment(es, p).harmonic_value) <= 2 * m1 + 1e-8


def test_empty_family_has_zero_moment():
    rep = moments.fourth_moment(weighted(13), 1)
    assert rep.harmonic_value == 0.0 and rep.per_form == []


def test_twist_range_checked():
    es = weighted(37)
    for bad in (0, 37, 40):
        with pytest.raises(ValueError):
            moments.fourth_moment(es, bad)


def test_missing_weights_rejected():
    es = weighted(37)
    bare = EigenSystem(level=es.level, n_max=es.n_max, lam=es.lam, eps=es.eps, weights=None,
                       precision=es.precision)
    with pytest.raises(ValueError):
        moments.fourth_moment(bare, 1)


def test_odd_forms_do_not_contribute():
    es = weighted(37)
    rep = moments.fourth_moment(es, 1)
    lam, value, weight = zip(*rep.per_form)
    for f, v in enumerate(value):
        if es.eps[f] == -1:
            assert v == 0.0
    assert rep.harmonic_value == pytest.approx(math.fsum(w * v**4 for w, v in zip(weight, value)))


@pytest.mark.parametrize("q", [11, 37])
def test_stable_under_doubled_coefficient_count(q):
    base = moments.fourth_moment(weighted(q), 1).harmonic_value
    more = moments.fourth_moment(weighted(q, 2 * weighted(q).n_max), 1).harmonic_value
    assert abs(base - more) < 1e-8


def test_sweep_records_errors_and_continues():
    def loader(q):
        if q == 13:
            raise RuntimeError("boom")
        return weighted(q)

    rows = moments.moment_sweep([11, 13, 37], 1, moments.leading_main_term, loader=loader)
    assert [r.q for r in rows] == [11, 13, 37]
    assert rows[1].error.startswith("RuntimeError") and rows[1].harmonic_value is None
    assert rows[2].residual == pytest.approx(
        rows[2].harmonic_value - math.log(37) ** 6 / (60 * math.pi**2))


def test_central_values_reused_when_passed():
    es = weighted(11)
    cv = lfun.central_values(es)
    assert moments.fourth_moment(es, 1, central=cv).harmonic_value == \
        moments.fourth_moment(es, 1).harmonic_value
