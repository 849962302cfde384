"""Acceptance suite: one PASS/FAIL line per criterion, with runtime.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the summary lines
interleaved with the pytest output (they are printed even without -s).
"""

import math
import os
import time
from fractions import Fraction as F

import numpy as np
import pytest

from fourthmoment import amplifier, arith, cache, exponents, lfun, modsym, moments, sieve, tracesums
from fourthmoment.pipeline import default_n_max
from fourthmoment.special import sieve_test_function

from conftest import levels_up_to, weighted


@pytest.fixture
def report(capsys):
    start = time.perf_counter()

    def emit(number, title, ok, detail, budget):
        elapsed = time.perf_counter() - start
        in_time = elapsed < budget
        status = "PASS" if ok and in_time else "FAIL"
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {status} {title}: {detail} "
                  f"({elapsed:.1f} s, budget {budget:g} s)")
        assert ok, detail
        assert in_time, f"runtime {elapsed:.1f} s exceeds {budget} s"

    return emit


def test_criterion_01_exponent_reproduction(report):
    t = exponents.theta_from_lambda(F(975, 4096))
    cut = exponents.balance_cutoff(t)
    err = exponents.theorem1_error_exponents(t)
    checks = {
        "theta": t.value == F(7, 64),
        "delta": exponents.subconvexity_delta(t).delta == F(25, 3136),
        "error exponent": -max(err.q_exponents(0)) == F(25, 228),
        "Delta2": exponents.mollifier_lengths(t).delta2 == F(25, 784),
        "C exponents": [cut.branch1["l"], cut.branch1["q"], cut.branch1["M"], cut.branch1["N"],
                        cut.branch2["q"]] == [F(-8, 57), F(32, 57), F(1, 2), F(3, 38), F(65, 57)],
        "re-derived error monomials": err.identities_hold,
    }
    bad = [k for k, v in checks.items() if not v]
    report(1, "exponent reproduction", not bad, f"mismatches: {bad or 'none'}", 1)


def test_criterion_02_discrepancy_audit(report):
    rep = {d.name: d for d in exponents.discrepancy_report(exponents.KIM_SARNAK)}
    d1, d1min = rep["delta1"], rep["delta1_binding"]
    thr = rep["amplifier_threshold_per_term"]
    ok = ((d1.derived, d1.stated) == (F(25, 506), F(25, 566)) and d1min.derived == F(1, 21)
          and (thr.stated, thr.derived) == (F(64, 691), F(2, 21)))
    report(2, "discrepancy audit", ok,
           f"Delta1 derived {d1.derived} vs stated {d1.stated}, binding min {d1min.derived}; "
           f"threshold stated {thr.stated} vs derived min {thr.derived}", 1)


def test_criterion_03_eigensystems(report):
    expected = {11: 1, 37: 2, 67: 5, 101: 8}
    problems = []
    for q, dim in expected.items():
        es = modsym.eigensystem(q, 1000)
        if es.num_forms != dim or modsym.genus_x0(q) != dim:
            problems.append(f"q={q} dimension {es.num_forms}")
        res = max(modsym.hecke_relation_residual(es, 1000), es.diagnostics["eigen_residual"])
        if res >= 1e-8:
            problems.append(f"q={q} Hecke residual {res:.2e}")
        tau = arith.tau_table(1000)
        n = np.array([k for k in range(1, 1001) if k % q])
        if np.any(np.abs(es.lam[:, n]) > tau[n] + 1e-9):
            problems.append(f"q={q} Deligne bound")
    lam2 = modsym.eigensystem(11, 10).lam[0, 2]
    if abs(lam2 + math.sqrt(2)) > 1e-6:
        problems.append(f"q=11 lambda(2) = {lam2}")
    report(3, "eigensystem correctness", not problems,
           f"q=11 lambda(2) = {lam2:.12f}; problems: {problems or 'none'}", 60)


def test_criterion_04_central_values(report):
    problems = []
    es11 = weighted(11)
    cv = lfun.central_value(es11, 0)
    if cv.epsilon != 1 or abs(cv.value - 0.2538418609) > 1e-6:
        problems.append(f"q=11 eps={cv.epsilon} L={cv.value}")
    worst = 0.0
    for q in levels_up_to(101):
        es = weighted(q)
        for f in range(es.num_forms):
            eps = int(es.eps[f])
            if eps == -1 and lfun.central_value(es, f).value != 0.0:
                problems.append(f"q={q} form {f} odd but nonzero")
            vals = [lfun.afe_sum(es, f, A) + eps * lfun.afe_sum(es, f, 1 / A)
                    for A in (0.5, 0.8, 1.25, 2.0)]
            worst = max(worst, max(vals) - min(vals))
    if worst >= 1e-8:
        problems.append(f"A-spread {worst:.2e}")
    report(4, "central values", not problems,
           f"L(11a,1/2) = {cv.value:.10f}, max A-spread {worst:.1e}; problems: {problems or 'none'}",
           30)


def test_criterion_05_trace_formula(report):
    worst = {}
    rms = {}
    for q in (11, 37, 67):
        out = tracesums.trace_formula_check(weighted(q), m_max=20, c_max=q * 60_000)
        worst[q] = out["max_error"]
        rms[q] = float(np.max(out["tail_rms"]))
    ok = max(worst.values()) < 1e-6
    detail = ", ".join(f"q={q} max error {worst[q]:.1e} (tail rms {rms[q]:.1e})" for q in worst)
    report(5, "trace-formula held-out identities", ok, detail, 300)


def test_criterion_06_amplifier(report):
    problems = []
    lengths = [4, 10, 50, 100, 500, 1000, 2500, 5000, 10_000]
    checked = 0
    for q in levels_up_to(101):
        es = modsym.eigensystem(q, 10_000, prime_bound=100)
        for L in lengths:
            count = len(amplifier.amplifier_primes(q, L))
            for f in range(es.num_forms):
                c = amplifier.build_amplifier(es, f, L)
                raw = amplifier.raw_amplified_value(es, f, c)
                lam = amplifier.amplified_value(es, f, c)
                checked += 1
                if lam != count or abs(raw - count) > 1e-8:
                    problems.append(f"q={q} L={L} form {f}: raw {raw}")
                if c.norm2_sq() > 5 * lam or c.norm1() > 3 * lam:
                    problems.append(f"q={q} L={L} form {f}: norm inequality")
    norm = {L: amplifier.prime_count_normalized(L) for L in (1e2, 1e3, 1e4, 1e6)}
    bad = {L: v for L, v in norm.items() if not 0.4 <= v <= 1.6}
    if bad:
        problems.append(f"normalized counts {bad}")
    report(6, "amplifier", not problems,
           f"{checked} (q, L, form) cases; normalized counts "
           + ", ".join(f"{v:.3f}" for v in norm.values()) + f"; problems: {problems[:3] or 'none'}",
           60)


def test_criterion_07_moments(report):
    problems = []
    worst_trunc = 0.0
    for q in levels_up_to(101):
        es = weighted(q)
        if es.num_forms == 0:
            continue  # genus 0: the family is empty and M(l) = 0
        m1 = moments.fourth_moment(es, 1).harmonic_value
        if m1 <= 0:
            problems.append(f"q={q} M(1)={m1}")
        doubled = weighted(q, 2 * default_n_max(q))
        for l in [1] + arith.primes_up_to(q - 1):
            a = moments.fourth_moment(es, l).harmonic_value
            b = moments.fourth_moment(doubled, l).harmonic_value
            worst_trunc = max(worst_trunc, abs(a - b))
            if l > 1 and abs(a) > 2 * m1 + 1e-8:
                problems.append(f"q={q} |M({l})| > 2 M(1)")
    if worst_trunc >= 1e-8:
        problems.append(f"truncation change {worst_trunc:.1e}")
    report(7, "moments", not problems,
           f"max change under doubled n_max {worst_trunc:.1e} (weights carry no c-truncation); "
           f"problems: {problems or 'none'}", 300)


def test_criterion_08_sieve(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10):
        r, s, d = sieve.random_admissible(rng, bound=6)
        M, N, C = (float(x) for x in rng.integers(6, 33, size=3))
        g = sieve_test_function(M, N, C)
        a = sieve.random_sequence(rng, len(sieve._dyadic(M)), "unit-circle")
        b = sieve.random_sequence(rng, len(sieve._dyadic(N)), "unit-circle")
        inst = sieve.SieveInstance(r, s, d, M, N, C, a, b, g, int(rng.choice([-1, 1])))
        worst = max(worst, abs(sieve.trilinear_sum(inst) - sieve.trilinear_sum_naive(inst)))
    first = sieve.ratio_experiment(20, 128, rng_seed=42)
    second = sieve.ratio_experiment(20, 128, rng_seed=42)
    deterministic = first.ratios == second.ratios
    ok = worst < 1e-8 and first.max <= 10 and deterministic
    report(8, "sieve harness", ok,
           f"oracle max |diff| {worst:.1e}; 20 trials at size 128 max ratio {first.max:.2e}, "
           f"deterministic {deterministic}", 300)


def test_criterion_09_kloosterman(report):
    problems = []
    for c in range(1, 501):
        for m in range(0, 12):
            for n in range(1, 12):
                s = arith.kloosterman(m, n, c)
                if abs(s - arith.kloosterman(n, m, c)) > 1e-9:
                    problems.append(f"symmetry {m},{n},{c}")
                if m and abs(s) > arith.weil_bound(m, n, c) + 1e-9:
                    problems.append(f"Weil {m},{n},{c}")
    for c in range(1, 201):
        if abs(arith.kloosterman(0, 1, c) - arith.mobius(c)) > 1e-9:
            problems.append(f"Ramanujan c={c}")
    for c1 in range(1, 201):
        for c2 in range(1, 200 // c1 + 1):
            if math.gcd(c1, c2) != 1:
                continue
            for m, n in ((1, 1), (2, 5), (7, 3)):
                lhs = arith.kloosterman(m, n, c1 * c2)
                rhs = (arith.kloosterman(m * pow(c2, -2, c1) if c1 > 1 else 0, n, c1)
                       * arith.kloosterman(m * pow(c1, -2, c2) if c2 > 1 else 0, n, c2))
                if abs(lhs - rhs) > 1e-8:
                    problems.append(f"twisted multiplicativity {c1}*{c2}")
    report(9, "Kloosterman suite", not problems, f"problems: {problems[:3] or 'none'}", 60)


def test_criterion_10_persistence(report, tmp_path, monkeypatch):
    es = weighted(67)
    path = cache.save(es, tmp_path)
    text = path.read_text()
    back = cache.load(tmp_path, 67)
    exact = (cache.serialize(back) == text
             and np.array_equal(back.lam[:, 1:], cache.quantize(es.lam[:, 1:]))
             and np.array_equal(back.weights, cache.quantize(es.weights)))

    def interrupted(*args, **kwargs):
        raise KeyboardInterrupt

    monkeypatch.setattr(os, "replace", interrupted)
    try:
        cache.atomic_write_text(path, "partial contents")
    except KeyboardInterrupt:
        pass
    monkeypatch.undo()
    intact = path.read_text() == text and [p.name for p in tmp_path.iterdir()] == [path.name]
    report(10, "persistence", exact and intact,
           f"round trip bit-exact {exact}; old file intact with no temp files {intact}", 10)
