"""Trace-formula side: the Petersson delta, harmonic weights, and the
Kloosterman-Bessel sums T_{M,N}(c) with their off-diagonal tail.

The Petersson formula at weight 2 and prime level q reads

    sum_f w_f lambda_f(m) lambda_f(n)
        = delta(m, n) - 2 pi sum_{q | c} S(m, n; c)/c J_1(4 pi sqrt(mn)/c).

The c-sum converges only like a random walk, with a remainder of order
1/c_max; a rigorous majorant built from the Weil bound decays like
c_max^{-1/2} and is far too pessimistic to drive truncation at useful
tolerances. `petersson_delta` therefore supports both: an automatic cap from
the Weil majorant (which fails loudly against the hard cap when the
tolerance is out of reach) and an explicit cap, reported together with a
data-driven estimate of the remainder.

Harmonic weights come either from a least-squares fit to the m = 1 column of
the formula, or from the Rankin-Selberg identity w_f = 2 pi^2/(q L(sym^2 f, 1)),
which does not depend on any truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as _sp

from . import arith, lfun
from .modsym import EigenSystem
from .special import CutoffProfile, plateau_bump

DEFAULT_HARD_CAP = 5 * 10**6
KLOOSTERMAN_CHUNK = 1 << 17
THETA_KIM_SARNAK = 7 / 64


class TruncationError(RuntimeError):
    """The requested tolerance needs a c-range beyond the hard cap."""


class WeightFitError(RuntimeError):
    """Least-squares harmonic weights failed their residual or sign checks."""


@dataclass
class PeterssonDelta:
    level: int
    m: int
    n: int
    value: float
    c_max: int
    tail_estimate: float
    weil_tail: float = math.nan


# --------------------------------------------------------------------------
# Petersson delta


def weil_tail_majorant(q: int, m: int, n: int, c_max: float) -> float:
    """Majorant for the discarded terms c > c_max of the Petersson sum.

    Each term is at most 2 pi tau(c) gcd(m,n,c)^{1/2} c^{1/2}/c * (2 pi sqrt(mn)/c)
    (Weil bound and |J_1(x)| <= x/2). With tau(qk) <= 2 tau(k), gcd <= gcd(m,n)
    and the mean density log t + 2 gamma for tau, the sum over c = qk > c_max
    is bounded by 8 pi^2 sqrt(mn gcd) q^{-3/2} K^{-1/2} (log K + 2 + 2 gamma),
    K = c_max/q.
    """
    K = max(c_max / q, 1.0)
    g = math.gcd(m, n)
    return (8.0 * math.pi**2 * math.sqrt(m * n * g) * q**-1.5 / math.sqrt(K)
            * (math.log(K) + 2.0 + 2.0 * np.euler_gamma))


def weil_cap(q: int, m: int, n: int, tol: float) -> float:
    """Smallest c_max (up to a factor 2) with weil_tail_majorant <= tol."""
    c = float(q)
    while weil_tail_majorant(q, m, n, c) > tol:
        c *= 2.0
        if c > 1e30:
            break
    return c


def _kloosterman_bessel_partial(q: int, ms, ns, c_max: int):
    """Partial sums -2 pi sum_{q|c<=c_max} S(m,n;c)/c J_1(4 pi sqrt(mn)/c).

    Returns (totals, tail_rms): the sums per pair and a random-walk estimate
    of the remainder, fitted from the terms with c in (c_max/2, c_max]
    under the model Var(term_c) ~ A/c^3.
    """
    ms = np.asarray(ms, dtype=np.int64)
    ns = np.asarray(ns, dtype=np.int64)
    root = 4.0 * math.pi * np.sqrt((ms * ns).astype(float))
    k_max = int(c_max // q)
    chunk_sums = []
    second_moment = np.zeros(len(ms))
    count = 0
    for k0 in range(1, k_max + 1, KLOOSTERMAN_CHUNK):
        k1 = min(k_max, k0 + KLOOSTERMAN_CHUNK - 1)
        cs, S = arith.kloosterman_progression(q, ms, ns, k1, k_min=k0)
        c = cs.astype(float)[:, None]
        terms = -2.0 * math.pi * S / c * _sp.j1(root[None, :] / c)
        chunk_sums.append(terms.sum(axis=0))
        late = cs > c_max / 2
        if late.any():
            second_moment += (terms[late] ** 2 * c[late] ** 3).sum(axis=0)
            count += int(late.sum())
    totals = np.array([math.fsum(col) for col in np.array(chunk_sums).T]) if chunk_sums \
        else np.zeros(len(ms))
    if count:
        A = second_moment / count
        tail_rms = np.sqrt(A / (2.0 * q * float(c_max) ** 2))
    else:
        tail_rms = np.full(len(ms), np.inf)
    return totals, tail_rms


def petersson_delta(q: int, m: int, n: int, tol: float = 1e-6, c_max: int | None = None,
                    hard_cap: int = DEFAULT_HARD_CAP) -> PeterssonDelta:
    """Delta_q(m, n) from the Kloosterman side of the Petersson formula.

    With ``c_max`` unset, the cap is chosen so that the Weil majorant of the
    remainder is below ``tol``; `TruncationError` is raised if that cap
    exceeds ``hard_cap``. With an explicit ``c_max`` the sum is cut there and
    ``tail_estimate`` is the random-walk estimate of the remainder, while
    ``weil_tail`` keeps the rigorous (much larger) majorant.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    auto = c_max is None
    if auto:
        cap = weil_cap(q, m, n, tol)
        if cap > hard_cap:
            raise TruncationError(
                f"Weil majorant needs c_max ~ {cap:.3g} > hard cap {hard_cap} for tol {tol}")
        c_max = int(cap)
    totals, rms = _kloosterman_bessel_partial(q, [m], [n], c_max)
    weil = weil_tail_majorant(q, m, n, c_max)
    estimate = weil if auto else float(rms[0])
    return PeterssonDelta(level=q, m=m, n=n, value=float(m == n) + float(totals[0]),
                          c_max=int(c_max), tail_estimate=estimate, weil_tail=weil)


def petersson_table(q: int, pairs, c_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Delta_q(m, n) for many pairs at one explicit cap.

    Returns (values, tail_rms) aligned with ``pairs``.
    """
    pairs = list(pairs)
    if not pairs:
        return np.zeros(0), np.zeros(0)
    ms = np.array([p[0] for p in pairs], dtype=np.int64)
    ns = np.array([p[1] for p in pairs], dtype=np.int64)
    totals, rms = _kloosterman_bessel_partial(q, ms, ns, c_max)
    return (ms == ns).astype(float) + totals, rms


# --------------------------------------------------------------------------
# harmonic weights


def coprime_range(q: int, count: int, start: int = 1) -> list[int]:
    out, n = [], start
    while len(out) < count:
        if n % q:
            out.append(n)
        n += 1
    return out


def harmonic_weights(es: EigenSystem, n_eq: int, c_max: int = 200_000,
                     residual_tol: float = 1e-6, deltas: np.ndarray | None = None) -> EigenSystem:
    """Fit w_f from sum_f w_f lambda_f(n) = Delta_q(1, n) by least squares.

    The equations use the first ``n_eq`` integers coprime to q. ``deltas``
    may pass precomputed right-hand sides (same order). The residual is
    stored in ``es.diagnostics['weight_residual']``.

    Raises:
        ValueError: if n_eq is smaller than the number of forms.
        WeightFitError: if the residual exceeds residual_tol or a weight is
            not positive.
    """
    g = es.num_forms
    if n_eq < g:
        raise ValueError("need at least as many equations as forms")
    ns = coprime_range(es.level, n_eq)
    if deltas is None:
        deltas, _ = petersson_table(es.level, [(1, n) for n in ns], c_max)
    A = es.lam[:, ns].T
    w, *_ = np.linalg.lstsq(A, deltas, rcond=None)
    residual = float(np.max(np.abs(A @ w - deltas))) if len(ns) else 0.0
    es.diagnostics["weight_residual"] = residual
    es.diagnostics["weight_method"] = "petersson-least-squares"
    es.weights = w
    if residual > residual_tol:
        raise WeightFitError(f"least-squares residual {residual:.3g} exceeds {residual_tol}")
    if np.any(w <= 0):
        raise WeightFitError("non-positive harmonic weight")
    return es


def rankin_selberg_weights(es: EigenSystem) -> EigenSystem:
    """w_f = 2 pi^2 / (q L(sym^2 f, 1)), independent of any c-truncation."""
    q = es.level
    vals = np.array([lfun.symmetric_square_at_one(es, f) for f in range(es.num_forms)])
    es.weights = 2.0 * math.pi**2 / (q * vals)
    es.diagnostics["weight_method"] = "rankin-selberg"
    return es


def trace_formula_check(es: EigenSystem, m_max: int = 20, c_max: int = 200_000):
    """Held-out test of the Petersson formula.

    Weights are fitted from the m = 1 column (n <= m_max coprime to q) only;
    then every pair m <= n <= m_max coprime to q is compared. Returns a dict
    with the fitted weights, the per-pair errors, and their maximum.
    """
    q = es.level
    idx = [n for n in range(1, m_max + 1) if n % q]
    pairs = [(m, n) for m in idx for n in idx if m <= n]
    values, rms = petersson_table(q, pairs, c_max)
    lookup = {p: v for p, v in zip(pairs, values)}
    column = np.array([lookup[(1, n)] for n in idx])
    A = es.lam[:, idx].T
    w, *_ = np.linalg.lstsq(A, column, rcond=None)
    spectral = np.array([float(np.sum(w * es.lam[:, m] * es.lam[:, n])) for m, n in pairs])
    errors = np.abs(spectral - values)
    return {"weights": w, "pairs": pairs, "errors": errors, "max_error": float(errors.max()),
            "tail_rms": rms, "c_max": c_max}


# --------------------------------------------------------------------------
# T_{M,N}(c) and the Kloosterman-Bessel bound


def _lattice(profile: CutoffProfile):
    (m0, m1), (n0, n1) = profile.support()
    ms = np.arange(max(1, math.ceil(m0)), math.floor(m1) + 1)
    ns = np.arange(max(1, math.ceil(n0)), math.floor(n1) + 1)
    return ms, ns


def t_sum(q: int, c: int, a: int, e: int, profile: CutoffProfile) -> float:
    """T_{M,N}(c)/c^2: sum over the support lattice of
    tau(m) tau(n) (1/c) S(m, aen; c) J_1(4 pi sqrt(aemn)/c) F(m, n).
    """
    if c % q:
        raise ValueError("c must be divisible by q")
    ms, ns = _lattice(profile)
    if len(ms) == 0 or len(ns) == 0:
        return 0.0
    tau = arith.tau_table(int(max(ms.max(), ns.max())))
    mm, nn = np.meshgrid(ms, ns, indexing="ij")
    S = arith.kloosterman_many(mm.ravel(), (a * e * nn).ravel(), c).reshape(mm.shape)
    x = 4.0 * math.pi * np.sqrt(a * e * mm * nn) / c
    terms = tau[mm] * tau[nn] * S / c * _sp.j1(x) * profile(mm, nn)
    return math.fsum(terms.ravel())


def _t_sum_over_c(q: int, a: int, e: int, profile: CutoffProfile, c_lo: float, c_max: int):
    """sum_{q | c, c_lo <= c <= c_max} t_sum(c) via the progression engine."""
    ms, ns = _lattice(profile)
    if len(ms) == 0 or len(ns) == 0:
        return 0.0, 0.0
    tau = arith.tau_table(int(max(ms.max(), ns.max())))
    mm, nn = np.meshgrid(ms, ns, indexing="ij")
    mm, nn = mm.ravel(), nn.ravel()
    weight = tau[mm] * tau[nn] * profile(mm, nn)
    root = 4.0 * math.pi * np.sqrt(a * e * mm * nn.astype(float))
    k_lo = max(1, math.ceil(c_lo / q))
    k_hi = int(c_max // q)
    partial = []
    late_sq, late_n = 0.0, 0
    for k0 in range(k_lo, k_hi + 1, KLOOSTERMAN_CHUNK):
        k1 = min(k_hi, k0 + KLOOSTERMAN_CHUNK - 1)
        cs, S = arith.kloosterman_progression(q, mm, a * e * nn, k1, k_min=k0)
        c = cs.astype(float)[:, None]
        per_c = (weight[None, :] * S / c * _sp.j1(root[None, :] / c)).sum(axis=1)
        partial.append(math.fsum(per_c))
        late = cs > c_max / 2
        if late.any():
            late_sq += float((per_c[late] ** 2 * cs[late].astype(float) ** 3).sum())
            late_n += int(late.sum())
    total = math.fsum(partial)
    rms = math.sqrt(late_sq / late_n / (2.0 * q * float(c_max) ** 2)) if late_n else math.inf
    return total, rms


@dataclass
class Lemma1Result:
    lhs: float
    rhs: float
    ratio: float
    c_max: int
    tail_estimate: float
    terms: list = field(default_factory=list)


def lemma1_rhs(l: int, M: float, N: float, C: float, theta: float = THETA_KIM_SARNAK) -> float:
    """l^{1/2} (sqrt(MN)/C)^{1 - 2 theta}, the bound with the epsilon factor dropped."""
    return math.sqrt(l) * (math.sqrt(M * N) / C) ** (1.0 - 2.0 * theta)


def lemma1_ratio(q: int, l: int, M: float, N: float, C: float, shape=plateau_bump,
                 c_max: int = 200_000, theta: float = THETA_KIM_SARNAK) -> Lemma1Result:
    """Compare the weighted Kloosterman-Bessel triple sum with its bound.

    lhs = sum_{de=l} d^{-1/2} sum_{ab=d} mu(a) a^{-1/2} tau(b)
          sum_{c >= C, q | c} T_{M,N}(c)/c^2,
    with T_{M,N} built with the pair (a, e). The c-sum is cut at ``c_max``;
    the returned tail_estimate is the random-walk remainder estimate.

    Raises:
        ValueError: if C <= sqrt(l M N).
    """
    if C <= math.sqrt(l * M * N):
        raise ValueError("requires C > sqrt(l M N)")
    profile = CutoffProfile(M, N, shape)
    lhs_terms = []
    tail = 0.0
    for d in arith.divisors(l):
        e = l // d
        for a in arith.divisors(d):
            b = d // a
            mu = arith.mobius(a)
            if mu == 0:
                continue
            coef = d**-0.5 * mu * a**-0.5 * arith.divisor_tau(b)
            value, rms = _t_sum_over_c(q, a, e, profile, C, c_max)
            lhs_terms.append((d, e, a, b, coef * value))
            tail = math.hypot(tail, coef * rms)
    lhs = math.fsum(t[-1] for t in lhs_terms)
    rhs = lemma1_rhs(l, M, N, C, theta)
    return Lemma1Result(lhs=lhs, rhs=rhs, ratio=abs(lhs) / rhs, c_max=c_max,
                        tail_estimate=tail, terms=lhs_terms)


# --------------------------------------------------------------------------
# off-diagonal tail


def _gauss_nodes(panels, order):
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in panels:
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _od_terms(q, a, e, profile, ns, c_lo, c_hi, order):
    """sum over q | c in [c_lo, c_hi] of phi(c)/c^2 int Y0 J1 F(u, n) du, per n."""
    M = profile.scale_m
    # panels follow the pieces of the default bump
    panels = [(0.5 * M, M), (M, 2.0 * M), (2.0 * M, 3.0 * M)]
    u, wu = _gauss_nodes(panels, order)
    k = np.arange(max(1, math.ceil(c_lo / q)), c_hi // q + 1)
    if len(k) == 0:
        return np.zeros(len(ns))
    cs = q * k
    phi = arith.phi_table(int(cs.max()))[cs].astype(float)
    out = np.zeros(len(ns))
    for j, n in enumerate(ns):
        beta = 4.0 * math.pi * np.sqrt(a * e * n * u)  # (nodes,)
        F = profile(u, float(n))
        x = beta[None, :] / cs[:, None].astype(float)
        integral = (_sp.y0(x) * _sp.j1(x) * F[None, :] * wu[None, :]).sum(axis=1)
        out[j] = math.fsum(phi / cs.astype(float) ** 2 * integral)
    return out


def _od_asymptotic_tail(q, a, e, profile, ns, c_from, order):
    """Remainder sum_{q | c > c_from} using the small-argument expansion.

    Y0(x) J1(x) = (1/pi)[L x - (3/8) L x^3 + x^3/4] + O(x^5 log x), with
    L = log(x/2) + gamma. With x = beta/c the c-sum reduces to sums of
    phi(c) c^{-3} (log c)^i and phi(c) c^{-5} (log c)^i; these are summed
    exactly up to 64 c_from and by the mean value of phi(c)/c beyond.
    """
    M = profile.scale_m
    panels = [(0.5 * M, M), (M, 2.0 * M), (2.0 * M, 3.0 * M)]
    u, wu = _gauss_nodes(panels, order)
    c_end = 64 * c_from
    k = np.arange(c_from // q + 1, c_end // q + 1)
    cs = (q * k).astype(float)
    phi = arith.phi_table(int(q * k.max()))[q * k].astype(float)
    logc = np.log(cs)
    mean_phi = float(np.mean(phi / cs))
    X = float(q * k.max())

    def tail_sum(power, with_log):
        exact = (phi * cs**-power * (logc if with_log else 1.0)).sum()
        # integral of t^{1-power} (log t)^i dt / q beyond X, times mean phi(c)/c
        s = power - 1.0
        if with_log:
            rest = X ** (-s + 1) * (math.log(X) / (s - 1) + 1.0 / (s - 1) ** 2)
        else:
            rest = X ** (-s + 1) / (s - 1)
        return exact + mean_phi * rest / q

    s3, s3l = tail_sum(3, False), tail_sum(3, True)
    s5, s5l = tail_sum(5, False), tail_sum(5, True)
    out = np.zeros(len(ns))
    g = np.euler_gamma
    for j, n in enumerate(ns):
        beta = 4.0 * math.pi * np.sqrt(a * e * n * u)
        F = profile(u, float(n)) * wu
        lb = np.log(beta / 2.0) + g
        # x = beta/c, L = lb - log c
        first = (beta * lb * F).sum() * s3 - (beta * F).sum() * s3l
        third = ((-3.0 / 8.0) * beta**3 * lb * F + beta**3 * F / 4.0).sum() * s5 \
            + (3.0 / 8.0) * (beta**3 * F).sum() * s5l
        out[j] = (first + third) / math.pi
    return out


def t_od_tail(q: int, C: float, a: int, e: int, profile: CutoffProfile, n_max: int,
              order: int = 24, rel_tol: float = 1e-8) -> float:
    """-2 pi sum_n tau(aen) tau(n) int_0^oo Y0 J1(4 pi sqrt(aent)) sum_{q|c>C} phi(c) F(c^2 t, n) dt.

    Substituting u = c^2 t turns each c-term into (1/c^2) int_{M/2}^{3M}
    Y0 J1(4 pi sqrt(aenu)/c) F(u, n) du, a smooth integral away from the
    logarithmic point. Terms with c up to a switch point where the Bessel
    argument is below 0.02 are integrated directly by Gauss-Legendre; the
    rest use the small-argument expansion.

    Raises:
        ValueError: if C < q.
        ArithmeticError: if doubling the quadrature order moves the value
            by more than rel_tol (relative).
    """
    if C < q:
        raise ValueError("requires C >= q")
    (n0, n1) = profile.support()[1]
    ns = np.arange(max(1, math.ceil(n0)), min(n_max, math.floor(n1)) + 1)
    if len(ns) == 0:
        return 0.0
    beta_max = 4.0 * math.pi * math.sqrt(a * e * ns.max() * 3.0 * profile.scale_m)
    c_switch = max(int(C) + q, int(beta_max / 0.02))
    c_switch -= c_switch % q
    tau = arith.tau_table(int(a * e * ns.max()))
    weights = tau[a * e * ns] * tau[ns]

    def evaluate(order_):
        direct = _od_terms(q, a, e, profile, ns, math.floor(C) + 1, c_switch, order_)
        tail = _od_asymptotic_tail(q, a, e, profile, ns, c_switch, order_)
        return -2.0 * math.pi * math.fsum(weights * (direct + tail))

    value = evaluate(order)
    check = evaluate(2 * order)
    if abs(check - value) > rel_tol * max(1.0, abs(check)):
        raise ArithmeticError(f"quadrature not converged: {value} vs {check}")
    return check
