"""Exact exponent bookkeeping for the fourth-moment bounds.

Every quantity is a power product in the symbols l, q, M, N, C, L with
rational exponents. The spectral parameter theta enters by exact rational
substitution, so all arithmetic here is done with ``fractions.Fraction`` and
no floating point is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

SYMBOLS = ("l", "q", "M", "N", "C", "L")


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass an int, str or Fraction")
    return Fraction(x)


def _rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None if irrational."""
    if x < 0:
        return None
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class ThetaValue:
    """A spectral exponent theta in [0, 1/4] with the bound it came from."""

    value: Fraction
    provenance: str = ""

    def __post_init__(self):
        v = _frac(self.value)
        if not 0 <= v <= Fraction(1, 4):
            raise ValueError(f"theta must lie in [0, 1/4], got {v}")
        object.__setattr__(self, "value", v)


def theta_from_lambda(lambda1, provenance: str = "") -> ThetaValue:
    """theta = sqrt(max(0, 1/4 - lambda1)), exact.

    Raises:
        ValueError: if lambda1 < 0 or 1/4 - lambda1 is not a rational square.
    """
    lam = _frac(lambda1)
    if lam < 0:
        raise ValueError("lambda1 must be non-negative")
    gap = max(Fraction(0), Fraction(1, 4) - lam)
    root = _rational_sqrt(gap)
    if root is None:
        raise ValueError(f"1/4 - {lam} = {gap} is not the square of a rational")
    return ThetaValue(root, provenance)


KIM_SARNAK = ThetaValue(Fraction(7, 64), "Kim-Sarnak lambda1 >= 975/4096")
SELBERG_CONJECTURE = ThetaValue(Fraction(0), "Selberg conjecture lambda1 >= 1/4")


@dataclass(frozen=True)
class Monomial:
    """A power product prod_s s^{e_s} over SYMBOLS with rational exponents."""

    exps: tuple[Fraction, ...] = field(default=tuple(Fraction(0) for _ in SYMBOLS))

    @classmethod
    def of(cls, **kw) -> "Monomial":
        unknown = set(kw) - set(SYMBOLS)
        if unknown:
            raise KeyError(f"unknown symbols {sorted(unknown)}")
        return cls(tuple(_frac(kw.get(s, 0)) for s in SYMBOLS))

    def __getitem__(self, sym: str) -> Fraction:
        return self.exps[SYMBOLS.index(sym)]

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(tuple(a + b for a, b in zip(self.exps, other.exps)))

    def __truediv__(self, other: "Monomial") -> "Monomial":
        return Monomial(tuple(a - b for a, b in zip(self.exps, other.exps)))

    def __pow__(self, k) -> "Monomial":
        k = _frac(k)
        return Monomial(tuple(a * k for a in self.exps))

    def substitute(self, sym: str, value: "Monomial") -> "Monomial":
        """Replace sym by a monomial (which must not contain sym itself)."""
        if value[sym] != 0:
            raise ValueError("substituted value must not contain the symbol")
        e = self[sym]
        base = Monomial(tuple(Fraction(0) if s == sym else a for s, a in zip(SYMBOLS, self.exps)))
        return base * value**e

    def restrict(self, **fixed) -> "Monomial":
        """Substitute sym = q^{k} for each keyword sym=k (e.g. M=1 means M = q)."""
        out = self
        for sym, k in fixed.items():
            out = out.substitute(sym, Monomial.of(q=k))
        return out

    def log_value(self, **logs) -> Fraction:
        """sum_s e_s log(s) for exact rational log-values (in any common base)."""
        return sum((self[s] * _frac(logs.get(s, 0)) for s in SYMBOLS), Fraction(0))

    def as_dict(self) -> dict[str, Fraction]:
        return {s: e for s, e in zip(SYMBOLS, self.exps) if e != 0}

    def __str__(self) -> str:
        parts = [f"{s}^({e})" for s, e in self.as_dict().items()]
        return " ".join(parts) if parts else "1"


ONE = Monomial()


def solve_for(lhs: Monomial, rhs: Monomial, sym: str) -> Monomial:
    """The monomial X with lhs = rhs after setting sym = X.

    Raises:
        ZeroDivisionError: if sym has the same exponent on both sides.
    """
    ratio = lhs / rhs
    k = ratio[sym]
    if k == 0:
        raise ZeroDivisionError(f"{sym} cancels from the equation")
    rest = ratio.substitute(sym, ONE)
    return rest ** (Fraction(-1) / k)


def _theta(theta) -> Fraction:
    return theta.value if isinstance(theta, ThetaValue) else _frac(theta)


# Bounds entering the balance, as functions of theta.

def lemma1_bound(theta) -> Monomial:
    """l^{1/2} (sqrt(MN)/C)^{1 - 2 theta}: the Kloosterman-Bessel large-c size."""
    t = _theta(theta)
    return Monomial.of(l=Fraction(1, 2)) * (Monomial.of(M=Fraction(1, 2), N=Fraction(1, 2), C=-1) ** (1 - 2 * t))


def shifted_sum_bound(theta=None) -> Monomial:
    """l^{3/4} N^{1/4} M^{-1/2} C / q: the competing term fixing the cutoff."""
    return Monomial.of(l=Fraction(3, 4), N=Fraction(1, 4), M=Fraction(-1, 2), C=1, q=-1)


def off_diagonal_tail_bound(ae_exponent=1) -> Monomial:
    """(ae)^{1/2} MN/(qC) with ae = l^{ae_exponent} (the worst case is ae = l)."""
    return Monomial.of(l=Fraction(ae_exponent, 2), M=1, N=1, q=-1, C=-1)


@dataclass(frozen=True)
class CutoffBranches:
    theta: Fraction
    branch1: Monomial
    branch2: Monomial
    agree_at_m_equals_n_equals_q: bool


def balance_cutoff(theta) -> CutoffBranches:
    """C solving the balance between the Kloosterman-Bessel bound and the shifted-sum term.

    Branch 1 is the exact solution in l, q, M, N. Branch 2 is the level-aspect
    closed form l^{-1/(8-8 theta)} q^{(9-8 theta)/(8-8 theta)}, which should
    coincide with branch 1 at M = N = q.
    """
    t = _theta(theta)
    if not 0 <= t <= Fraction(1, 4):
        raise ValueError("theta must lie in [0, 1/4]")
    b1 = solve_for(lemma1_bound(t), shifted_sum_bound(t), "C")
    b2 = Monomial.of(l=Fraction(-1) / (8 - 8 * t), q=(9 - 8 * t) / (8 - 8 * t))
    agree = b1.restrict(M=1, N=1) == b2
    if not agree:
        raise ArithmeticError("cutoff branches disagree at M = N = q")
    return CutoffBranches(t, b1, b2, agree)


def cutoff_closed_form(theta) -> dict[str, Fraction]:
    """The displayed exponents of branch 1 and branch 2, written out directly."""
    t = _theta(theta)
    return {
        "l": Fraction(-1) / (8 - 8 * t),
        "q": Fraction(1) / (2 - 2 * t),
        "M": Fraction(1, 2),
        "N": (1 - 4 * t) / (8 - 8 * t),
        "q_branch2": (9 - 8 * t) / (8 - 8 * t),
    }


@dataclass(frozen=True)
class ErrorTerms:
    theta: Fraction
    derived: tuple[Monomial, Monomial, Monomial]
    stated: tuple[Monomial, Monomial, Monomial]

    @property
    def identities_hold(self) -> bool:
        return self.derived == self.stated

    def q_exponents(self, l_exponent=0) -> list[Fraction]:
        """q-exponents of the three terms with l = q^{l_exponent}."""
        return [m.restrict(l=l_exponent)["q"] for m in self.stated]


def theorem1_error_exponents(theta) -> ErrorTerms:
    """The three error monomials of the twisted fourth moment.

    The first and third are re-derived by inserting branch-2 C and MN = q^2
    into the Kloosterman-Bessel bound and into the off-diagonal tail bound. The middle
    term l^{17/8} q^{-1/4} is imported as stated.
    """
    t = _theta(theta)
    c2 = balance_cutoff(t).branch2
    first = lemma1_bound(t).restrict(M=1, N=1).substitute("C", c2)
    third = off_diagonal_tail_bound(1).restrict(M=1, N=1).substitute("C", c2)
    middle = Monomial.of(l=Fraction(17, 8), q=Fraction(-1, 4))
    stated = (
        Monomial.of(l=(5 - 6 * t) / (8 - 8 * t), q=-(1 - 2 * t) / (8 - 8 * t)),
        middle,
        Monomial.of(l=(5 - 4 * t) / (8 - 8 * t), q=Fraction(-1) / (8 - 8 * t)),
    )
    return ErrorTerms(t, (first, middle, third), stated)


@dataclass(frozen=True)
class Subconvexity:
    theta: Fraction
    delta: Fraction
    length_exponent: Fraction
    derived_delta: Fraction


def subconvexity_delta(theta) -> Subconvexity:
    """delta = (2 theta - 1)/(16(8 theta - 7)) and the amplifier length exponent.

    ``derived_delta`` re-derives delta by balancing the amplified bound
    ||c||_2^2 + L^{(5-6 theta)/(4-4 theta)} q^{-(1-2 theta)/(8-8 theta)} ||c||_1^2
    with ||c||_2^2 ~ L^{1/2}, ||c||_1^2 ~ L, Lambda^2 ~ L and weight ~ q^{-1}:
    the fourth power of L(f, 1/2) is bounded by q L^{-1/2} at the balance point.
    """
    t = _theta(theta)
    if t >= Fraction(7, 8):
        raise ValueError("theta must be below 7/8")
    delta = (2 * t - 1) / (16 * (8 * t - 7))
    length = (2 * t - 1) / (2 * (8 * t - 7))
    # L^{1/2} = L^{(5-6t)/(4-4t) + 1} q^{-(1-2t)/(8-8t)} solved for the L-exponent.
    amp = Monomial.of(L=(5 - 6 * t) / (4 - 4 * t) + 1, q=-(1 - 2 * t) / (8 - 8 * t))
    L_sol = solve_for(Monomial.of(L=Fraction(1, 2)), amp, "L")["q"]
    derived = L_sol / 8  # L(f, 1/2) << q^{1/4} L^{-1/8}
    if L_sol != length:
        raise ArithmeticError(f"amplifier length {L_sol} differs from {length}")
    if derived != delta:
        raise ArithmeticError(f"balanced delta {derived} differs from {delta}")
    return Subconvexity(t, delta, length, derived)


def _error_constraint(m: Monomial, mollifier_power) -> Fraction:
    """Largest Delta with q^{m_q} q^{Delta * k} -> 0, given m and the Delta-power k."""
    return -m["q"] / _frac(mollifier_power)


@dataclass(frozen=True)
class MollifierLengths:
    theta: Fraction
    delta1_formula: Fraction
    delta1_constraints: tuple[Fraction, Fraction, Fraction]
    delta1_min: Fraction
    delta2: Fraction


def mollifier_lengths(theta) -> MollifierLengths:
    """Admissible mollifier lengths q^Delta.

    The three error terms are
    q^{-(1-2t)/(8-8t)} q^{2 Delta((1-2t)/(8-8t) + 1)},  q^{-1/4} q^{21 Delta/4},
    q^{-1/(8-8t)} q^{2 Delta(1/(8-8t) + 1)}; each tends to zero below its own
    threshold. ``delta1_formula`` is the closed form (1-2t)/(2(9-10t)).
    """
    t = _theta(theta)
    a = (1 - 2 * t) / (8 - 8 * t)
    b = Fraction(1) / (8 - 8 * t)
    cons = (
        _error_constraint(Monomial.of(q=-a), 2 * (a + 1)),
        _error_constraint(Monomial.of(q=Fraction(-1, 4)), Fraction(21, 4)),
        _error_constraint(Monomial.of(q=-b), 2 * (b + 1)),
    )
    formula = (1 - 2 * t) / (2 * (9 - 10 * t))
    if formula != cons[0]:
        raise ArithmeticError("closed-form Delta_1 differs from its error term")
    delta2 = (1 - 2 * t) / (4 * (7 - 8 * t))
    return MollifierLengths(t, formula, cons, min(cons), delta2)


@dataclass(frozen=True)
class Thresholds:
    theta: Fraction
    lemma1: Fraction
    amplifier: Fraction
    per_term: tuple[Fraction, Fraction, Fraction]

    @property
    def per_term_min(self) -> Fraction:
        return min(self.per_term)


def lemma_thresholds(theta) -> Thresholds:
    """Twist ranges l < q^x: the stated ones and those from term dominance.

    The per-term values solve l^{a} q^{b} <= l^{-1/2} for each error term
    l^a q^b, i.e. x = -b/(a + 1/2).
    """
    t = _theta(theta)
    terms = theorem1_error_exponents(t).stated
    per = tuple(-m["q"] / (m["l"] + Fraction(1, 2)) for m in terms)
    return Thresholds(t, Fraction(1) / (5 - 4 * t), Fraction(1) / (12 - 11 * t), per)


@dataclass(frozen=True)
class SelbergEntry:
    year: int
    authors: str
    lambda1: Fraction
    strict: bool
    theta: Fraction
    exact: bool


_SELBERG_BOUNDS = (
    (1965, "Selberg", Fraction(3, 16), False),
    (1978, "Gelbart-Jacquet", Fraction(3, 16), True),
    (1995, "Luo-Rudnick-Sarnak", Fraction(171, 784), True),
    (1996, "Iwaniec", Fraction(10, 49), True),
    (2002, "Kim-Shahidi", Fraction(66, 289), False),
    (2003, "Kim-Sarnak", Fraction(975, 4096), False),
)


def _sqrt_approx(x: Fraction, max_den: int = 10**6) -> Fraction:
    """Best rational approximation to sqrt(x) with bounded denominator.

    Uses integer square roots of a scaled numerator, so the value stays exact
    up to the final limit_denominator.
    """
    scale = 10**40
    root = Fraction(math.isqrt(x.numerator * x.denominator * scale * scale),
                    x.denominator * scale)
    return root.limit_denominator(max_den)


def selberg_table() -> list[SelbergEntry]:
    """The historical lower bounds on lambda_1 with their theta values."""
    out = []
    for year, who, lam, strict in _SELBERG_BOUNDS:
        gap = max(Fraction(0), Fraction(1, 4) - lam)
        root = _rational_sqrt(gap)
        exact = root is not None
        out.append(SelbergEntry(year, who, lam, strict, root if exact else _sqrt_approx(gap), exact))
    return out


# Published decimal/rational values quoted next to their formulas, kept for auditing.
STATED_VALUES = {
    "theta_kim_sarnak": Fraction(7, 64),
    "delta": Fraction(25, 3136),
    "error_exponent": Fraction(25, 228),
    "delta1": Fraction(25, 566),
    "delta2": Fraction(25, 784),
    "amplifier_threshold": Fraction(64, 691),
    "lemma1_threshold": Fraction(16, 73),
}


@dataclass(frozen=True)
class Discrepancy:
    name: str
    stated: Fraction
    derived: Fraction
    note: str = ""

    @property
    def matches(self) -> bool:
        return self.stated == self.derived


def discrepancy_report(theta=KIM_SARNAK) -> list[Discrepancy]:
    """Stated-versus-derived comparison of every value printed with its formula."""
    t = _theta(theta)
    sub = subconvexity_delta(t)
    moll = mollifier_lengths(t)
    thr = lemma_thresholds(t)
    err = theorem1_error_exponents(t)
    worst = -max(err.q_exponents(0))
    s = STATED_VALUES
    return [
        Discrepancy("delta", s["delta"], sub.delta),
        Discrepancy("error_exponent", s["error_exponent"], worst),
        Discrepancy("delta1", s["delta1"], moll.delta1_formula,
                    "closed form evaluated exactly"),
        Discrepancy("delta1_binding", s["delta1"], moll.delta1_min,
                    "minimum over the three mollifier error terms"),
        Discrepancy("delta2", s["delta2"], moll.delta2),
        Discrepancy("lemma1_threshold", s["lemma1_threshold"], thr.lemma1),
        Discrepancy("amplifier_threshold", s["amplifier_threshold"], thr.amplifier,
                    "closed form evaluated exactly"),
        Discrepancy("amplifier_threshold_per_term", s["amplifier_threshold"], thr.per_term_min,
                    "each error term at most l^{-1/2}"),
    ]


def exponent_table(theta=KIM_SARNAK) -> list[tuple[str, Fraction]]:
    """Flat (name, exact value) listing of every derived exponent at theta."""
    t = _theta(theta)
    cut = balance_cutoff(t)
    err = theorem1_error_exponents(t)
    sub = subconvexity_delta(t)
    moll = mollifier_lengths(t)
    thr = lemma_thresholds(t)
    rows = [("theta", t)]
    rows += [(f"C_branch1_{s}", cut.branch1[s]) for s in ("l", "q", "M", "N")]
    rows += [("C_branch2_q", cut.branch2["q"]), ("C_branch2_l", cut.branch2["l"])]
    for i, m in enumerate(err.stated, 1):
        rows += [(f"error{i}_l", m["l"]), (f"error{i}_q", m["q"])]
    rows += [("error_exponent", -max(err.q_exponents(0))),
             ("delta", sub.delta), ("amplifier_length", sub.length_exponent),
             ("delta1_formula", moll.delta1_formula), ("delta1_min", moll.delta1_min),
             ("delta2", moll.delta2), ("lemma1_threshold", thr.lemma1),
             ("amplifier_threshold", thr.amplifier), ("per_term_threshold_min", thr.per_term_min)]
    return rows


def is_strictly_decreasing(values: Iterable[Fraction]) -> bool:
    vals = list(values)
    return all(a > b for a, b in zip(vals, vals[1:]))


def parse_theta_spec(spec: str) -> ThetaValue:
    """'kim-sarnak', 'selberg-conj', or an exact rational lambda_1 like '3/16'."""
    key = spec.strip().lower()
    if key == "kim-sarnak":
        return KIM_SARNAK
    if key in ("selberg-conj", "selberg-conjecture"):
        return SELBERG_CONJECTURE
    try:
        lam = Fraction(key)
    except ValueError as exc:
        raise ValueError(f"cannot parse theta spec {spec!r}") from exc
    return theta_from_lambda(lam, f"lambda1 >= {lam}")
