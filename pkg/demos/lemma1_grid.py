"""Empirical constant in the Kloosterman-Bessel bound over a grid of cutoffs C.

Run: python demos/lemma1_grid.py   (about a minute)
"""

from fourthmoment import tracesums

q, l, M, N = 11, 1, 8, 8
print(f"q={q} l={l} M={M} N={N}")
print(f"{'C':>6} {'lhs':>12} {'rhs':>10} {'ratio':>9} {'tail':>9}")
for C in (17, 34, 68, 136, 272, 544, 1088, 2176, 4352, 8704):
    r = tracesums.lemma1_ratio(q, l, M, N, C)
    print(f"{C:>6} {r.lhs:>12.5f} {r.rhs:>10.5f} {r.ratio:>9.2f} {r.tail_estimate:>9.1e}")
