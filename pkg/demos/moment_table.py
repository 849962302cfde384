"""Fourth moments, the amplifier and the weight-size diagnostic over prime levels.

Run: python demos/moment_table.py [max_level]
"""

import math
import sys

from fourthmoment import amplifier, arith, moments
from fourthmoment.pipeline import weighted_eigensystem

top = int(sys.argv[1]) if len(sys.argv) > 1 else 101
print(f"{'q':>4} {'g':>3} {'M(1)':>12} {'M(2)':>12} {'M(1)/P':>10} {'max w q/log q':>14} {'Lambda(L=100)':>14}")
for q in arith.primes_up_to(top):
    es = weighted_eigensystem(q)
    if es.num_forms == 0:
        continue
    m1 = moments.fourth_moment(es, 1).harmonic_value
    m2 = moments.fourth_moment(es, 2).harmonic_value
    P = moments.leading_main_term(math.log(q))
    w = amplifier.weight_size_ratio(es).max()
    lam = amplifier.amplified_value(es, 0, amplifier.build_amplifier(es, 0, 100))
    print(f"{q:>4} {es.num_forms:>3} {m1:>12.6f} {m2:>12.6f} {m1 / P:>10.4f} {w:>14.4f} {lam:>14.0f}")
