"""From modular symbols to a central value and the trace formula at level 11.

Run: python demos/level11_walkthrough.py
"""

import math

import numpy as np

from fourthmoment import lfun, tracesums
from fourthmoment.pipeline import weighted_eigensystem

es = weighted_eigensystem(11)
print(f"level 11: {es.num_forms} newform, n_max = {es.n_max}")

# classical coefficients a_p = lambda(p) sqrt(p) of the curve 11a
ap = {p: round(float(es.lam[0, p] * math.sqrt(p)), 10) for p in (2, 3, 5, 7, 13)}
print("a_p:", ap)

cv = lfun.central_value(es, 0)
print(f"root number {cv.epsilon}, L(f, 1/2) = {cv.value:.12f} using {cv.truncation_length} terms")
print(f"harmonic weight (Rankin-Selberg) {es.weights[0]:.10f}")

# The spectral side of the Petersson formula against the Kloosterman side.
for c_max in (10_000, 100_000, 400_000):
    d = tracesums.petersson_delta(11, 1, 2, c_max=c_max)
    spectral = float(np.sum(es.weights * es.lam[:, 2]))
    print(f"c_max {c_max:>7}: Delta(1,2) = {d.value:+.8f}, spectral {spectral:+.8f}, "
          f"gap {abs(d.value - spectral):.1e}, tail estimate {d.tail_estimate:.1e}")
