"""Numerical and exact-arithmetic tools for the twisted fourth moment of
weight-2 newforms of prime level.

Modules:
    arith: sieves, multiplicative functions, Kloosterman sums.
    special: Bessel functions J_1, Y_0 and smooth cutoffs.
    modsym: modular symbols, Hecke operators, eigensystems.
    lfun: central values, root numbers, symmetric-square values.
    tracesums: Petersson formula, harmonic weights, Kloosterman-Bessel sums.
    moments: harmonic and natural fourth moments.
    amplifier: amplifier coefficients and amplified moments.
    sieve: large-sieve harness for trilinear Kloosterman forms.
    exponents: exact exponent calculus in theta.
    cache, cli: persistence and the command line.
"""

__version__ = "0.1.0"
