"""Tensor powers of the SL2 vector representation.

The fusion graph is the half-line 0 - 1 - 2 - ...  The number of summands
of V^n is a central binomial coefficient and grows like 2^n / sqrt(n), so
normalized by the PF dimension 2 it still tends to zero.  The walk is
transient: the first-return mass at the unit settles near 1/2.
"""
from __future__ import annotations

import math

from tensorgrowth import bn_sequence, build_family, classify_recurrence, pfdim_filtration

gp = build_family("sl2")

b = bn_sequence(gp, 40).terms
print("b_n, n = 0..12:", [int(x) for x in b[:13]])
for n in (10, 20, 40):
    print(f"n = {n:3d}   b_n / 2^n = {b[n] / 2**n:.5f}   sqrt(2/(pi n)) = {math.sqrt(2 / (math.pi * n)):.5f}")

est = pfdim_filtration(gp)
print(f"PF dimension along the cutoffs: {est.verdict}, {est.value:.6f}")

rep = classify_recurrence(gp, 2, N=2000)
print(f"verdict {rep.verdict}: F_N = {rep.first_return:.4f}, G(1/2) partial = {rep.green:.4f}")
