"""Walks on Z against walks on the half-line.

Both graphs have spectral radius 2.  On Z every walk eventually returns
(null recurrence: the first-return mass tends to 1 while the mean return
time diverges like sqrt(N)); on the half-line the unit is left for good
with probability 1/2.
"""
from __future__ import annotations

from tensorgrowth import build_family, classify_recurrence

for name in ("line-Z", "sl2"):
    rep = classify_recurrence(build_family(name), 2, N=4000)
    print(f"{name:7s} {rep.verdict:15s} F_N = {rep.first_return:.4f}  mu_N = {rep.mean_return:8.2f}")
    for note in rep.notes:
        print("        ", note)
