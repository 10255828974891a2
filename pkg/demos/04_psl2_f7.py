"""A finite cutoff for PSL2(F7) in characteristic 2.

The problem is finite (16 vertices) with a four-vertex final basic class
carrying eigenvalue 3.  The relative error of the model decays at the rate
|lambda_2 / lambda| = sqrt(2)/3.
"""
from __future__ import annotations

import math

from tensorgrowth import build_family, exhaust, fit_asymptotic_model, scc_decomposition, variance_report

gp = build_family("psl2-f7-cutoff")
t = exhaust(gp)
scc = scc_decomposition(t)
print(f"{t.size} vertices, {scc.count} strongly connected classes")
m = fit_asymptotic_model(gp)
print(f"lambda = {m.lam:.12f}, kappa_0 = {m.kappa[0].real:.12f}")
rep = variance_report(gp, m, 120, fit_from=20)
print(f"fitted ratio {rep.fitted_ratio:.4f} against sqrt(2)/3 = {math.sqrt(2) / 3:.4f}")
