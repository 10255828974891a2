"""Modular representations of the Klein four group in characteristic 2.

The projective cover P of the trivial module absorbs everything:
V^n = (3^n - 2n - 1)/4 copies of P plus one odd-dimensional summand.  The
asymptotic model a(n) = 3^n / 4 is off by the linear term 3/4 - n/2.
"""
from __future__ import annotations

from tensorgrowth import bn_sequence, build_family, evaluate_model, fit_asymptotic_model

gp = build_family("klein-four")
m = fit_asymptotic_model(gp)
print(f"lambda = {m.lam}, kappa_0 = {m.kappa[0].real:.12f}")
b = bn_sequence(gp, 20).terms
for n in (1, 5, 10, 20):
    print(f"n = {n:2d}  b_n = {int(b[n]):>12d}  closed form = {(3**n - 2 * n - 1) // 4 + 1:>12d}"
          f"  a(n) = {evaluate_model(m, n):16.3f}")
