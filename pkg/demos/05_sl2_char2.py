"""Tilting modules of SL2 in characteristic 2.

Cutoff eigenvalues jump when a new block of weights 2^k .. 2^(k+1)-1
closes up, giving nested radicals sqrt(2), sqrt(2 + sqrt(2)), ... that
approach 2.  The final basic class moves outward with the depth, so no
finite class carries the growth.
"""
from __future__ import annotations

from tensorgrowth import build_family, expand_to_depth, pf_eigenvalue, track_final_basic

gp = build_family("sl2-f2")
last = None
for k in range(0, 41):
    lam = pf_eigenvalue(expand_to_depth(gp, k))
    if last is None or lam > last + 1e-12:
        print(f"depth {k:2d}: lambda_k = {lam:.6f}")
    last = lam
tr = track_final_basic(gp, (8, 16, 32))
print("final basic class stable:", tr["stable"])
