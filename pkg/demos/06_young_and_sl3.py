"""Superexponential growth on the Young lattice and Motzkin counts for SL3.

On Young's lattice (add or remove a box) closed walks at the empty
partition of length 2n number (2n-1)!!, so no exponential rate fits.  For
the SL3 vector representation b_n are Motzkin numbers and the walk has
period 3.
"""
from __future__ import annotations

from tensorgrowth import bn_sequence, build_family, expand_to_depth, period, power_entry_series

young = build_family("young-lattice")
m = power_entry_series(young, (), (), 12).terms
print("Young closed walks m_2n:", [int(m[2 * n]) for n in range(7)])

sl3 = build_family("sl3-vector")
print("SL3 b_n:", [int(x) for x in bn_sequence(sl3, 12).terms])
print("period at the unit:", period(expand_to_depth(sl3, 12), 0))
