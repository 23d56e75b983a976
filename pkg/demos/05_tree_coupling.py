"""
How much potential can the tree absorb?
=======================================

For W = 1 on the 3-regular tree the critical coupling t* is the bottom of
the spectrum, 3 - 2 sqrt(2).  Balls of depth n only approach it like 1/n^2,
so depth 14 alone is still 0.05 away.  A three-point fit in 1/(n + d)^2
recovers the limit to about 1e-3.
"""

import numpy as np

from shnol_lab import BoundedPotential, FormHandle, build_regular_tree, critical_coupling

t, ex = build_regular_tree(3, 2)
res = critical_coupling(FormHandle(t), BoundedPotential.constant(1.0), ex, 14,
                        radii=[10, 11, 12, 13, 14])
target = 3 - 2 * np.sqrt(2)

print("depth   t*(B_n)     t* - target")
for n, v in zip(res.radii, res.trace):
    print(f"{n:5d}   {v:.6f}    {v - target:.2e}")

print(f"\nextrapolated t* = {res.extrapolated:.6f}  (target {target:.6f}, "
      f"error {abs(res.extrapolated - target):.1e})")
