"""
Capacities of growing balls
===========================

On Z with the standard weights the equilibrium potential of the ball of
radius n is a tent, and its energy is 2/n.  The energies go to zero, which
is what makes the constant function a ground state.  On the 3-regular tree
they level off instead.
"""

import numpy as np

from shnol_lab import FormHandle, build_lattice, build_regular_tree, null_sequence

# Z with b = 1/2 per ordered pair, no potential, counting measure
g, ex = build_lattice(1, 4)
flat = FormHandle(g)

radii = [4, 8, 16, 32, 64, 128, 256, 512]
trace = null_sequence(flat, ex, radii)

print("Z:    n     cap_n          n * cap_n")
for n, cap in zip(trace.radii, trace.cap):
    print(f"   {n:5d}  {cap:.10f}  {n * cap:.12f}")

# the potential itself is 1 - |x|/n inside the ball
phi = trace.potentials[2]
g16 = ex.truncation(15)
tent = 1 - np.abs(g16.coords[:, 0]) / 16
print("max deviation from the tent at n = 16:", np.max(np.abs(phi.on(g16) - tent)))

# The tree is transient: capacities converge to a positive number.
t, et = build_regular_tree(3, 2)
tree = null_sequence(FormHandle(t), et, [2, 4, 6, 8, 10, 12])
print("\n3-regular tree:")
for n, cap in zip(tree.radii, tree.cap):
    print(f"   {n:5d}  {cap:.10f}")
