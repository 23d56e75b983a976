"""
Green function, then criticalization
====================================

kappa = 2 makes the form subcritical on Z.  Its Green function at the
origin is 1/sqrt(12) and decays by the factor 2 - sqrt(3) per step.
Subtracting the largest admissible multiple of 1 on {-1, 0, 1} turns the
form critical, and its ground state is comparable to G far away.
"""

import numpy as np

from shnol_lab import (FormHandle, build_lattice, criticalize, detect_criticality,
                       green_function)

g, ex = build_lattice(1, 4, kappa=2.0)
f = FormHandle(g)
gen = ex.generator

G = green_function(f, 0, ex, 200)
print(f"G(0,0) = {G(0):.12f}   1/sqrt(12) = {1 / np.sqrt(12):.12f}")
for x in (1, 5, 20):
    print(f"G({x + 1})/G({x}) = {G(gen.vertex_id([x + 1])) / G(gen.vertex_id([x])):.12f}")
print(f"2 - sqrt(3)      = {2 - np.sqrt(3):.12f}")

K = [gen.vertex_id([x]) for x in (-1, 0, 1)]
W = criticalize(f, K, ex, 256)
print("\ncritical coupling on K:", W.vals[0])

verdict = detect_criticality(f.perturbed(-W), ex, [64, 128, 256])
print("verdict after subtracting W:", verdict.kind)

band = [gen.vertex_id([x]) for x in range(20, 151)]
phi = verdict.ground_state
ratio = np.array([phi(v) / G(v) for v in band])
# phi is normalized by phi(0) = 1, so only the spread of the ratio matters
print(f"phi/G on 20 <= x <= 150: min {ratio.min():.6f}, max {ratio.max():.6f}")
