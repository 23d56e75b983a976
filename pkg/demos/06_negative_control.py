"""
A number outside the spectrum
=============================

lambda = -1 lies below the spectrum [0, 4] of the Laplacian on Z.  Then no
cutoff can make the defect small: for any unit vector w the dual norm of
(H + 1) w is at least 1.  The recurrence still produces a solution of
H u = -u, but it grows like cosh and the pipeline rejects it.
"""

import numpy as np

from shnol_lab import (BoundedPotential, EigenfunctionSpec, FormHandle, ShnolOptions,
                       build_lattice, equilibrium_potential, shnol_verify, spectral_distance,
                       weyl_defect, weyl_vector)

g, ex = build_lattice(1, 4)
f = FormHandle(g)

for n in (50, 200, 800):
    gn = ex.truncation(n)
    tent, _ = equilibrium_potential(f, n, ex=ex)
    w = weyl_vector(gn, tent.on(gn, strict=False), np.cos(gn.coords[:, 0]))
    print(f"n = {n:4d}: defect at lambda = -1 is {weyl_defect(f, w, -1.0, ex):.4f}")

print("distance from -1 to the spectrum of the radius-800 ball:",
      spectral_distance(-1.0, f, 800, ex))

spec = EigenfunctionSpec("recurrence", lam=-1.0, seeds=(1.0, 1.5))
opts = ShnolOptions(radii=(10, 20, 40), criticality_radii=(512, 1024, 2048))
report = shnol_verify(f, BoundedPotential(), spec, -1.0, ex, opts)
print("\npipeline:", report.message)
