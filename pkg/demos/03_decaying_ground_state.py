"""
Transforming away the potential
===============================

With kappa(0) = -1 and kappa = 1/2 elsewhere, phi(x) = 2^-|x| solves H phi = 0
exactly.  Conjugating by phi removes the zero-order term and reweights
edges and measure.  The two operators are similar on every matched
truncation, so their spectra coincide.
"""

import numpy as np

from shnol_lab import (FormHandle, SymmetricOperator, apply_operator, build_lattice,
                       dense_spectrum, ground_state_transform, lowest_eigenpair, restrict)


def kappa(x):
    return np.where(x[:, 0] == 0, -1.0, 0.5)


R = 200
g, ex = build_lattice(1, R + 1, kappa=kappa)
f = FormHandle(g)
phi = 2.0 ** -np.abs(g.coords[:, 0])
print("max |H phi| on the interior:", np.max(np.abs(apply_operator(f, phi)[g.interior])))

T = ground_state_transform(f, phi)
print("largest image edge weights:", sorted(T.image.weight.tolist())[-4:])
print("image kappa is zero:", not T.image.kappa.any())

keep = g.dist <= R
base = dense_spectrum(SymmetricOperator.from_form(FormHandle(restrict(g, keep))))
image = dense_spectrum(SymmetricOperator.from_form(FormHandle(restrict(T.image, keep))))
print("largest gap between the two spectra:", np.max(np.abs(base - image)))

# phi is square summable, so 0 is an eigenvalue and truncations see it.
for n in (10, 100, 1000):
    lam, _ = lowest_eigenpair(SymmetricOperator.from_form(f.on(ex.truncation(n))))
    print(f"lowest eigenvalue on the radius-{n} ball: {lam:.3e}")
