"""Ground-state transform.

Conjugating by a positive harmonic function ``phi`` maps ``(b, kappa, m)`` to
``(phi(x) phi(y) b, 0, phi^2 m)``.  The map ``u -> u / phi`` is then an
isometry ``l^2(m) -> l^2(phi^2 m)`` intertwining the two operators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PreconditionError
from .forms import FormHandle, apply_operator
from .graph import BoundedPotential, VertexFunction, WeightedGraph

__all__ = ["TransformedSystem", "ground_state_transform", "transform_function",
           "inverse_transform", "harmonicity_residual"]

HARMONIC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TransformedSystem:
    base: WeightedGraph
    phi: np.ndarray
    image: WeightedGraph
    W: BoundedPotential

    def image_form(self) -> FormHandle:
        """Form of the image with ``-W`` read on the image side."""
        return FormHandle(self.image, -self.W)

    def base_form(self) -> FormHandle:
        """Form of ``H`` itself, i.e. ``(H + W) - W`` on the base graph."""
        return FormHandle(self.base)

    def summary(self) -> dict:
        g = self.image
        out = {"vertices": int(g.n), "pairs": int(g.num_pairs),
               "phi_min": float(self.phi.min()), "phi_max": float(self.phi.max()),
               "measure_min": float(g.measure.min())}
        if g.num_pairs <= 10_000:
            out["edges"] = {f"{a},{b}": w for (a, b), w in g.edges().items() if a < b}
        return out


def harmonicity_residual(f: FormHandle, phi) -> float:
    """``max |(H + W) phi|`` over vertices without cut edges."""
    g = f.graph
    r = apply_operator(f, phi)
    inner = g.interior
    return float(np.max(np.abs(r[inner]))) if inner.any() else 0.0


def ground_state_transform(f: FormHandle, phi, tol: float | None = None) -> TransformedSystem:
    """Transform ``f = (b, kappa, m; W)`` by a positive harmonic ``phi``.

    ``phi`` must satisfy ``(H + W) phi = 0`` at every vertex that has no cut
    edge, up to ``tol * (1 + ||kappa||_inf) * sup phi`` (default ``tol`` is
    1e-8).  The image carries zero zero-order term; cut edges are dropped
    (``phi`` is taken to vanish outside, so the harmonicity test skips the
    vertices that have them).
    """
    g = f.graph
    p = g.values(phi)
    if not np.all(p > 0):
        raise PreconditionError("not a positive function")
    tol = HARMONIC_TOL if tol is None else tol
    scale = (1.0 + float(np.max(np.abs(f.potential)))) * float(p.max())
    res = harmonicity_residual(f, p)
    if res > tol * scale:
        raise PreconditionError(f"not a ground state (residual {res:.3e})")
    image = g.replace(
        weight=g.weight * p[g.src] * p[g.dst],
        kappa=np.zeros(g.n),
        measure=p * p * g.measure,
        boundary=np.zeros(g.n),
        source=f"gst({g.source})",
        generator=None,
    )
    return TransformedSystem(g, p, image, f.W)


def transform_function(phi, u, g: WeightedGraph | None = None) -> VertexFunction:
    """``u / phi`` pointwise on the support of ``u``."""
    u = u if isinstance(u, VertexFunction) else VertexFunction.from_array(g, u)
    ph = phi if isinstance(phi, VertexFunction) else VertexFunction(g.ids, g.values(phi))
    den = _lookup(ph, u.ids)
    if np.any(den == 0):
        raise ConfigError("transform undefined where phi vanishes")
    if np.any(den < 0):
        raise PreconditionError("not a positive function")
    return VertexFunction(u.ids, u.values / den)


def inverse_transform(phi, v, g: WeightedGraph | None = None) -> VertexFunction:
    """``phi * v``, the inverse of :func:`transform_function`."""
    v = v if isinstance(v, VertexFunction) else VertexFunction.from_array(g, v)
    ph = phi if isinstance(phi, VertexFunction) else VertexFunction(g.ids, g.values(phi))
    return VertexFunction(v.ids, v.values * _lookup(ph, v.ids))


def _lookup(f: VertexFunction, ids: np.ndarray) -> np.ndarray:
    pos = np.minimum(np.searchsorted(f.ids, ids), max(len(f.ids) - 1, 0))
    out = np.zeros(len(ids))
    if len(f.ids):
        hit = f.ids[pos] == ids
        out[hit] = f.values[pos[hit]]
    return out
