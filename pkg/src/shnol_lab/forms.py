"""Quadratic forms ``Q_{b,kappa} + Q_W`` on a weighted graph and their operators.

Conventions
-----------
The jump part sums over *ordered* pairs with no factor 1/2::

    Q(u, v) = sum_{x,y} b(x,y) (u(x)-u(y)) (v(x)-v(y))
              + sum_x (kappa(x) + W(x)) u(x) v(x) m(x)

so the associated operator on ``l^2(X, m)`` is::

    (H u)(x) = 2/m(x) sum_y b(x,y) (u(x)-u(y)) + (kappa(x) + W(x)) u(x).

Cut edges of a truncation enter with ``u(y) = 0`` outside.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import PreconditionError
from .graph import BoundedPotential, WeightedGraph, pad, restrict

__all__ = [
    "FormHandle",
    "eval_form",
    "apply_operator",
    "d_b",
    "edge_differences",
    "jump_energy",
    "energy_norm",
    "leibniz_residual",
    "operator_norm_bound",
    "inner",
    "norm",
]


@dataclass(frozen=True, eq=False)
class FormHandle:
    """Form ``q = Q_{b,kappa} + <W ., .>`` on a finite (truncated) graph."""

    graph: WeightedGraph
    W: BoundedPotential = field(default_factory=BoundedPotential)

    @property
    def shift(self) -> float:
        """Norm shift ``s = 1 + ||W||_inf`` of the energy norm."""
        return 1.0 + self.W.sup_norm

    @cached_property
    def potential(self) -> np.ndarray:
        """Zero-order coefficient ``kappa + W`` on the vertices."""
        return self.graph.kappa + self.W.on(self.graph)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Symmetric matrix ``K`` with ``Q(u, v) = u @ K @ v``."""
        g = self.graph
        off = sp.coo_matrix((-2.0 * g.weight, (g.src, g.dst)), shape=(g.n, g.n))
        diag = 2.0 * g.degree + self.potential * g.measure
        return (off + sp.diags(diag)).tocsr()

    def on(self, g: WeightedGraph) -> "FormHandle":
        """Same potential ``W`` on another truncation."""
        return FormHandle(g, self.W)

    def restricted(self, region) -> "FormHandle":
        return FormHandle(restrict(self.graph, region), self.W)

    def perturbed(self, extra: BoundedPotential) -> "FormHandle":
        """Form with potential ``W + extra``."""
        return FormHandle(self.graph, self.W + extra)

    def without_potential(self) -> "FormHandle":
        return FormHandle(self.graph)


def inner(g: WeightedGraph, u, v) -> float:
    """Inner product of ``l^2(X, m)``."""
    return float(np.sum(g.values(u) * g.values(v) * g.measure))


def norm(g: WeightedGraph, u) -> float:
    return float(np.sqrt(inner(g, u, u)))


def edge_differences(g: WeightedGraph, u) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``d_b u`` on all extended ordered pairs.

    Returns ``(src, dst, du)``; ``src``/``dst`` may equal ``g.n`` (the ghost
    vertex outside a truncation, where functions vanish).
    """
    src, dst, w = g.extended_pairs()
    up = pad(g.values(u))
    return src, dst, np.sqrt(w) * (up[src] - up[dst])


def d_b(g: WeightedGraph, u, x: int, y: int) -> float:
    """``sqrt(b(x,y)) (u(x) - u(y))`` for vertex ids ``x``, ``y``.

    Returns 0 when ``x`` and ``y`` are not adjacent.
    """
    i, j = g.index([x, y])
    hit = (g.src == i) & (g.dst == j)
    if not hit.any():
        return 0.0
    uu = g.values(u)
    return float(np.sqrt(g.weight[hit][0]) * (uu[i] - uu[j]))


def jump_energy(g: WeightedGraph, u, v=None) -> float:
    """Jump part ``sum_{x,y} d_b u(x,y) d_b v(x,y)`` (cut edges included)."""
    _, _, du = edge_differences(g, u)
    dv = du if v is None else edge_differences(g, v)[2]
    return float(np.dot(du, dv))


def eval_form(f: FormHandle, u, v=None) -> float:
    """Evaluate ``q(u, v)``; ``v`` defaults to ``u``."""
    g = f.graph
    uu = g.values(u)
    vv = uu if v is None else g.values(v)
    return jump_energy(g, uu, vv) + float(np.sum(f.potential * uu * vv * g.measure))


def apply_operator(f: FormHandle, u) -> np.ndarray:
    """``(H + kappa + W) u`` evaluated pointwise on the truncation.

    At vertices with cut edges this is the Dirichlet operator; elsewhere it
    agrees with the operator of the infinite graph.
    """
    g = f.graph
    uu = g.values(u)
    flux = np.bincount(g.src, weights=g.weight * (uu[g.src] - uu[g.dst]), minlength=g.n)
    flux += g.boundary * uu
    return 2.0 * flux / g.measure + f.potential * uu


def energy_norm(f: FormHandle, v) -> float:
    """``sqrt(q(v, v) + (1 + ||W||_inf) ||v||^2)``.

    Raises PreconditionError if the bracket is negative, which means the
    form is not semibounded with the declared constant.
    """
    g = f.graph
    vv = g.values(v)
    val = eval_form(f, vv) + f.shift * inner(g, vv, vv)
    if val < 0:
        scale = eval_form(FormHandle(g), np.abs(vv)) + inner(g, vv, vv)
        if val < -1e-12 * max(scale, 1e-300):
            raise PreconditionError("form not semibounded as declared")
        val = 0.0
    return float(np.sqrt(val))


def leibniz_residual(g: WeightedGraph, u, v, w) -> float:
    """LHS - RHS of the integrated Leibniz rule on ``g``::

        sum d_b(uv) d_b w = sum u(x) d_b v d_b w + sum v(x) d_b u d_b w
    """
    uu, vv, ww = g.values(u), g.values(v), g.values(w)
    src, _, d_uv = edge_differences(g, uu * vv)
    _, _, du = edge_differences(g, uu)
    _, _, dv = edge_differences(g, vv)
    _, _, dw = edge_differences(g, ww)
    ux, vx = pad(uu)[src], pad(vv)[src]
    return float(np.sum(d_uv * dw) - np.sum(ux * dv * dw) - np.sum(vx * du * dw))


def operator_norm_bound(f: FormHandle) -> float:
    """``sup_x 4 sum_y b(x,y)/m(x) + ||kappa + W||_inf`` (bounds ``||H_W||``)."""
    g = f.graph
    return float(np.max(4.0 * g.degree / g.measure) + np.max(np.abs(f.potential)))
