"""Symmetric linear algebra on finite regions.

Operators are self-adjoint in ``l^2(m)``: ``H = M^{-1} K`` with ``K`` a
symmetric sparse matrix and ``M = diag(m)``.  Everything below works with
the pair ``(K, m)``; eigenproblems are the generalized problems
``K v = lambda M v``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, ConvergenceError, NotPositiveDefiniteError

__all__ = [
    "SymmetricOperator",
    "solve_spd",
    "lowest_eigenpair",
    "dense_spectrum",
    "count_below",
    "nearest_eigenvalue",
    "dense_cap",
    "SOLVE_TOL",
    "EIGEN_TOL",
]

SOLVE_TOL = 1e-10
EIGEN_TOL = 1e-8
FACTOR_CAP = 200_000


def dense_cap() -> int:
    """Largest dimension handled by dense eigensolvers (``SHNOL_DENSE_CAP``)."""
    raw = os.environ.get("SHNOL_DENSE_CAP", "4000")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError(f"SHNOL_DENSE_CAP must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ConfigError("SHNOL_DENSE_CAP must be positive")
    return cap


@dataclass(frozen=True, eq=False)
class SymmetricOperator:
    """``H = M^{-1} K`` on a fixed finite region."""

    matrix: sp.spmatrix
    mass: np.ndarray

    def __post_init__(self):
        K = sp.csr_matrix(self.matrix, dtype=float)
        mass = np.asarray(self.mass, dtype=float)
        if K.shape != (len(mass), len(mass)):
            raise ConfigError("matrix and mass dimensions differ")
        if np.any(~(mass > 0)):
            raise ConfigError("mass must be positive")
        object.__setattr__(self, "matrix", K)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_form(cls, f, shift: float = 0.0) -> "SymmetricOperator":
        op = cls(f.matrix, f.graph.measure)
        return op.shifted(shift) if shift else op

    @property
    def dim(self) -> int:
        return len(self.mass)

    symmetric = True

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u / self.mass

    def shifted(self, s: float) -> "SymmetricOperator":
        return SymmetricOperator(self.matrix + sp.diags(s * self.mass), self.mass)

    def submatrix(self, keep: np.ndarray) -> "SymmetricOperator":
        return SymmetricOperator(self.matrix[keep][:, keep], self.mass[keep])

    def scaled_dense(self) -> np.ndarray:
        """Dense ``M^{-1/2} K M^{-1/2}``, symmetric in the Euclidean sense."""
        d = 1.0 / np.sqrt(self.mass)
        return d[:, None] * self.matrix.toarray() * d[None, :]

    def gershgorin(self) -> tuple[float, float]:
        """Enclosing interval for the spectrum of ``H``."""
        d = 1.0 / np.sqrt(self.mass)
        S = sp.diags(d) @ self.matrix @ sp.diags(d)
        S = sp.csr_matrix(S)
        diag = S.diagonal()
        radius = np.asarray(abs(S).sum(axis=1)).ravel() - np.abs(diag)
        return float(np.min(diag - radius)), float(np.max(diag + radius))


def _symmetric_lu(K: sp.spmatrix):
    """Sparse LU with diagonal pivoting under a symmetric ordering.

    Returns ``None`` when SuperLU had to leave the diagonal (then the pivots
    no longer carry the inertia).
    """
    lu = spla.splu(
        sp.csc_matrix(K),
        permc_spec="MMD_AT_PLUS_A",
        diag_pivot_thresh=0.0,
        options=dict(SymmetricMode=True),
    )
    if not np.array_equal(lu.perm_r, lu.perm_c):
        return None
    return lu


def count_below(A: SymmetricOperator, sigma: float) -> int:
    """Number of eigenvalues of ``H`` strictly below ``sigma``.

    Uses Sylvester's law of inertia on ``K - sigma M = L D L^T``.  If
    ``sigma`` is itself an eigenvalue the count excludes it.
    """
    K = A.matrix - sp.diags(sigma * A.mass)
    try:
        lu = _symmetric_lu(K)
    except RuntimeError:
        lu = None  # exactly singular: sigma is an eigenvalue
    if lu is not None:
        piv = lu.U.diagonal()
        if np.all(np.isfinite(piv)) and np.all(piv != 0):
            return int(np.count_nonzero(piv < 0))
    if A.dim <= dense_cap():
        ev = dense_spectrum(A)
        tol = 1e-13 * max(1.0, float(np.max(np.abs(ev))))
        return int(np.count_nonzero(ev < sigma - tol))
    # Nudge sigma off the singular point and retry.
    lo, hi = A.gershgorin()
    return count_below(A, sigma - 1e-12 * max(1.0, hi - lo))


class _Factor:
    def __init__(self, K):
        try:
            lu = _symmetric_lu(K)
        except RuntimeError as exc:
            raise NotPositiveDefiniteError("operator not positive definite (singular)") from exc
        if lu is None:
            raise NotPositiveDefiniteError("operator not positive definite (pivoting failed)")
        if np.any(lu.U.diagonal() <= 0):
            raise NotPositiveDefiniteError("operator not positive definite")
        self.lu = lu

    def __call__(self, r):
        return self.lu.solve(r)


def solve_spd(A: SymmetricOperator, rhs: np.ndarray, tol: float = SOLVE_TOL,
              max_iter: int | None = None, preconditioner: str = "auto") -> np.ndarray:
    """Solve ``H x = rhs`` by preconditioned conjugate gradients.

    Parameters
    ----------
    A : SymmetricOperator
        Must be positive definite.
    rhs : ndarray
    tol : float
        Target for ``||H x - rhs||_m / ||rhs||_m``.
    max_iter : int, optional
        Defaults to ``max(200, 4 * dim)``.
    preconditioner : {"auto", "factor", "jacobi", "none"}
        ``"factor"`` uses a symmetric sparse LU (its pivots also certify
        positive definiteness); ``"auto"`` picks it below 200k unknowns.

    Raises
    ------
    NotPositiveDefiniteError
        On nonpositive curvature ``p^T K p <= 0`` or a nonpositive pivot.
    ConvergenceError
        When ``max_iter`` is exhausted; carries the achieved residual.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (A.dim,):
        raise ConfigError("rhs has wrong dimension")
    if not tol > 0:
        raise ConfigError("tol must be positive")
    K, m = A.matrix, A.mass
    b = m * rhs
    # residual norm of H x - rhs in l^2(m) equals ||K x - b||_{M^{-1}}
    bnorm = np.sqrt(np.dot(b, b / m))
    if bnorm == 0:
        return np.zeros(A.dim)
    if preconditioner == "auto":
        preconditioner = "factor" if A.dim <= FACTOR_CAP else "jacobi"
    if preconditioner == "factor":
        prec = _Factor(K)
    elif preconditioner == "jacobi":
        diag = K.diagonal()
        if np.any(diag <= 0):
            raise NotPositiveDefiniteError("operator not positive definite (nonpositive diagonal)")
        prec = lambda r: r / diag  # noqa: E731
    elif preconditioner == "none":
        prec = lambda r: r / m  # noqa: E731
    else:
        raise ConfigError(f"unknown preconditioner {preconditioner!r}")
    if max_iter is None:
        max_iter = max(200, 4 * A.dim)

    x = np.zeros(A.dim)
    r = b.copy()
    res = 1.0
    if preconditioner == "factor":
        # direct solve with refinement; the loop below only polishes
        for _ in range(3):
            x += prec(r)
            r = b - K @ x
            res = np.sqrt(np.dot(r, r / m)) / bnorm
            if res <= tol:
                return x
    z = prec(r)
    p = z.copy()
    rz = np.dot(r, z)
    for _ in range(max_iter):
        Kp = K @ p
        curv = np.dot(p, Kp)
        if curv <= 0:
            raise NotPositiveDefiniteError("operator not positive definite (negative curvature)")
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Kp
        res = np.sqrt(np.dot(r, r / m)) / bnorm
        if res <= tol:
            # confirm with a true residual; recurrences drift
            true_r = b - K @ x
            res = np.sqrt(np.dot(true_r, true_r / m)) / bnorm
            if res <= tol:
                return x
            r = true_r
        z = prec(r)
        rz_new = np.dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"solve_spd: no convergence after {max_iter} iterations (residual {res:.3e})",
        residual=res, estimate=x,
    )


def dense_spectrum(A: SymmetricOperator, cap: int | None = None) -> np.ndarray:
    """All eigenvalues of ``H`` in ascending order (dense, up to ``cap``)."""
    cap = dense_cap() if cap is None else cap
    if A.dim > cap:
        raise ConfigError(
            f"dimension {A.dim} exceeds the dense cap {cap}; use lowest_eigenpair "
            "or nearest_eigenvalue instead"
        )
    return sla.eigvalsh(A.scaled_dense())


def _normalize(A: SymmetricOperator, v: np.ndarray) -> np.ndarray:
    v = v / np.sqrt(np.dot(v * A.mass, v))
    i = np.argmax(np.abs(v))
    return v if v[i] >= 0 else -v


def lowest_eigenpair(A: SymmetricOperator, tol: float = EIGEN_TOL):
    """Smallest eigenvalue of ``H`` and an ``l^2(m)``-normalized eigenvector.

    Dense below the cap; otherwise shift-invert Lanczos (ARPACK) with the
    shift just under the Gershgorin bound.  The residual
    ``||H v - lambda v||_m`` is checked against ``tol * max(1, ||H||)``.
    """
    lo, hi = A.gershgorin()
    scale = max(1.0, abs(lo), abs(hi))
    d = 1.0 / np.sqrt(A.mass)
    if A.dim <= dense_cap():
        w, V = sla.eigh(A.scaled_dense(), subset_by_index=[0, 0])
        lam, v = float(w[0]), V[:, 0] * d
    else:
        sigma = lo - 1e-6 * scale
        M = sp.diags(A.mass).tocsc()
        try:
            w, V = spla.eigsh(sp.csc_matrix(A.matrix), k=1, M=M, sigma=sigma,
                              which="LM", tol=tol * 1e-2, ncv=min(A.dim, 40))
        except spla.ArpackNoConvergence as exc:
            best = exc.eigenvalues[0] if len(exc.eigenvalues) else None
            raise ConvergenceError("lowest_eigenpair: ARPACK did not converge",
                                   estimate=best) from exc
        lam, v = float(w[0]), V[:, 0]
    v = _normalize(A, v)
    r = A.apply(v) - lam * v
    res = float(np.sqrt(np.dot(r * A.mass, r)))
    if res > tol * scale:
        raise ConvergenceError(
            f"lowest_eigenpair: residual {res:.3e} above tolerance", residual=res, estimate=lam
        )
    return lam, v


def nearest_eigenvalue(A: SymmetricOperator, sigma: float) -> float:
    """Eigenvalue of ``H`` closest to ``sigma``."""
    if A.dim <= dense_cap():
        ev = dense_spectrum(A)
        return float(ev[np.argmin(np.abs(ev - sigma))])
    M = sp.diags(A.mass).tocsc()
    lo, hi = A.gershgorin()
    scale = max(1.0, abs(lo), abs(hi))
    shift = sigma
    try:
        lu = _symmetric_lu(A.matrix - sp.diags(sigma * A.mass))
        piv = None if lu is None else np.abs(lu.U.diagonal())
    except RuntimeError:
        piv = np.zeros(1)
    if piv is None or np.min(piv) <= 1e-13 * scale * np.max(A.mass):
        # sigma is (numerically) an eigenvalue; shift-invert exactly there is singular
        shift = sigma + 1e-8 * scale
    w = spla.eigsh(sp.csc_matrix(A.matrix), k=1, M=M, sigma=shift, which="LM",
                   return_eigenvectors=False, tol=1e-12)
    return float(w[0])
