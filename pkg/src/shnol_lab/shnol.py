"""Generalized eigenfunctions, Weyl sequences and the Shnol verification pipeline.

The pipeline takes a generalized eigenfunction ``u`` of ``H`` dominated by a
ground state ``phi`` of ``H + W`` and produces, per radius ``n``, a Weyl
vector ``w_n``, its exact q-dual defect and the a priori certificate bounding
it, then compares ``lambda`` with truncated spectra of ``H``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .criticality import CriticalityVerdict, detect_criticality, equilibrium_potential
from .errors import ConfigError, NotNonnegativeError, PreconditionError, ShnolError
from .forms import FormHandle, apply_operator, energy_norm, jump_energy, norm, operator_norm_bound
from .graph import BoundedPotential, Exhaustion, VertexFunction, WeightedGraph, restrict
from .gst import ground_state_transform
from .numerics import SymmetricOperator, dense_cap, dense_spectrum, nearest_eigenvalue, solve_spd

log = logging.getLogger(__name__)

__all__ = [
    "EigenfunctionSpec",
    "build_eigenfunction",
    "is_generalized_eigenfunction",
    "caccioppoli_bound",
    "caccioppoli_audit",
    "caccioppoli_worst_case",
    "sample_unit_q_ball",
    "weyl_vector",
    "weyl_defect",
    "DefectEstimate",
    "defect_estimate",
    "certificate",
    "spectral_distance",
    "ShnolOptions",
    "ShnolReport",
    "WeylRow",
    "shnol_verify",
    "effective_form",
    "product_tent",
]

DOMINATION_SLACK = 1e-10
EIGEN_TOL = 1e-10
PAD_STEPS = (0, 1, 2, 4, 8, 16, 32, 64, 128, 256)


# ---------------------------------------------------------------------------
# eigenfunctions


@dataclass(frozen=True)
class EigenfunctionSpec:
    """Recipe for a real generalized eigenfunction, evaluated per truncation.

    kind
        ``plane_wave`` (``prod_j cos(k_j x_j + phase_j)`` on a lattice),
        ``recurrence`` (three-term recursion on Z from seeds ``u(0), u(1)``),
        ``function`` (callable on the graph), ``file`` (JSON ``{id: value}``)
        or ``ground_state_reference`` (a callable used as the reference
        ground state, returned as the eigenfunction with ``lambda = 0``).
    """

    kind: str
    k: tuple[float, ...] | None = None
    phase: tuple[float, ...] | None = None
    lam: float | None = None
    seeds: tuple[float, float] | None = None
    func: Callable[[WeightedGraph], np.ndarray] | None = field(default=None, compare=False)
    path: str | None = None

    KINDS = ("plane_wave", "recurrence", "function", "file", "ground_state_reference")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError(f"unknown eigenfunction kind {self.kind!r}")
        if self.kind == "plane_wave" and not self.k:
            raise ConfigError("plane_wave needs a wave vector k")
        if self.kind == "recurrence" and (self.lam is None or self.seeds is None):
            raise ConfigError("recurrence needs lambda and two seed values")
        if self.kind in ("function", "ground_state_reference") and self.func is None:
            raise ConfigError(f"{self.kind} needs a callable")
        if self.kind == "file" and not self.path:
            raise ConfigError("file eigenfunction needs a path")

    def eigenvalue(self, g: WeightedGraph) -> float | None:
        """Eigenvalue implied by the recipe, if it determines one."""
        if self.kind == "plane_wave":
            b, m, kap = _homogeneous(g)
            return float(sum(2 * b / m * (2 - 2 * np.cos(kj)) for kj in self.k) + kap)
        if self.kind == "recurrence":
            return float(self.lam)
        if self.kind == "ground_state_reference":
            return 0.0
        return self.lam


def _homogeneous(g: WeightedGraph) -> tuple[float, float, float]:
    if g.coords is None:
        raise ConfigError("plane waves need a lattice graph")
    for name, arr in (("b", g.weight), ("m", g.measure), ("kappa", g.kappa)):
        if len(arr) and np.ptp(arr) > 1e-14 * max(1.0, float(np.max(np.abs(arr)))):
            raise ConfigError(f"plane waves need constant {name}")
    return float(g.weight[0]), float(g.measure[0]), float(g.kappa[0])


def _recurrence(g: WeightedGraph, lam: float, u0: float, u1: float) -> np.ndarray:
    if g.coords is None or g.coords.shape[1] != 1:
        raise ConfigError("recurrence eigenfunctions need a path-like graph (Z)")
    x = g.coords[:, 0]
    lo, hi = int(x.min()), int(x.max())
    if hi < 1 or lo > 0 or len(x) != hi - lo + 1:
        raise ConfigError("recurrence needs a contiguous interval containing 0 and 1")
    b = float(g.weight[0])
    if np.ptp(g.weight) > 0:
        raise ConfigError("recurrence needs constant edge weights")
    order = np.argsort(x)
    kap, m = g.kappa[order], g.measure[order]
    c = (kap - lam) * m / (2 * b)  # indexed by x - lo
    vals = np.zeros(hi - lo + 1)
    vals[-lo], vals[1 - lo] = u0, u1
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1 - lo, hi - lo):
            vals[i + 1] = (2 + c[i]) * vals[i] - vals[i - 1]
        for i in range(-lo, 0, -1):
            vals[i - 1] = (2 + c[i]) * vals[i] - vals[i + 1]
    bad = ~np.isfinite(vals)
    if bad.any():
        reach = int(np.min(np.abs(np.flatnonzero(bad) + lo)))
        raise PreconditionError(f"recurrence overflows at |x| = {reach}")
    out = np.empty(g.n)
    out[order] = vals
    return out


def build_eigenfunction(spec: EigenfunctionSpec, g: WeightedGraph) -> VertexFunction:
    """Evaluate ``spec`` on the vertices of ``g``.

    Examples
    --------
    >>> from shnol_lab.graph import build_lattice
    >>> g, _ = build_lattice(1, 3)
    >>> u = build_eigenfunction(EigenfunctionSpec("recurrence", lam=0.0, seeds=(1.0, 1.0)), g)
    >>> u.on(g).tolist()
    [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
    """
    if spec.kind == "plane_wave":
        _homogeneous(g)
        k = np.asarray(spec.k, dtype=float)
        if len(k) != g.coords.shape[1]:
            raise ConfigError(f"wave vector has {len(k)} components, lattice has {g.coords.shape[1]}")
        ph = np.zeros(len(k)) if spec.phase is None else np.asarray(spec.phase, float)
        vals = np.prod(np.cos(g.coords * k + ph), axis=1)
    elif spec.kind == "recurrence":
        vals = _recurrence(g, float(spec.lam), *map(float, spec.seeds))
    elif spec.kind in ("function", "ground_state_reference"):
        vals = g.values(spec.func(g))
    else:
        try:
            data = json.loads(Path(spec.path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read eigenfunction file {spec.path}: {exc}") from exc
        vf = VertexFunction(np.array([int(i) for i in data], dtype=np.int64),
                            np.array(list(data.values()), dtype=float))
        vals = vf.on(g, strict=False)
    return VertexFunction(g.ids, vals)


def _as_array(g: WeightedGraph, u) -> np.ndarray:
    if isinstance(u, VertexFunction):
        return u.on(g, strict=False)
    return g.values(u)


def is_generalized_eigenfunction(f: FormHandle, u, lam: float, region=None,
                                 tol: float = EIGEN_TOL) -> tuple[bool, float]:
    """Check ``(H_W u)(x) = lambda u(x)`` on ``region``.

    ``region`` defaults to the vertices of ``f.graph`` without cut edges; an
    explicit region must avoid them as well (the equation there would need
    values of ``u`` outside the truncation).

    Returns ``(ok, residual)`` where ``ok`` compares the max residual with
    ``tol * (1 + |lambda|) * sup |u|``.
    """
    g = f.graph
    uu = _as_array(g, u)
    if region is None:
        mask = g.interior
    else:
        mask = np.zeros(g.n, dtype=bool)
        mask[g.index(np.asarray(region, dtype=np.int64))] = True
        if np.any(mask & ~g.interior):
            raise ConfigError("need interior region")
    if not mask.any():
        raise ConfigError("need interior region")
    r = apply_operator(f, uu) - lam * uu
    res = float(np.max(np.abs(r[mask])))
    scale = (1 + abs(lam)) * max(float(np.max(np.abs(uu))), 1e-300)
    return res <= tol * scale, res


# ---------------------------------------------------------------------------
# forms with the zero-order term folded into W


def effective_form(f: FormHandle) -> FormHandle:
    """Same form written as ``Q_{b,0} + Q_{kappa + W}`` (kappa moved into W)."""
    g = f.graph
    if not np.any(g.kappa):
        return f
    W = BoundedPotential.from_array(g, f.potential)
    return FormHandle(g.replace(kappa=np.zeros(g.n)), W)


def _w_sup(f: FormHandle) -> float:
    return float(np.max(np.abs(f.potential)))


# ---------------------------------------------------------------------------
# Caccioppoli


def caccioppoli_bound(lam: float, w_sup: float) -> float:
    """``(1 + sqrt(1 + |lambda| + ||W||_inf))^2``."""
    return (1.0 + np.sqrt(1.0 + abs(lam) + w_sup)) ** 2


def _weighted_gradient(g: WeightedGraph, u: np.ndarray) -> np.ndarray:
    """``A(x) = sum_y d_b u(x, y)^2`` over pairs leaving ``x`` (cut edges included)."""
    src, dst, w = g.extended_pairs()
    up = np.append(u, 0.0)
    a = w * (up[src] - up[dst]) ** 2
    return np.bincount(src, weights=a, minlength=g.n + 1)[: g.n]


def _audit_setup(g: WeightedGraph, W: BoundedPotential, u, lam: float):
    f = effective_form(FormHandle(g, W))
    uu = _as_array(g, u)
    if np.max(np.abs(uu)) > 1 + 1e-12:
        raise PreconditionError("hypothesis |u| <= 1 fails")
    ok, res = is_generalized_eigenfunction(f, uu, lam)
    if not ok:
        raise PreconditionError(f"hypothesis 'generalized eigenfunction' fails (residual {res:.3e})")
    return f, uu


def caccioppoli_audit(g: WeightedGraph, W: BoundedPotential, u, lam: float, v):
    """Evaluate ``sum_{x,y} v(x)^2 d_b u(x,y)^2`` against the a priori bound.

    ``v`` must vanish at vertices with cut edges so that every pair with
    ``v(x) != 0`` uses true values of ``u``.  The zero-order term of ``g``
    is treated as part of ``W``.

    Returns
    -------
    lhs, bound : float
    ok : bool
    """
    f, uu = _audit_setup(g, W, u, lam)
    vv = _as_array(g, v)
    if np.any(vv[~g.interior]):
        raise PreconditionError("hypothesis 'v supported away from the truncation boundary' fails")
    if energy_norm(f, vv) > 1 + 1e-12:
        raise PreconditionError("hypothesis ||v||_q <= 1 fails")
    lhs = float(np.dot(vv * vv, _weighted_gradient(g, uu)))
    bound = caccioppoli_bound(lam, _w_sup(f))
    return lhs, bound, lhs <= bound


def caccioppoli_worst_case(g: WeightedGraph, W: BoundedPotential, u, lam: float) -> tuple[float, float]:
    """Largest possible audit ``lhs`` over ``||v||_q <= 1`` with ``v`` interior.

    This is the top eigenvalue of ``diag(A) v = mu (K + s M) v``.  Returns
    ``(mu, bound)``.
    """
    f, uu = _audit_setup(g, W, u, lam)
    keep = g.interior
    A = _weighted_gradient(g, uu)[keep]
    op = SymmetricOperator.from_form(f, f.shift).submatrix(keep)
    B = sp.csc_matrix(op.matrix)
    if op.dim <= 2:
        vals = np.linalg.eigvalsh(np.linalg.solve(B.toarray(), np.diag(A)))
        mu = float(np.max(vals))
    else:
        mu = float(spla.eigsh(sp.diags(A).tocsc(), k=1, M=B, which="LA",
                              return_eigenvectors=False, tol=1e-10)[0])
    return mu, caccioppoli_bound(lam, _w_sup(f))


def sample_unit_q_ball(f: FormHandle, rng: np.random.Generator, mask=None) -> np.ndarray:
    """Random ``v`` on ``mask`` (default: interior) with ``||v||_q`` in ``(0, 1]``.

    Mixes white noise, smooth bumps, spikes and sign patterns so that both
    rough and smooth directions of the unit ball get sampled.
    """
    g = f.graph
    mask = g.interior if mask is None else mask
    idx = np.flatnonzero(mask)
    v = np.zeros(g.n)
    kind = rng.integers(4)
    if kind == 0:
        v[idx] = rng.standard_normal(len(idx))
    elif kind == 1:
        c = rng.choice(idx)
        width = rng.uniform(1, max(2.0, g.dist.max() / 2))
        d = np.abs(g.dist[idx] - g.dist[c]) if g.coords is None else \
            np.abs(g.coords[idx] - g.coords[c]).max(axis=1)
        v[idx] = np.exp(-(d / width) ** 2) * rng.choice([-1, 1])
    elif kind == 2:
        pick = rng.choice(idx, size=min(len(idx), int(rng.integers(1, 6))), replace=False)
        v[pick] = rng.standard_normal(len(pick))
    else:
        v[idx] = rng.choice([-1.0, 1.0], size=len(idx)) * rng.uniform(0, 1, len(idx)) ** 4
    if not np.any(v):
        v[idx[0]] = 1.0
    return v * rng.uniform(0.5, 1.0) / energy_norm(f, v)


# ---------------------------------------------------------------------------
# Weyl vectors, defects, certificates


def weyl_vector(g: WeightedGraph, phi_n, u) -> VertexFunction:
    """``phi_n u / ||phi_n u||`` in ``l^2(m)``."""
    p, uu = _as_array(g, phi_n), _as_array(g, u)
    prod = p * uu
    nrm = norm(g, prod)
    if nrm == 0:
        raise PreconditionError("eigenfunction vanishes on cutoff support")
    return VertexFunction.from_array(g, prod / nrm)


@dataclass(frozen=True)
class DefectEstimate:
    value: float
    converged: bool
    radius: int
    history: tuple[float, ...]

    @property
    def lower_bound_only(self) -> bool:
        return not self.converged


def _containing_index(ex: Exhaustion, ids: np.ndarray, start: int) -> int:
    n = max(start, 0)
    while True:
        g = ex.truncation(n)
        inside = np.isin(ids, g.ids)
        if inside.all():
            pos = g.index(ids)
            if g.interior[pos].all():
                return n
        if ex.max_index is not None and n >= ex.max_index:
            if inside.all():
                return n
            raise ConfigError("support of w leaves the graph")
        n = n + 1 if n < 8 else int(n * 1.25) + 1


def defect_estimate(f: FormHandle, w, lam: float, ex: Exhaustion, tol: float = 1e-3,
                    start: int | None = None, pads=PAD_STEPS) -> DefectEstimate:
    """Dual-norm defect of ``w`` with truncation history (see :func:`weyl_defect`)."""
    w = w if isinstance(w, VertexFunction) else VertexFunction.from_array(f.graph, w)
    supp = w.support
    if len(supp) == 0:
        raise PreconditionError("w vanishes")
    if start is None:
        inside = np.isin(supp, f.graph.ids)
        start = int(f.graph.dist[f.graph.index(supp)].max()) if inside.all() else 0
    n0 = _containing_index(ex, supp, start)
    g0 = ex.truncation(n0)
    f0 = f.on(g0)
    ww = w.on(g0)
    r = VertexFunction(g0.ids, apply_operator(f0, ww) - lam * ww)
    s = f.shift
    history: list[float] = []
    converged = False
    n = n0
    for p in pads:
        n = n0 + p
        if ex.max_index is not None and n > ex.max_index:
            n = ex.max_index
        g = ex.truncation(n)
        fn = f.on(g)
        rr = r.on(g)
        op = SymmetricOperator.from_form(fn, s)
        z = solve_spd(op, rr)
        history.append(float(np.sqrt(max(np.dot(rr * g.measure, z), 0.0))))
        if len(history) >= 2:
            prev, cur = history[-2], history[-1]
            if cur - prev <= tol * max(cur, 1e-300):
                converged = True
                break
        if ex.max_index is not None and n >= ex.max_index:
            converged = True  # the whole finite graph: the value is exact
            break
    if not converged:
        log.warning("defect did not stabilize up to radius %d; lower bound only", n)
    return DefectEstimate(history[-1], converged, n, tuple(history))


def weyl_defect(f: FormHandle, w, lam: float, ex: Exhaustion, tol: float = 1e-3) -> float:
    """``sup {|q(w, v) - lambda <w, v>| : ||v||_q <= 1}``.

    Equal to ``sqrt(<r, (H_W + s)^{-1} r>)`` with ``r = (H_W - lambda) w`` and
    ``s = 1 + ||W||_inf``.  The solve runs on growing truncations of ``ex``
    (the values increase with the truncation) until the relative change drops
    below ``tol``; see :func:`defect_estimate` for the convergence flag.
    """
    return defect_estimate(f, w, lam, ex, tol).value


def certificate(f: FormHandle, phi_n, u, lam: float) -> float:
    """``(2 + sqrt(1 + |lambda| + ||W||_inf)) Q(phi_n)^{1/2} / ||phi_n u||``.

    ``Q`` is the jump part; the zero-order term counts as part of ``W``.
    """
    g = f.graph
    p, uu = _as_array(g, phi_n), _as_array(g, u)
    nrm = norm(g, p * uu)
    if nrm == 0:
        raise PreconditionError("eigenfunction vanishes on cutoff support")
    pref = 2.0 + np.sqrt(1.0 + abs(lam) + _w_sup(f))
    return float(pref * np.sqrt(max(jump_energy(g, p), 0.0)) / nrm)


def spectral_distance(lam: float, f: FormHandle, region=None, ex: Exhaustion | None = None) -> float:
    """``min |lambda - mu|`` over eigenvalues ``mu`` of ``H_W`` restricted to ``region``.

    ``region`` is a truncation index of ``ex``, an id array, or ``None``
    (the whole of ``f.graph``).
    """
    if region is None:
        fr = f
    elif np.isscalar(region):
        if ex is None:
            raise ConfigError("integer regions need an exhaustion")
        fr = f.on(ex.truncation(int(region)))
    else:
        fr = FormHandle(restrict(f.graph, np.asarray(region)), f.W)
    op = SymmetricOperator.from_form(fr)
    if op.dim <= dense_cap():
        ev = dense_spectrum(op)
        return float(np.min(np.abs(ev - lam)))
    return abs(lam - nearest_eigenvalue(op, lam))


def product_tent(g: WeightedGraph, n: int) -> np.ndarray:
    """``prod_j max(0, 1 - |x_j| / n)`` on a lattice truncation."""
    if g.coords is None:
        raise ConfigError("product tents need lattice coordinates")
    return np.prod(np.clip(1.0 - np.abs(g.coords) / n, 0.0, None), axis=1)


# ---------------------------------------------------------------------------
# the pipeline


@dataclass
class ShnolOptions:
    """Knobs of :func:`shnol_verify`.

    ``null_kind`` selects the cutoffs of stage 4: ``equilibrium`` (equilibrium
    potentials of the transformed form) or ``product_tent`` (products of 1-d
    tents, for lattices where equilibrium potentials decay too slowly).
    """

    radii: list[int]
    criticality_radii: list[int]
    distance_radius: int | None = None
    distance_region: np.ndarray | None = None
    defect_target: float = 0.05
    dist_target: float = 1e-2
    defect_tol: float = 1e-3
    audit_samples: int = 64
    seed: int = 0
    reference_ground_state: EigenfunctionSpec | None = None
    gs_check_fraction: float = 1 / 32
    gs_check_tol: float = 0.05
    null_kind: str = "equilibrium"
    row_distances: bool = True
    skip_criticality: bool = False

    def __post_init__(self):
        for name in ("radii", "criticality_radii"):
            r = [int(x) for x in getattr(self, name)]
            if any(b <= a for a, b in zip(r, r[1:])):
                raise ConfigError("radii not increasing")
            if r and r[0] < 1:
                raise ConfigError("radii must be positive")
            setattr(self, name, r)
        if not self.radii:
            raise ConfigError("radii must be nonempty")
        if self.null_kind not in ("equilibrium", "product_tent"):
            raise ConfigError(f"unknown null_kind {self.null_kind!r}")


@dataclass
class WeylRow:
    n: int
    cap_n: float
    norm_wu: float
    defect: float
    certificate: float
    dist: float | None
    defect_converged: bool = True

    COLUMNS = ("n", "cap_n", "norm_wu", "defect", "certificate", "dist")

    def as_tuple(self):
        return tuple(getattr(self, c) for c in self.COLUMNS)


STAGES = {1: "criticality", 2: "eigenfunction", 3: "ground-state transform",
          4: "null-sequence", 5: "Weyl defects", 6: "spectral distance"}


@dataclass
class ShnolReport:
    lam: float
    passed: bool = False
    failed_stage: int | None = None
    message: str = ""
    verdict: CriticalityVerdict | None = None
    rows: list[WeylRow] = field(default_factory=list)
    spectral_distance: float | None = None
    eigen_residual: float | None = None
    domination_ratio: float | None = None
    gs_deviation: float | None = None
    caccioppoli: dict | None = None
    checks: dict = field(default_factory=dict)
    transform: dict | None = None

    @property
    def stage_name(self) -> str | None:
        return None if self.failed_stage is None else STAGES[self.failed_stage]

    def fail(self, stage: int, message: str) -> "ShnolReport":
        self.passed = False
        self.failed_stage = stage
        self.message = f"stage {stage} ({STAGES[stage]}): {message}"
        log.info(self.message)
        return self

    # WeylReport view
    @property
    def radii(self):
        return [r.n for r in self.rows]

    @property
    def defect(self):
        return [r.defect for r in self.rows]

    @property
    def certificate(self):
        return [r.certificate for r in self.rows]

    @property
    def norm_wu(self):
        return [r.norm_wu for r in self.rows]

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "passed": self.passed,
            "failed_stage": self.failed_stage,
            "stage_name": self.stage_name,
            "message": self.message,
            "criticality": None if self.verdict is None else self.verdict.to_dict(),
            "weyl": {
                "radii": self.radii,
                "defect": self.defect,
                "certificate": self.certificate,
                "norm_wu": self.norm_wu,
                "cap": [r.cap_n for r in self.rows],
                "dist": [r.dist for r in self.rows],
                "defect_converged": [r.defect_converged for r in self.rows],
                "spectral_distance": self.spectral_distance,
            },
            "eigen_residual": self.eigen_residual,
            "domination_ratio": self.domination_ratio,
            "ground_state_deviation": self.gs_deviation,
            "caccioppoli": self.caccioppoli,
            "checks": self.checks,
            "transform": self.transform,
        }


def _reference_deviation(verdict: CriticalityVerdict, ref: EigenfunctionSpec,
                         ex: Exhaustion, frac: float) -> float:
    n_max = verdict.evidence.radii[-1]
    reach = max(int(n_max * frac), 0)
    g = ex.truncation(reach)
    ref_vals = build_eigenfunction(ref, g).on(g)
    ref_vals = ref_vals / ref_vals[g.root_index]
    gs = verdict.ground_state.on(g, strict=False)
    return float(np.max(np.abs(gs / gs[g.root_index] - ref_vals)))


def _restrict_values(big: WeightedGraph, g: WeightedGraph, vals: np.ndarray) -> np.ndarray:
    return vals[big.index(g.ids)]


def _pipeline_audit(T, u_phi: np.ndarray, lam: float, radius: int, samples: int,
                    rng: np.random.Generator) -> dict:
    g = restrict(T.image, T.image.dist <= radius + 1)
    uu = _restrict_values(T.image, g, u_phi)
    W = -T.W
    f = effective_form(FormHandle(g, W))
    worst = 0.0
    violations = 0
    bound = caccioppoli_bound(lam, _w_sup(f))
    for _ in range(samples):
        v = sample_unit_q_ball(f, rng)
        lhs, bound, ok = caccioppoli_audit(g, W, uu, lam, v)
        violations += not ok
        worst = max(worst, lhs)
    return {"samples": samples, "radius": radius, "violations": violations,
            "max_lhs": worst, "bound": bound}


def shnol_verify(base: FormHandle, W: BoundedPotential, u_spec: EigenfunctionSpec,
                 lam: float | None, ex: Exhaustion, opts: ShnolOptions) -> ShnolReport:
    """Run the six-stage Shnol pipeline and return a structured report.

    Stages: (1) criticality of ``H + W`` with ground state ``phi``; (2) the
    eigen-equation for ``H`` and domination ``|u| <= phi``; (3) transform of
    ``H + W`` by ``phi``, giving ``u_phi = u / phi`` with ``|u_phi| <= 1``;
    (4) null-sequence of the transformed form; (5) Weyl vectors, defects and
    certificates; (6) distance of ``lambda`` to truncated spectra of ``H``.

    The report passes iff defect <= certificate at every radius, the defects
    decrease and end below ``defect_target``, and the final spectral
    distance is below ``dist_target``.  Failures name the stage.
    """
    base = FormHandle(base.graph)  # H itself: only b, kappa, m
    plus = base.perturbed(W)
    r_max = max(opts.radii)
    r_img = r_max + max(PAD_STEPS) + 2
    g_big = ex.truncation(r_img)
    if lam is None:
        lam = u_spec.eigenvalue(g_big)
        if lam is None:
            raise ConfigError("lambda must be given for this eigenfunction kind")
    lam = float(lam)
    rep = ShnolReport(lam=lam)

    # (1) criticality
    if opts.skip_criticality:
        verdict = None
    else:
        verdict = detect_criticality(plus, ex, opts.criticality_radii)
        rep.verdict = verdict
        if verdict.kind != "Critical":
            return rep.fail(1, f"H + W is {verdict.kind}, not critical. {verdict.note}".strip())
    ref = opts.reference_ground_state
    if ref is not None and verdict is not None:
        rep.gs_deviation = _reference_deviation(verdict, ref, ex, opts.gs_check_fraction)
        if rep.gs_deviation > opts.gs_check_tol:
            return rep.fail(1, f"computed ground state deviates from the reference by {rep.gs_deviation:.3g}")
    if ref is not None:
        phi = build_eigenfunction(ref, g_big).on(g_big)
    elif verdict is not None:
        phi = verdict.ground_state.on(g_big, strict=False)
    else:
        raise ConfigError("a reference ground state is required when criticality is skipped")

    # (2) eigen-equation and domination
    try:
        u = build_eigenfunction(u_spec, g_big).on(g_big)
    except PreconditionError as exc:
        # beyond float range no representable phi dominates u
        return rep.fail(2, f"domination |u| <= phi fails: {exc}")
    ok, res = is_generalized_eigenfunction(FormHandle(g_big), u, lam)
    rep.eigen_residual = res
    if not ok:
        return rep.fail(2, f"u is not a generalized eigenfunction (residual {res:.3e})")
    if np.any(phi <= 0):
        return rep.fail(2, "ground state not positive on the truncation")
    ratio = float(np.max(np.abs(u) / phi))
    rep.domination_ratio = ratio
    if ratio > 1 + DOMINATION_SLACK:
        return rep.fail(2, f"domination |u| <= phi fails (max |u|/phi = {ratio:.4g})")

    # (3) transform
    try:
        T = ground_state_transform(FormHandle(g_big, W), phi)
    except PreconditionError as exc:
        return rep.fail(3, str(exc))
    u_phi = u / phi
    img = T.image_form()
    ex_img = Exhaustion.of_graph(T.image)
    rep.transform = {k: v for k, v in T.summary().items() if k != "edges"}
    inner_img = img.on(restrict(T.image, T.image.dist <= r_img - 1))
    ok, res_phi = is_generalized_eigenfunction(
        inner_img, _restrict_values(T.image, inner_img.graph, u_phi), lam)
    rep.checks["transformed_eigen_residual"] = res_phi
    if not ok:
        return rep.fail(3, f"u/phi is not an eigenfunction of the image (residual {res_phi:.3e})")

    # (4)-(5) per radius
    rng = np.random.default_rng(opts.seed)
    img_jump = FormHandle(T.image)
    for n in opts.radii:
        g_n = ex_img.truncation(n)
        if opts.null_kind == "equilibrium":
            try:
                pv, cap = equilibrium_potential(img_jump, n, ex=ex_img)
            except (NotNonnegativeError, ShnolError) as exc:
                return rep.fail(4, str(exc))
            p = pv.on(g_n, strict=False)
        else:
            p = product_tent(g_n, n) if g_n.coords is not None else None
            if p is None:
                return rep.fail(4, "product tents need lattice coordinates")
            cap = jump_energy(g_n, p)
        f_n = img.on(g_n)
        try:
            uu_n = _restrict_values(T.image, g_n, u_phi)
            w = weyl_vector(g_n, p, uu_n)
            est = defect_estimate(img, w, lam, ex_img, opts.defect_tol)
            cert = certificate(f_n, p, uu_n, lam)
            norm_wu = norm(g_n, p * uu_n)
        except ShnolError as exc:
            return rep.fail(5, str(exc))
        dist = None
        if opts.row_distances:
            dist = spectral_distance(lam, base, n, ex)
        rep.rows.append(WeylRow(n, cap, norm_wu, est.value, cert, dist, est.converged))

    rows = rep.rows
    dominated = all(r.defect <= r.certificate * (1 + 1e-9) for r in rows)
    decreasing = all(b.defect < a.defect for a, b in zip(rows, rows[1:]))
    rep.checks.update(defect_dominated=dominated, defect_decreasing=decreasing,
                      defect_converged=all(r.defect_converged for r in rows))
    s = img.shift
    bound_ok = [r.dist is None or r.dist <= r.defect * np.sqrt(operator_norm_bound(plus.on(ex.truncation(r.n))) + s) + 1e-12
                for r in rows]
    rep.checks["distance_bound"] = all(bound_ok)

    # seeded Caccioppoli audit on the image side
    if opts.audit_samples:
        rep.caccioppoli = _pipeline_audit(T, u_phi, lam, min(r_max, 200), opts.audit_samples, rng)

    # (6) spectral distance for H itself
    try:
        if opts.distance_region is not None:
            if opts.distance_radius is None:
                raise ConfigError("distance_region needs distance_radius (a containing truncation)")
            host = base.on(ex.truncation(opts.distance_radius))
            rep.spectral_distance = spectral_distance(lam, host, opts.distance_region)
        elif opts.distance_radius is not None:
            rep.spectral_distance = spectral_distance(lam, base, opts.distance_radius, ex)
    except ShnolError as exc:
        return rep.fail(6, str(exc))

    if not dominated:
        return rep.fail(5, "defect exceeds certificate")
    if not decreasing:
        return rep.fail(5, "defects do not decrease")
    if rows[-1].defect > opts.defect_target:
        return rep.fail(5, f"final defect {rows[-1].defect:.3g} above target {opts.defect_target:.3g}")
    if rep.caccioppoli is not None and rep.caccioppoli["violations"]:
        return rep.fail(5, f"{rep.caccioppoli['violations']} Caccioppoli violations")
    if rep.spectral_distance is not None and rep.spectral_distance > opts.dist_target:
        return rep.fail(6, f"distance {rep.spectral_distance:.3g} above target {opts.dist_target:.3g}")
    rep.passed = True
    rep.message = "pass"
    return rep
