"""Null-sequences, criticality verdicts, Green functions and critical couplings.

Null-sequences are equilibrium potentials pinned at the root, ``phi_n(o) = 1``:
the minimizers of ``Q`` over functions vanishing on the sphere of radius n.  Their energies
(capacities) decrease to 0 exactly when the form is critical.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from .errors import ConfigError, ConvergenceError, NotNonnegativeError, NotPositiveDefiniteError, PreconditionError
from .forms import FormHandle, eval_form, operator_norm_bound
from .graph import BoundedPotential, Exhaustion, VertexFunction, restrict
from .numerics import SymmetricOperator, count_below, solve_spd

log = logging.getLogger(__name__)

__all__ = [
    "CapacityTrace",
    "CriticalityVerdict",
    "CouplingResult",
    "equilibrium_potential",
    "null_sequence",
    "detect_criticality",
    "green_function",
    "critical_coupling",
    "criticalize",
    "extrapolate_inverse_square",
    "dyadic_radii",
]

CRITICAL = "Critical"
SUBCRITICAL = "Subcritical"
NOT_NONNEGATIVE = "NotNonnegative"
INCONCLUSIVE = "Inconclusive"

# energies below this fraction of ||H|| m are treated as 0; about 1e3 times
# the resolution of a 40-step coupling bisection
_ZERO_FLOOR = 1e-9


@dataclass
class CapacityTrace:
    radii: list[int] = field(default_factory=list)
    cap: list[float] = field(default_factory=list)
    potentials: list[VertexFunction] = field(default_factory=list)
    green_diag: list[float] = field(default_factory=list)

    def is_monotone(self, rtol: float = 1e-10) -> bool:
        c = np.asarray(self.cap)
        return bool(np.all(c[1:] <= c[:-1] * (1 + rtol) + 1e-15))


@dataclass
class CriticalityVerdict:
    kind: str
    ground_state: VertexFunction | None
    cap_limit_estimate: float
    evidence: CapacityTrace
    note: str = ""

    @property
    def is_critical(self) -> bool:
        return self.kind == CRITICAL

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "cap_limit_estimate": self.cap_limit_estimate,
            "radii": list(self.evidence.radii),
            "cap": list(self.evidence.cap),
            "green_diag": list(self.evidence.green_diag),
            "note": self.note,
        }


def dyadic_radii(n_max: int, n_min: int = 4) -> list[int]:
    out, n = [], n_min
    while n < n_max:
        out.append(n)
        n *= 2
    return out + [n_max]


def _region_form(f: FormHandle, region, ex: Exhaustion | None = None) -> FormHandle:
    """``f`` restricted to ``region``.

    An integer ``n`` means functions vanishing on the sphere ``dist = n``,
    so the unknowns live on ``dist <= n - 1`` (on Z the tent ``1 - |x|/n``).
    An id array is taken literally.
    """
    if np.isscalar(region):
        n = int(region)
        if n < 1:
            raise ConfigError("exhaustion index must be >= 1")
        if ex is not None:
            return f.on(ex.truncation(n - 1))
        g = f.graph
        if g.dist.max() < n - 1 and np.any(g.boundary):
            raise ConfigError(f"region B_{n} exceeds the materialized truncation")
        return FormHandle(restrict(g, g.dist <= n - 1), f.W)
    return FormHandle(restrict(f.graph, np.asarray(region)), f.W)


def _check_nonnegative(op: SymmetricOperator, scale: float) -> None:
    if count_below(op, -1e-12 * scale) > 0:
        raise NotNonnegativeError("form not nonnegative on region")


def equilibrium_potential(f: FormHandle, region, o: int | None = None,
                          ex: Exhaustion | None = None):
    """Minimizer of ``Q(phi)`` over ``phi`` supported in ``region`` with ``phi(o) = 1``.

    Parameters
    ----------
    f : FormHandle
    region : int or array of ids
        An exhaustion index ``n`` (meaning ``B_n``) or explicit ids.
    o : int, optional
        Pinning vertex, defaults to the root.
    ex : Exhaustion, optional
        Used to extend the truncation when ``B_n`` is not materialized.

    Returns
    -------
    phi : VertexFunction
    cap : float
        ``Q(phi)``.
    """
    fr = _region_form(f, region, ex)
    g = fr.graph
    o = g.root if o is None else int(o)
    io = g.index(o)
    op = SymmetricOperator.from_form(fr)
    _check_nonnegative(op, operator_norm_bound(fr))
    phi = np.zeros(g.n)
    phi[io] = 1.0
    if g.n > 1:
        keep = np.ones(g.n, dtype=bool)
        keep[io] = False
        sub = op.submatrix(keep)
        rhs = -np.asarray(op.matrix[:, io].todense()).ravel()[keep] / sub.mass
        try:
            phi[keep] = solve_spd(sub, rhs)
        except NotPositiveDefiniteError as exc:
            raise NotNonnegativeError("form not nonnegative on region") from exc
    cap = eval_form(fr, phi)
    return VertexFunction(g.ids, phi), cap


def null_sequence(f: FormHandle, ex: Exhaustion, n_list, o: int | None = None) -> CapacityTrace:
    """Equilibrium potentials on ``B_n`` for each ``n`` in ``n_list``."""
    trace = CapacityTrace()
    for n in n_list:
        phi, cap = equilibrium_potential(f, int(n), o, ex)
        trace.radii.append(int(n))
        trace.cap.append(cap)
        trace.potentials.append(phi)
    if not trace.is_monotone():
        log.warning("capacities not monotone: %s", trace.cap)
    return trace


def _aitken(c: list[float]) -> float:
    c1, c2, c3 = c[-3:]
    den = (c3 - c2) - (c2 - c1)
    if den == 0:
        return c3
    est = c3 - (c3 - c2) ** 2 / den
    return float(est) if 0 <= est <= c3 else float(c3)


def detect_criticality(f: FormHandle, ex: Exhaustion, radii=None, eps_crit: float = 1e-3,
                       decay: float = 0.75, stable_rel: float = 0.01,
                       check_green: bool = False, o: int | None = None) -> CriticalityVerdict:
    """Classify ``f`` from capacities on an increasing list of radii.

    Critical when the last capacity is below ``eps_crit`` and each of the
    last three values shrinks by a factor ``<= decay`` (or is numerically 0).
    Subcritical when the last capacity is at least ``eps_crit`` and moved by
    less than ``stable_rel`` over the final step.  Anything else is
    Inconclusive; the raw trace is always attached.
    """
    if radii is None:
        top = ex.max_index if ex.max_index is not None else 2048
        radii = dyadic_radii(top)
    radii = [int(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("radii not increasing")
    trace = CapacityTrace()
    for n in radii:
        try:
            phi, cap = equilibrium_potential(f, n, o, ex)
        except NotNonnegativeError as exc:
            return CriticalityVerdict(NOT_NONNEGATIVE, None, float("nan"), trace, str(exc))
        trace.radii.append(n)
        trace.cap.append(cap)
        trace.potentials.append(phi)
        if check_green:
            pole = f.graph.root if o is None else o
            try:
                trace.green_diag.append(float(green_function(f, pole, ex, n)(pole)))
            except NotPositiveDefiniteError:
                trace.green_diag.append(float("inf"))
            except ConvergenceError as exc:
                # ill-conditioned: the form is numerically singular on B_n
                est = exc.estimate
                trace.green_diag.append(float("inf") if est is None else
                                        float(VertexFunction(f.on(ex.truncation(n - 1)).graph.ids, est)(pole)))
    caps = np.asarray(trace.cap)
    # capacities live on the scale of Q(delta_o) <= ||H|| m(o)
    floor = _ZERO_FLOOR * operator_norm_bound(f) * float(np.max(f.graph.measure))
    last = caps[-3:]
    kind, note = INCONCLUSIVE, ""
    if len(caps) >= 3 and last[-1] < eps_crit and all(
        (b <= decay * a) or (b <= floor) for a, b in zip(last, last[1:])
    ):
        kind = CRITICAL
    elif len(caps) >= 2 and caps[-1] >= eps_crit and abs(caps[-1] - caps[-2]) <= stable_rel * caps[-2]:
        kind = SUBCRITICAL
    else:
        note = "capacity trace neither vanishes nor stabilizes at these radii"
    if not trace.is_monotone():
        note = (note + "; " if note else "") + "capacity trace not monotone"
        log.warning("capacity trace not monotone: %s", trace.cap)
    limit = 0.0 if kind == CRITICAL else (_aitken(trace.cap) if len(caps) >= 3 else float(caps[-1]))
    gs = trace.potentials[-1] if kind == CRITICAL else None
    if check_green and len(trace.green_diag) >= 2:
        # cap_n = 1 / G_n(o, o), so divergence uses the capacity thresholds
        inv = [1.0 / gd for gd in trace.green_diag[-2:]]
        diverges = inv[1] <= floor or (inv[1] < eps_crit and inv[1] <= decay * inv[0])
        if diverges != (kind == CRITICAL) and kind != INCONCLUSIVE:
            note = (note + "; " if note else "") + "Green diagonal disagrees with capacity verdict"
    return CriticalityVerdict(kind, gs, limit, trace, note)


def green_function(f: FormHandle, o: int | None, ex: Exhaustion | None, n) -> VertexFunction:
    """Dirichlet Green function ``G_n(., o)`` on ``B_n``: ``H G = delta_o / m(o)``."""
    fr = _region_form(f, n, ex)
    g = fr.graph
    o = g.root if o is None else int(o)
    io = g.index(o)
    op = SymmetricOperator.from_form(fr)
    rhs = np.zeros(g.n)
    rhs[io] = 1.0 / g.measure[io]
    try:
        G = solve_spd(op, rhs, preconditioner="factor" if g.n <= 200_000 else "auto")
    except NotPositiveDefiniteError as exc:
        raise NotPositiveDefiniteError("region not positive definite") from exc
    return VertexFunction(g.ids, G)


@dataclass
class CouplingResult:
    """``t*`` on ``B_{n_max}`` plus the trace over intermediate radii."""

    value: float
    radii: list[int]
    trace: list[float]
    extrapolated: float | None

    @property
    def estimate(self) -> float:
        """Extrapolated limit when available, else the value at ``n_max``."""
        return self.value if self.extrapolated is None else self.extrapolated


def extrapolate_inverse_square(radii, values) -> float | None:
    """Limit ``a`` of the model ``t(n) = a + c / (n + d)^2`` through the last
    three points, or ``None`` when the points do not fit that shape."""
    if len(values) < 3:
        return None
    (n1, n2, n3), (t1, t2, t3) = np.asarray(radii[-3:], float), np.asarray(values[-3:], float)
    if not (t1 > t2 > t3):
        return None
    target = (t1 - t2) / (t2 - t3)

    def ratio(d):
        a, b, c = (n1 + d) ** -2, (n2 + d) ** -2, (n3 + d) ** -2
        return (a - b) / (b - c) - target

    lo, hi = -n1 + 1e-9, 1e6
    try:
        if ratio(lo) * ratio(hi) > 0:
            return None
        d = brentq(ratio, lo, hi, xtol=1e-12)
    except (ValueError, ZeroDivisionError, FloatingPointError):
        return None
    c = (t2 - t3) / ((n2 + d) ** -2 - (n3 + d) ** -2)
    a = t3 - c * (n3 + d) ** -2
    if not (0 <= a <= t3):
        return None
    return float(a)


def critical_coupling(f: FormHandle, W: BoundedPotential, ex: Exhaustion, n_max: int,
                      radii=None, iterations: int = 40) -> CouplingResult:
    """``t* = sup{t >= 0 : Q - t Q_W >= 0 on C_0(B_n)}`` by bisection.

    Feasibility of ``t`` is decided by the inertia of ``K - t diag(W m)``
    (no negative eigenvalue).  The bracket starts at
    ``[0, operator_norm_bound / min_{W>0} W]`` and is tightened by domain
    monotonicity across radii.
    """
    if np.any(W.vals < 0) or W.default < 0:
        raise ConfigError("coupling potential must be nonnegative")
    if W.is_zero:
        raise ConfigError("coupling potential must be nonzero")
    radii = [int(n_max)] if radii is None else sorted({int(r) for r in radii} | {int(n_max)})
    trace: list[float] = []
    upper = None
    for n in radii:
        fr = _region_form(f, n, ex)
        g = fr.graph
        op = SymmetricOperator.from_form(fr)
        _check_nonnegative(op, operator_norm_bound(fr))
        w = W.on(g)
        if not np.any(w > 0):
            raise ConfigError(f"coupling potential vanishes on B_{n}")
        hi = operator_norm_bound(fr) / float(np.min(w[w > 0]))
        if upper is not None:
            hi = min(hi, upper)
        lo = 0.0
        Wm = w * g.measure

        def feasible(t):
            shifted = SymmetricOperator(op.matrix - _diag(t * Wm), g.measure)
            return count_below(shifted, 0.0) == 0

        if feasible(hi):
            trace.append(hi)
            upper = hi
            continue
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        trace.append(lo)
        upper = hi
    return CouplingResult(trace[-1], radii, trace, extrapolate_inverse_square(radii, trace))


def _diag(v):
    return sp.diags(v)


def criticalize(f: FormHandle, K, ex: Exhaustion, n_max: int, radii=None,
                iterations: int = 40) -> BoundedPotential:
    """Potential ``W = t* 1_K`` making ``f - W`` critical on ``B_{n_max}``.

    Raises PreconditionError when the form is already critical (nothing to
    subtract) or not nonnegative.
    """
    verdict = detect_criticality(f, ex, radii if radii is not None else dyadic_radii(n_max))
    if verdict.kind == CRITICAL:
        raise PreconditionError("nothing to criticalize (form is already critical)")
    if verdict.kind == NOT_NONNEGATIVE:
        raise PreconditionError("form not nonnegative")
    K = np.atleast_1d(np.asarray(K, dtype=np.int64))
    host = ex.truncation(n_max)
    if not all(k in host for k in K):
        raise ConfigError("K contains ids that are not vertices of B_n_max")
    indicator = BoundedPotential.indicator(K, 1.0)
    res = critical_coupling(f, indicator, ex, n_max, iterations=iterations)
    if res.value <= 0:
        raise PreconditionError("nothing to criticalize (t* = 0)")
    return indicator.scaled(res.value)
