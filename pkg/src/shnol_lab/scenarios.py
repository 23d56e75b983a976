"""Scenario configs (JSON, ``"schema": 1``) and their runners.

A scenario names a graph, potentials, an eigenfunction and radii.  Four
kinds exist:

``shnol``     the full verification pipeline
``product``   the pipeline on Z^d with product tents as cutoffs (criticality
              of Z^d is not certified at desk scale, so stage 1 is replaced
              by the closed-form ground state 1)
``green``     Green function of a subcritical form plus criticalization
``coupling``  critical coupling constant with extrapolation
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .criticality import (critical_coupling, criticalize, detect_criticality,
                          equilibrium_potential, green_function)
from .errors import ConfigError
from .forms import FormHandle
from .graph import BoundedPotential, Exhaustion, LatticeGenerator, TreeGenerator, load_graph
from .numerics import SymmetricOperator, lowest_eigenpair
from .shnol import EigenfunctionSpec, ShnolOptions, shnol_verify

__all__ = ["Scenario", "ScenarioResult", "BUILTINS", "builtin", "load_scenario",
           "parse_scenario", "run", "TABLE_COLUMNS"]

SCHEMA = 1
KINDS = ("shnol", "product", "green", "coupling")
TABLE_COLUMNS = ("n", "cap_n", "norm_wu", "defect", "certificate", "dist")


# ---------------------------------------------------------------------------
# JSON vertex specs


def _vertex_spec(spec, name: str):
    """Number, ``{"at_origin": a, "default": c}`` or ``{"values": {...}, "default": c}``.

    Lattice callables receive coordinates ``(N, d)``; tree callables the
    depth array.  Both have the origin at zero.
    """
    if spec is None:
        return None
    if isinstance(spec, (int, float)):
        return float(spec)
    if not isinstance(spec, dict):
        raise ConfigError(f"{name}: expected a number or an object")
    default = float(spec.get("default", 0.0))
    if "at_origin" in spec:
        a = float(spec["at_origin"])

        def at_origin(arg):
            r = np.abs(arg).max(axis=1) if arg.ndim == 2 else arg
            return np.where(r == 0, a, default)
        return at_origin
    raise ConfigError(f"{name}: unsupported spec keys {sorted(spec)}")


def _potential(spec) -> BoundedPotential:
    if spec is None:
        return BoundedPotential()
    if isinstance(spec, (int, float)):
        return BoundedPotential.constant(float(spec))
    if "indicator" in spec:
        return BoundedPotential.indicator(spec["indicator"], float(spec.get("value", 1.0)))
    if "values" in spec:
        vals = spec["values"]
        return BoundedPotential(np.array([int(k) for k in vals], dtype=np.int64),
                                np.array(list(vals.values()), dtype=float),
                                float(spec.get("default", 0.0)))
    if "constant" in spec:
        return BoundedPotential.constant(float(spec["constant"]))
    raise ConfigError(f"W: unsupported spec {spec!r}")


def _ground_state(spec):
    """Reference ground state: ``constant`` or ``geometric`` (``ratio^|x|_1``)."""
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind == "constant":
        return EigenfunctionSpec("ground_state_reference", func=lambda g: np.ones(g.n))
    if kind == "geometric":
        r = float(spec["ratio"])
        if not 0 < r <= 1:
            raise ConfigError("geometric ground state needs 0 < ratio <= 1")

        def geo(g):
            if g.coords is None:
                return r ** g.dist.astype(float)
            return r ** np.abs(g.coords).sum(axis=1).astype(float)
        return EigenfunctionSpec("ground_state_reference", func=geo)
    raise ConfigError(f"unknown ground_state kind {kind!r}")


def _eigenfunction(spec, base_dir: Path, ground) -> EigenfunctionSpec:
    kind = spec.get("kind")
    if kind == "plane_wave":
        return EigenfunctionSpec("plane_wave", k=tuple(float(x) for x in spec["k"]),
                                 phase=None if "phase" not in spec else tuple(spec["phase"]))
    if kind == "recurrence":
        return EigenfunctionSpec("recurrence", lam=float(spec["lambda"]),
                                 seeds=tuple(float(x) for x in spec["seeds"]))
    if kind == "file":
        path = Path(spec["path"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"eigenfunction file {path} does not exist")
        return EigenfunctionSpec("file", path=str(path), lam=spec.get("lambda"))
    if kind == "ground_state_reference":
        if ground is None:
            raise ConfigError("ground_state_reference needs a ground_state entry")
        return ground
    raise ConfigError(f"unknown eigenfunction kind {kind!r}")


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class Scenario:
    name: str
    kind: str
    config: dict
    description: str = ""
    base_dir: Path = field(default_factory=Path.cwd)

    # parsed pieces
    def graph(self):
        """``(FormHandle of H, Exhaustion)``."""
        spec = self.config["graph"]
        if "file" in spec:
            path = Path(spec["file"])
            if not path.is_absolute():
                path = self.base_dir / path
            if not path.exists():
                raise ConfigError(f"graph file {path} does not exist")
            g, ex = load_graph(path)
            return FormHandle(g), ex
        gen = spec.get("generator")
        kw = dict(edge_weight=float(spec.get("edge_weight", 0.5)))
        for key in ("kappa", "measure"):
            v = _vertex_spec(spec.get(key), key)
            if v is not None:
                kw[key] = v
        if gen == "lattice":
            gen_obj = LatticeGenerator(int(spec.get("dim", 1)), **kw)
        elif gen == "tree":
            gen_obj = TreeGenerator(int(spec.get("degree", 3)), **kw)
        else:
            raise ConfigError(f"unknown graph generator {gen!r}")
        ex = Exhaustion(root=0, generator=gen_obj)
        return FormHandle(ex.truncation(1)), ex

    @property
    def W(self) -> BoundedPotential:
        return _potential(self.config.get("W"))

    @property
    def radii(self) -> list[int]:
        return [int(r) for r in self.config.get("radii", [])]

    def tolerance(self, key: str, default: float) -> float:
        return float(self.config.get("tolerances", {}).get(key, default))

    def descriptor(self) -> dict:
        return {"name": self.name, "kind": self.kind, "description": self.description}


def _check_increasing(r, name):
    if any(b <= a for a, b in zip(r, r[1:])):
        raise ConfigError(f"{name} not increasing")


def parse_scenario(data: dict, base_dir: Path | None = None) -> Scenario:
    """Validate a config dict (schema 1) and wrap it."""
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported schema {data.get('schema')!r} (expected {SCHEMA})")
    kind = data.get("kind", "shnol")
    if kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}")
    if "graph" not in data:
        raise ConfigError("scenario needs a graph")
    for key in ("radii", "criticality_radii"):
        r = data.get(key, [])
        if not isinstance(r, list) or not all(isinstance(x, int) and x > 0 for x in r):
            raise ConfigError(f"{key} must be a list of positive integers")
        _check_increasing(r, key)
    if kind in ("shnol", "product", "coupling") and not data.get("radii"):
        raise ConfigError("radii must be nonempty")
    ef = data.get("eigenfunction")
    if kind in ("shnol", "product"):
        if ef is None:
            raise ConfigError("pipeline scenarios need an eigenfunction")
        lam = data.get("lambda")
        if ef.get("kind") == "plane_wave" and lam is not None:
            b = float(data["graph"].get("edge_weight", 0.5))
            implied = sum(2 * b * (2 - 2 * np.cos(float(k))) for k in ef["k"])
            if abs(implied - float(lam)) > 1e-9 * max(1.0, abs(implied)):
                raise ConfigError(f"lambda {lam} inconsistent with plane wave k (implies {implied})")
    sc = Scenario(name=str(data.get("name", "scenario")), kind=kind, config=copy.deepcopy(data),
                  description=str(data.get("description", "")),
                  base_dir=Path.cwd() if base_dir is None else Path(base_dir))
    sc.graph()  # fail early on bad graph specs
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(data, path.parent)


BUILTINS: dict[str, dict] = {
    "z1-flat": {
        "schema": 1, "name": "z1-flat", "kind": "shnol",
        "description": "Z, b=1/2, no potential: plane wave cos(x) certifies 2-2cos(1) in the spectrum",
        "graph": {"generator": "lattice", "dim": 1, "edge_weight": 0.5},
        "eigenfunction": {"kind": "plane_wave", "k": [1.0]},
        "ground_state": {"kind": "constant"},
        "radii": [50, 100, 200, 400, 800],
        "criticality_radii": [512, 1024, 2048],
        "distance_radius": 2000,
        "tolerances": {"defect_target": 0.05, "dist_target": 1e-2},
    },
    "z2-product": {
        "schema": 1, "name": "z2-product", "kind": "product",
        "description": "Z^2 product plane wave k=(1,1) with product tent cutoffs",
        "graph": {"generator": "lattice", "dim": 2, "edge_weight": 0.5},
        "eigenfunction": {"kind": "plane_wave", "k": [1.0, 1.0]},
        "ground_state": {"kind": "constant"},
        "radii": [20, 40, 80],
        "distance_box": 120,
        "tolerances": {"defect_target": 0.05, "dist_target": 0.05},
    },
    "z1-decaying-gs": {
        "schema": 1, "name": "z1-decaying-gs", "kind": "shnol",
        "description": "Z with kappa(0)=-1, else 1/2: ground state 2^-|x| is an l2 eigenfunction at 0",
        "graph": {"generator": "lattice", "dim": 1, "edge_weight": 0.5,
                  "kappa": {"at_origin": -1.0, "default": 0.5}},
        "eigenfunction": {"kind": "ground_state_reference"},
        "ground_state": {"kind": "geometric", "ratio": 0.5},
        "lambda": 0.0,
        "radii": [2, 4, 8, 16],
        "criticality_radii": [16, 32, 64],
        "distance_radius": 2000,
        "tolerances": {"defect_target": 1e-3, "dist_target": 1e-3},
    },
    "z1-green": {
        "schema": 1, "name": "z1-green", "kind": "green",
        "description": "Z with kappa=2: Green function, decay 2-sqrt(3), criticalization on {-1,0,1}",
        "graph": {"generator": "lattice", "dim": 1, "edge_weight": 0.5, "kappa": 2.0},
        "green_radius": 200,
        "criticalize": {"K": [-1, 0, 1], "n_max": 256, "band": [20, 150], "C": 10.0},
        "criticality_radii": [64, 128, 256],
    },
    "tree-coupling": {
        "schema": 1, "name": "tree-coupling", "kind": "coupling",
        "description": "3-regular tree, W=1: critical coupling extrapolates to 3-2sqrt(2)",
        "graph": {"generator": "tree", "degree": 3, "edge_weight": 0.5},
        "W": {"constant": 1.0},
        "radii": [12, 13, 14],
        "expected": 3 - 2 * 2 ** 0.5,
        "tolerances": {"coupling": 5e-3},
    },
}


def builtin(name: str) -> Scenario:
    if name not in BUILTINS:
        raise ConfigError(f"unknown builtin scenario {name!r}; see `shnol-lab list`")
    return parse_scenario(BUILTINS[name])


# ---------------------------------------------------------------------------
# runners


@dataclass
class ScenarioResult:
    name: str
    kind: str
    passed: bool
    message: str
    result: dict
    table: list[tuple]
    trace: list[dict] = field(default_factory=list)


def _lattice_points(ex: Exhaustion, sc: Scenario):
    gen = ex.generator
    if not isinstance(gen, LatticeGenerator):
        raise ConfigError(f"scenario {sc.name}: this option needs a lattice")
    return gen


def _run_pipeline(sc: Scenario, seed: int) -> ScenarioResult:
    cfg = sc.config
    f, ex = sc.graph()
    ground = _ground_state(cfg.get("ground_state"))
    u_spec = _eigenfunction(cfg["eigenfunction"], sc.base_dir, ground)
    product = sc.kind == "product"
    region = None
    dist_radius = cfg.get("distance_radius")
    if "distance_box" in cfg:
        side = int(cfg["distance_box"])
        _lattice_points(ex, sc)
        dist_radius = side // 2
        host = ex.truncation(dist_radius)
        lo = -(side // 2) + (1 - side % 2)
        region = host.ids[(host.coords >= lo).all(axis=1) & (host.coords <= side // 2).all(axis=1)]
    if product and ground is None:
        raise ConfigError("product scenarios need a closed-form ground state")
    opts = ShnolOptions(
        radii=sc.radii,
        criticality_radii=cfg.get("criticality_radii", []),
        distance_radius=dist_radius,
        distance_region=region,
        defect_target=sc.tolerance("defect_target", 0.05),
        dist_target=sc.tolerance("dist_target", 1e-2),
        defect_tol=sc.tolerance("defect_tol", 1e-3),
        audit_samples=int(cfg.get("audit_samples", 64 if not product else 16)),
        seed=seed,
        reference_ground_state=ground,
        null_kind="product_tent" if product else "equilibrium",
        row_distances=not product,
        skip_criticality=product or not cfg.get("criticality_radii"),
    )
    rep = shnol_verify(f, sc.W, u_spec, cfg.get("lambda"), ex, opts)
    out = rep.to_dict()
    if sc.name == "z1-decaying-gs" or cfg.get("report_lowest_eigenvalue"):
        g = ex.truncation(int(dist_radius))
        out["lowest_truncation_eigenvalue"] = lowest_eigenpair(
            SymmetricOperator.from_form(f.on(g)))[0]
    table = [r.as_tuple() for r in rep.rows]
    return ScenarioResult(sc.name, sc.kind, rep.passed, rep.message, out, table)


def _region_ids(ex: Exhaustion, points) -> list[int]:
    """Vertex ids of ``points``: lattice points on lattices, ids otherwise."""
    gen = ex.generator
    if isinstance(gen, LatticeGenerator):
        return [gen.vertex_id(np.atleast_1d(p)) for p in points]
    return [int(p) for p in points]


def _run_green(sc: Scenario, seed: int) -> ScenarioResult:
    cfg = sc.config
    f, ex = sc.graph()
    n = int(cfg.get("green_radius", 200))
    G = green_function(f, 0, ex, n)
    g = ex.truncation(n)
    vals = G.on(g)
    out = {"green_radius": n, "G_oo": float(vals[g.root_index])}
    checks = {}
    gen = ex.generator
    if isinstance(gen, LatticeGenerator) and gen.dim == 1:
        x = g.coords[:, 0]
        order = np.argsort(x)
        xs, gs = x[order], vals[order]
        pos = (xs >= 1) & (xs <= n // 4)
        ratios = gs[pos][1:] / gs[pos][:-1]
        out["decay_ratio"] = float(ratios[-1])
        if np.ptp(g.kappa) == 0 and np.ptp(g.measure) == 0:
            kap = float(g.kappa[0]) * float(g.measure[0]) / (2 * float(g.weight[0]))
            r = ((2 + kap) - np.sqrt((2 + kap) ** 2 - 4)) / 2
            out["decay_ratio_expected"] = r
            checks["decay_ratio"] = abs(out["decay_ratio"] - r) <= 1e-4
            if g.weight[0] == 0.5 and g.measure[0] == 1:
                expected = 1 / np.sqrt(float(g.kappa[0]) * (float(g.kappa[0]) + 4))
                out["G_oo_expected"] = float(expected)
                checks["G_oo"] = abs(out["G_oo"] - expected) <= 1e-6
    crit = cfg.get("criticalize")
    trace = []
    if crit:
        n_max = int(crit.get("n_max", 256))
        radii = cfg.get("criticality_radii") or [n_max // 4, n_max // 2, n_max]
        W = criticalize(f, _region_ids(ex, crit["K"]), ex, n_max)
        t_star = float(np.max(W.vals))
        h = f.perturbed(-W)
        verdict = detect_criticality(h, ex, radii, check_green=True)
        out["criticalize"] = {"K": list(crit["K"]), "t_star": t_star, "verdict": verdict.to_dict()}
        checks["criticalized_is_critical"] = verdict.kind == "Critical"
        for r_, c_ in zip(verdict.evidence.radii, verdict.evidence.cap):
            trace.append({"n": r_, "cap_n": c_})
        if verdict.kind == "Critical" and "band" in crit:
            lo, hi = crit["band"]
            phi = verdict.ground_state
            Gb = green_function(f, 0, ex, max(n, hi + 1))
            gb = ex.truncation(max(n, hi + 1))
            d = gb.dist
            sel = (d >= lo) & (d <= hi)
            gv, pv = Gb.on(gb), phi.on(gb, strict=False)
            # ground states are defined up to scale: match phi and G at the pole
            scale = gv[gb.root_index] / pv[gb.root_index]
            raw = pv[sel] / gv[sel]
            ratio = raw * scale
            C = float(max(ratio.max(), 1 / ratio.min())) if np.all(ratio > 0) else float("inf")
            out["criticalize"]["phi_over_G"] = {
                "band": [lo, hi], "normalization": "phi(o) = G(o,o)",
                "min": float(ratio.min()), "max": float(ratio.max()), "C": C,
                "raw_min": float(raw.min()), "raw_max": float(raw.max()),
                "C_scale_free": float(np.sqrt(ratio.max() / ratio.min())),
            }
            checks["phi_over_G"] = C <= float(crit.get("C", 10.0))
    out["checks"] = checks
    passed = all(checks.values())
    msg = "pass" if passed else "failed checks: " + ", ".join(k for k, v in checks.items() if not v)
    return ScenarioResult(sc.name, sc.kind, passed, msg, out, [], trace)


def _run_coupling(sc: Scenario, seed: int) -> ScenarioResult:
    cfg = sc.config
    f, ex = sc.graph()
    radii = sc.radii
    res = critical_coupling(f, sc.W, ex, radii[-1], radii=radii)
    out = {"t_star": res.value, "radii": res.radii, "trace": res.trace,
           "extrapolated": res.extrapolated}
    checks = {}
    if "expected" in cfg:
        tol = sc.tolerance("coupling", 5e-3)
        out["expected"] = float(cfg["expected"])
        out["raw_error"] = abs(res.value - cfg["expected"])
        est = res.estimate
        out["estimate_error"] = abs(est - cfg["expected"])
        checks["coupling"] = out["estimate_error"] <= tol
    W = sc.W
    if len(W.ids) == 1 and W.default == 0:
        # one-point identity t*(B_n) W(o) m(o) = cap_n
        o = int(W.ids[0])
        _, cap = equilibrium_potential(f, radii[-1], o, ex)
        g = ex.truncation(radii[-1])
        mo = float(g.measure[g.index(o)])
        out["one_point_identity_residual"] = abs(res.value * float(W.vals[0]) * mo - cap)
        checks["one_point_identity"] = out["one_point_identity_residual"] <= 1e-10
    out["checks"] = checks
    passed = all(checks.values())
    trace = [{"n": r, "t_star": t} for r, t in zip(res.radii, res.trace)]
    msg = "pass" if passed else "failed checks: " + ", ".join(k for k, v in checks.items() if not v)
    return ScenarioResult(sc.name, sc.kind, passed, msg, out, [], trace)


def run(sc: Scenario, seed: int = 0) -> ScenarioResult:
    """Execute a scenario; config problems raise ConfigError."""
    if sc.kind in ("shnol", "product"):
        return _run_pipeline(sc, seed)
    if sc.kind == "green":
        return _run_green(sc, seed)
    return _run_coupling(sc, seed)
