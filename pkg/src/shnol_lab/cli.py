"""``shnol-lab`` command line: run scenarios, inspect graphs, list builtins.

Exit codes: 0 pass, 1 failed verdict or invariant violation, 2 config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
import tempfile
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .criticality import detect_criticality
from .errors import ConfigError, ShnolError
from .forms import FormHandle
from .graph import load_graph
from .numerics import SymmetricOperator, dense_cap, dense_spectrum, lowest_eigenpair
from .scenarios import BUILTINS, TABLE_COLUMNS, builtin, load_scenario, run

log = logging.getLogger("shnol_lab")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def environment_stamp(seed: int) -> dict:
    return {
        "shnol_lab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.system(),
        "dense_cap": dense_cap(),
        "seed": seed,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if not isinstance(v, int) else v)
                    for v in row])
    return buf.getvalue()


def _plot(rows, path: Path, title: str) -> bool:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib not installed; skipping plots")
        return False
    n = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(n, [r[3] for r in rows], "o-", label="defect")
    ax.loglog(n, [r[4] for r in rows], "s--", label="certificate")
    ax.set_xlabel("n")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True


def cmd_run(args) -> int:
    if (args.scenario is None) == (args.builtin is None):
        raise ConfigError("give exactly one of a scenario file or --builtin NAME")
    sc = builtin(args.builtin) if args.builtin else load_scenario(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run(sc, seed=args.seed)
    report = {
        "schema": 1,
        "scenario": sc.name,
        "kind": sc.kind,
        "passed": res.passed,
        "message": res.message,
        "config": sc.config,
        "result": res.result,
        "trace": res.trace,
        "environment": environment_stamp(args.seed),
    }
    _write_atomic(out / "report.json", json.dumps(_jsonable(report), indent=1, sort_keys=True) + "\n")
    _write_atomic(out / "table.csv", _table_csv(res.table))
    if args.plots and res.table:
        _plot(res.table, out / "defect.svg", sc.name)
    print(f"{sc.name}: {'PASS' if res.passed else 'FAIL'} ({res.message})")
    return EXIT_PASS if res.passed else EXIT_FAIL


def _parse_radii(text: str) -> list[int]:
    try:
        radii = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad radii list {text!r}") from exc
    if not radii or any(r < 1 for r in radii):
        raise ConfigError("radii must be positive integers")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("radii not increasing")
    return radii


def cmd_criticality(args) -> int:
    g, ex = load_graph(args.graph)
    radii = _parse_radii(args.radii)
    verdict = detect_criticality(FormHandle(g), ex, radii, check_green=args.green)
    print(json.dumps(_jsonable(verdict.to_dict()), indent=1))
    return EXIT_PASS


def cmd_spectrum(args) -> int:
    g, ex = load_graph(args.graph)
    if args.region < 0:
        raise ConfigError("region must be nonnegative")
    op = SymmetricOperator.from_form(FormHandle(ex.truncation(args.region)))
    if op.dim <= dense_cap():
        ev = dense_spectrum(op)
        out = {"region": args.region, "dim": op.dim, "eigenvalues": ev}
    else:
        lam, _ = lowest_eigenpair(op)
        out = {"region": args.region, "dim": op.dim, "lowest": lam}
    print(json.dumps(_jsonable(out), indent=1))
    return EXIT_PASS


def cmd_list(args) -> int:
    if args.json:
        print(json.dumps([builtin(n).descriptor() for n in BUILTINS], indent=1))
    else:
        width = max(map(len, BUILTINS))
        for name, cfg in BUILTINS.items():
            print(f"{name:<{width}}  {cfg['description']}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shnol-lab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write report.json / table.csv")
    r.add_argument("scenario", nargs="?", help="scenario JSON file")
    r.add_argument("--builtin", metavar="NAME", help="run a built-in scenario")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--plots", action="store_true", help="also write defect.svg")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("criticality", help="criticality verdict for a graph file")
    c.add_argument("graph")
    c.add_argument("--radii", required=True, help="comma separated, increasing")
    c.add_argument("--green", action="store_true", help="cross-check with Green diagonals")
    c.set_defaults(func=cmd_criticality)

    s = sub.add_parser("spectrum", help="truncated spectrum of a graph file")
    s.add_argument("graph")
    s.add_argument("--region", type=int, required=True, help="BFS radius around the root")
    s.set_defaults(func=cmd_spectrum)

    ls = sub.add_parser("list", help="list built-in scenarios")
    ls.add_argument("--json", action="store_true")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShnolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
