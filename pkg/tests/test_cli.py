import csv
import json
from pathlib import Path

import numpy as np
import pytest

from shnol_lab.cli import main
from shnol_lab.scenarios import BUILTINS, TABLE_COLUMNS, builtin

GOLDEN = Path(__file__).parent / "golden"


def key_paths(d, prefix=""):
    """Dotted key paths of a report; scenario configs are free-form and skipped."""
    out = []
    for k, v in sorted(d.items()):
        out.append(prefix + k)
        if isinstance(v, dict) and k != "config":
            out += key_paths(v, prefix + k + ".")
    return out


def run_builtin(name, out, *extra):
    return main(["run", "--builtin", name, "--out", str(out), *extra])


def test_list(capsys):
    assert main(["list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [ln.split()[0] for ln in lines] == list(BUILTINS)
    assert len(lines) == 5


def test_list_json(capsys):
    assert main(["list", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert [d["name"] for d in data] == list(BUILTINS)
    assert all(d["description"] for d in data)


@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtins_round_trip(name, tmp_path):
    assert run_builtin(name, tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["scenario"] == name and report["passed"] is True
    assert builtin(name).name == name


def test_decaying_reports_lowest_eigenvalue(tmp_path):
    assert run_builtin("z1-decaying-gs", tmp_path) == 0
    res = json.loads((tmp_path / "report.json").read_text())["result"]
    assert res["lambda"] == 0.0
    assert res["lowest_truncation_eigenvalue"] <= 1e-3


def test_golden_keys_and_header(tmp_path):
    assert run_builtin("z1-flat", tmp_path, "--plots") == 0
    report = json.loads((tmp_path / "report.json").read_text())
    golden = json.loads((GOLDEN / "z1-flat.keys.json").read_text())
    assert key_paths(report) == golden
    with open(tmp_path / "table.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TABLE_COLUMNS == ("n", "cap_n", "norm_wu", "defect", "certificate", "dist")
    assert [int(r[0]) for r in rows[1:]] == [50, 100, 200, 400, 800]
    if (tmp_path / "defect.svg").exists():  # matplotlib is optional
        assert (tmp_path / "defect.svg").read_text().lstrip().startswith("<?xml")


def test_deterministic_given_seed(tmp_path):
    for sub in ("a", "b"):
        assert run_builtin("z1-flat", tmp_path / sub, "--seed", "7") == 0
    a, b = ((tmp_path / s / "report.json").read_bytes() for s in "ab")
    assert a == b
    assert (tmp_path / "a" / "table.csv").read_bytes() == (tmp_path / "b" / "table.csv").read_bytes()


def _write_scenario(tmp_path, **changes):
    cfg = dict(BUILTINS["z1-flat"])
    cfg.update(changes)
    p = tmp_path / "sc.json"
    p.write_text(json.dumps(cfg))
    return p


def test_bad_radii_exit_two(tmp_path, capsys):
    p = _write_scenario(tmp_path, radii=[100, 50])
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "radii not increasing" in capsys.readouterr().err


@pytest.mark.parametrize("changes, message", [
    ({"schema": 2}, "schema"),
    ({"kind": "nope"}, "kind"),
    ({"lambda": 0.5}, "lambda"),
])
def test_config_errors(tmp_path, capsys, changes, message):
    p = _write_scenario(tmp_path, **changes)
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
    assert message in capsys.readouterr().err


def test_missing_scenario_file(tmp_path):
    assert main(["run", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 2
    assert main(["run", "--out", str(tmp_path)]) == 2


def test_failed_verdict_exit_one(tmp_path, capsys):
    # lambda = -1 via a recurrence: the eigenfunction grows and is not dominated
    p = _write_scenario(tmp_path, eigenfunction={"kind": "recurrence", "lambda": -1.0,
                                                 "seeds": [1.0, 1.5]})
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 1
    res = json.loads((tmp_path / "o" / "report.json").read_text())["result"]
    assert res["failed_stage"] == 2
    assert "FAIL" in capsys.readouterr().out


@pytest.fixture
def graph_file(tmp_path):
    n = 81
    d = {"root": 40,
         "vertices": [{"id": i} for i in range(n)],
         "edges": [{"u": i, "v": i + 1, "b": 0.5} for i in range(n - 1)]}
    p = tmp_path / "path.json"
    p.write_text(json.dumps(d))
    return p


def test_criticality_command(graph_file, capsys):
    assert main(["criticality", str(graph_file), "--radii", "8,16,32"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["kind"] in ("Critical", "Subcritical", "Inconclusive")
    assert out["radii"] == [8, 16, 32]
    assert np.allclose(out["cap"], [2 / 8, 2 / 16, 2 / 32], atol=1e-12)
    assert main(["criticality", str(graph_file), "--radii", "16,8"]) == 2


def test_spectrum_command(graph_file, capsys):
    assert main(["spectrum", str(graph_file), "--region", "3"]) == 0
    ev = json.loads(capsys.readouterr().out)["eigenvalues"]
    # BFS ball of radius 3 with cut edges: Dirichlet path on 7 points
    assert np.allclose(ev, 2 - 2 * np.cos(np.arange(1, 8) * np.pi / 8))
    assert main(["spectrum", str(graph_file), "--region", "-1"]) == 2


def test_dense_cap_env_in_stamp(tmp_path, monkeypatch):
    monkeypatch.setenv("SHNOL_DENSE_CAP", "1234")
    assert run_builtin("z1-flat", tmp_path) == 0
    env = json.loads((tmp_path / "report.json").read_text())["environment"]
    assert env["dense_cap"] == 1234 and env["seed"] == 0
