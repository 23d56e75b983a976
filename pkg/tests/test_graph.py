import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shnol_lab.errors import ConfigError
from shnol_lab.forms import FormHandle, eval_form
from shnol_lab.graph import (BoundedPotential, Exhaustion, LatticeGenerator, VertexFunction,
                             build_lattice, build_regular_tree, dump_graph, graph_from_dict,
                             graph_to_dict, load_graph, restrict)


def test_lattice_counts():
    g, _ = build_lattice(1, 3)
    assert (g.n, g.num_pairs) == (7, 12)
    g2, _ = build_lattice(2, 1)
    assert (g2.n, g2.num_pairs) == (9, 24)


def test_lattice_ids_stable_across_radii():
    gen = LatticeGenerator(2)
    small, big = gen.truncation(2), gen.truncation(5)
    assert np.array_equal(big.coords[: small.n], small.coords)
    assert gen.vertex_id([0, 0]) == 0


def test_lattice_boundary_weights():
    g, _ = build_lattice(1, 3)
    # only the two endpoints lose an edge
    assert sorted(g.boundary[g.boundary > 0].tolist()) == [0.5, 0.5]
    assert np.allclose(g.degree, 1.0)


def test_tree_sizes_and_leaves():
    g, _ = build_regular_tree(3, 2)
    assert g.n == 10
    leaves = g.dist == 2
    assert np.allclose(g.boundary[leaves], 1.0)
    assert np.allclose(g.degree, 1.5)
    assert build_regular_tree(3, 14)[0].n == 49150


def test_tree_degree_two_rejected():
    with pytest.raises(ConfigError):
        build_regular_tree(2, 3)


def _path_dict(n=4, b=1.0):
    return {
        "root": 0,
        "vertices": [{"id": i, "kappa": 0.0, "m": 1.0} for i in range(n)],
        "edges": [{"u": i, "v": i + 1, "b": b} for i in range(n - 1)],
    }


def test_json_roundtrip(tmp_path):
    d = _path_dict()
    g = graph_from_dict(d)
    path = tmp_path / "g.json"
    dump_graph(g, path)
    g2, ex = load_graph(path)
    assert graph_to_dict(g2) == graph_to_dict(g)
    assert json.loads(path.read_text()) == graph_to_dict(g)
    assert ex.max_index == 3


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d["edges"].append({"u": 1, "v": 0, "b": 2.0}), "conflicting"),
    (lambda d: d["vertices"][1].update(m=0.0), "measure must be positive"),
    (lambda d: d["edges"].append({"u": 0, "v": 9, "b": 1.0}), "unknown vertex"),
    (lambda d: d["edges"].append({"u": 2, "v": 2, "b": 1.0}), "self loop"),
    (lambda d: d["vertices"].append({"id": 7}), "not connected"),
])
def test_json_validation(mutate, message):
    d = _path_dict()
    mutate(d)
    with pytest.raises(ConfigError, match=message):
        graph_from_dict(d)


def test_duplicate_consistent_edges_accepted():
    d = _path_dict()
    d["edges"].append({"u": 1, "v": 0, "b": 1.0})
    assert graph_from_dict(d).num_pairs == 6


def test_vertex_function_strictness():
    g, ex = build_lattice(1, 2)
    big = ex.truncation(4)
    f = VertexFunction(big.ids, np.ones(big.n))
    with pytest.raises(ConfigError):
        f.on(g)
    assert np.allclose(f.on(g, strict=False), 1.0)


def test_bounded_potential_algebra():
    W = BoundedPotential.indicator([0, 2], 3.0) + BoundedPotential.constant(-1.0)
    g, _ = build_lattice(1, 2)
    vals = W.on(g)
    assert vals[0] == 2.0 and vals[1] == -1.0 and vals[2] == 2.0
    assert W.sup_norm == 2.0
    assert (-W).on(g)[0] == -2.0


def test_restrict_empty_region():
    g, _ = build_lattice(1, 2)
    with pytest.raises(ConfigError):
        restrict(g, np.zeros(g.n, dtype=bool))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2), st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_restriction_is_dirichlet(d, radius, seed):
    """The restricted form equals the big form on functions vanishing outside."""
    rng = np.random.default_rng(seed)
    big, _ = build_lattice(d, radius, kappa=lambda x: rng.uniform(0, 1, len(x)))
    keep = rng.random(big.n) < 0.6
    keep[big.root_index] = True
    small = restrict(big, keep)
    u = np.zeros(big.n)
    u[keep] = rng.standard_normal(keep.sum())
    assert np.isclose(eval_form(FormHandle(small), u[keep]), eval_form(FormHandle(big), u),
                      rtol=1e-12, atol=1e-12)


def test_exhaustion_of_finite_graph():
    g = graph_from_dict(_path_dict(6))
    ex = Exhaustion.of_graph(g)
    t = ex.truncation(2)
    assert t.ids.tolist() == [0, 1, 2]
    assert t.boundary.tolist() == [0.0, 0.0, 1.0]
