import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shnol_lab.errors import ConfigError, PreconditionError
from shnol_lab.forms import FormHandle, apply_operator, eval_form, norm
from shnol_lab.graph import VertexFunction, build_lattice, graph_to_dict, restrict
from shnol_lab.gst import ground_state_transform, inverse_transform, transform_function
from shnol_lab.numerics import SymmetricOperator, dense_spectrum

from .util import random_graph


def decaying_kappa(x):
    return np.where(x[:, 0] == 0, -1.0, 0.5)


def decaying(radius):
    g, ex = build_lattice(1, radius, kappa=decaying_kappa)
    return FormHandle(g), ex, 2.0 ** -np.abs(g.coords[:, 0])


def test_identity_transform():
    g, _ = build_lattice(2, 3)
    T = ground_state_transform(FormHandle(g), np.ones(g.n))
    base = graph_to_dict(g.replace(boundary=np.zeros(g.n)))
    assert graph_to_dict(T.image) == base


def test_decaying_ground_state_exact():
    f, _, phi = decaying(30)
    g = f.graph
    assert np.max(np.abs(apply_operator(f, phi)[g.interior])) == 0.0
    T = ground_state_transform(f, phi)
    x = g.coords[:, 0]
    assert np.allclose(T.image.measure, 4.0 ** -np.abs(x), rtol=1e-15)
    for (a, b), w in T.image.edges().items():
        xa, xb = x[g.index(a)], x[g.index(b)]
        lo = min(abs(xa), abs(xb))
        assert w == pytest.approx(0.5 * 2.0 ** -lo * 2.0 ** (-lo - 1), rel=1e-15)
    assert not T.image.kappa.any()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_form_identity_random_g(seed):
    rng = np.random.default_rng(seed)
    f, _, phi = decaying(20)
    T = ground_state_transform(f, phi)
    g = f.graph
    h = rng.standard_normal(g.n) * g.interior
    lhs = eval_form(f, phi * h)
    rhs = eval_form(FormHandle(T.image), h)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_matched_truncation_spectra():
    R = 60
    f, ex, phi = decaying(R + 1)
    T = ground_state_transform(f, phi)
    keep = f.graph.dist <= R
    base = dense_spectrum(SymmetricOperator.from_form(FormHandle(restrict(f.graph, keep))))
    img = dense_spectrum(SymmetricOperator.from_form(FormHandle(restrict(T.image, keep))))
    assert np.max(np.abs(base - img)) <= 1e-8


def test_errors():
    f, _, phi = decaying(10)
    bad = phi.copy()
    bad[3] = -bad[3]
    with pytest.raises(PreconditionError, match="not a positive function"):
        ground_state_transform(f, bad)
    with pytest.raises(PreconditionError, match="not a ground state"):
        ground_state_transform(f, phi * (1 + 0.01 * np.arange(f.graph.n)))
    g = f.graph
    zero = phi.copy()
    zero[0] = 0.0
    with pytest.raises(ConfigError):
        transform_function(zero, np.ones(g.n), g)


def test_u_equal_phi_maps_to_one():
    f, _, phi = decaying(10)
    assert np.array_equal(transform_function(phi, phi, f.graph).values, np.ones(f.graph.n))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_isometry_and_round_trip(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(1, 30)))
    phi = rng.uniform(0.05, 3.0, g.n)
    u = rng.standard_normal(g.n)
    v = transform_function(phi, u, g)
    img = g.replace(measure=phi * phi * g.measure)
    a, b = norm(g, u), norm(img, v.on(img))
    assert abs(a - b) <= 1e-14 * max(a, 1e-300) * 4
    back = inverse_transform(phi, v, g)
    assert np.allclose(back.values, u, rtol=1e-15, atol=0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_domination_transfers(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 50))
    phi = rng.uniform(1e-6, 5.0, n)
    u = phi * rng.uniform(-1, 1, n)
    ids = np.arange(n)
    v = transform_function(VertexFunction(ids, phi), VertexFunction(ids, u))
    assert np.all(np.abs(v.values) <= 1.0)


def test_summary_small_and_large():
    f, _, phi = decaying(10)
    s = ground_state_transform(f, phi).summary()
    assert "edges" in s and s["vertices"] == 21
    g, _ = build_lattice(2, 60)
    s = ground_state_transform(FormHandle(g), np.ones(g.n)).summary()
    assert "edges" not in s
