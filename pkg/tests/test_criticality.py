import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from shnol_lab.criticality import (critical_coupling, criticalize, detect_criticality,
                                   equilibrium_potential, extrapolate_inverse_square,
                                   green_function, null_sequence)
from shnol_lab.errors import ConfigError, NotNonnegativeError, NotPositiveDefiniteError, PreconditionError
from shnol_lab.forms import FormHandle, eval_form
from shnol_lab.graph import BoundedPotential, build_lattice, build_regular_tree

from .util import random_graph


@pytest.fixture(scope="module")
def z1():
    g, ex = build_lattice(1, 4)
    return FormHandle(g), ex


def brute_force_capacity(n):
    """Minimize Q over u on (-n, n) with u(0) = 1 by generic optimization."""
    xs = [x for x in range(-n + 1, n) if x != 0]

    def q(free):
        u = dict(zip(xs, free))
        u[0] = 1.0
        val = lambda x: u.get(x, 0.0)  # noqa: E731
        return sum((val(x) - val(x + 1)) ** 2 for x in range(-n, n))

    if not xs:
        return q(np.array([]))
    res = minimize(q, np.full(len(xs), 0.5), method="BFGS", options={"gtol": 1e-12})
    return res.fun


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_capacity_brute_force(z1, n):
    f, ex = z1
    _, cap = equilibrium_potential(f, n, ex=ex)
    assert cap == pytest.approx(2 / n, abs=1e-10)
    assert brute_force_capacity(n) == pytest.approx(cap, abs=1e-9)


def test_tent_shape(z1):
    f, ex = z1
    phi, _ = equilibrium_potential(f, 4, ex=ex)
    g = ex.truncation(3)
    assert np.allclose(phi.on(g), 1 - np.abs(g.coords[:, 0]) / 4)


def test_single_vertex_region(z1):
    f, ex = z1
    phi, cap = equilibrium_potential(f, [0])
    assert phi.values.tolist() == [1.0]
    delta = np.zeros(f.graph.n)
    delta[0] = 1
    assert cap == pytest.approx(eval_form(f, delta), rel=1e-14)


def test_null_sequence_dyadic(z1):
    f, ex = z1
    tr = null_sequence(f, ex, [4, 8, 16, 32, 64])
    assert np.allclose(tr.cap, [2 / n for n in tr.radii], atol=1e-10)
    assert tr.is_monotone()


def test_kappa_two_capacity_positive_limit():
    g, ex = build_lattice(1, 4, kappa=2.0)
    tr = null_sequence(FormHandle(g), ex, [25, 50, 100, 200])
    assert tr.is_monotone()
    assert tr.cap[-1] > 0.5
    # one-dimensional closed form: 1 / G(0,0) = sqrt(kappa (kappa + 4))
    assert tr.cap[-1] == pytest.approx(np.sqrt(12), rel=1e-10)


def test_verdicts(z1):
    f, ex = z1
    flat = detect_criticality(f, ex, [512, 1024, 2048])
    assert flat.kind == "Critical"
    g = ex.truncation(64)
    assert np.max(np.abs(flat.ground_state.on(g, strict=False) - 1)) <= 0.05
    t, et = build_regular_tree(3, 2)
    assert detect_criticality(FormHandle(t), et, [4, 8, 12]).kind == "Subcritical"
    gneg, eneg = build_lattice(1, 2, kappa=lambda x: np.where(x[:, 0] == 0, -0.1, 0.0))
    v = detect_criticality(FormHandle(gneg), eneg, [16, 64, 256])
    assert v.kind == "NotNonnegative"


def test_tent_deviation_region(z1):
    """Deviation of phi_n from 1 at |x| <= n/32 is 1/32; at n/4 it is 1/4."""
    f, ex = z1
    v = detect_criticality(f, ex, [512, 1024, 2048])
    g = ex.truncation(512)
    dev = np.abs(v.ground_state.on(g, strict=False) - 1)
    assert dev[g.dist <= 2048 // 32].max() == pytest.approx(1 / 32)
    assert dev[g.dist <= 2048 // 4].max() == pytest.approx(1 / 4)


def test_inconclusive_is_reported(z1):
    f, ex = z1
    v = detect_criticality(f, ex, [8, 16, 32])
    assert v.kind == "Inconclusive"
    assert v.evidence.cap and v.note


def test_radii_must_increase(z1):
    f, ex = z1
    with pytest.raises(ConfigError, match="radii not increasing"):
        detect_criticality(f, ex, [100, 50])


def test_not_nonnegative_error():
    g, ex = build_lattice(1, 2, kappa=-0.5)
    with pytest.raises(NotNonnegativeError, match="not nonnegative on region"):
        equilibrium_potential(FormHandle(g), 10, ex=ex)


def test_green_kappa_two():
    g, ex = build_lattice(1, 4, kappa=2.0)
    G = green_function(FormHandle(g), 0, ex, 200)
    assert G(0) == pytest.approx(1 / np.sqrt(12), abs=1e-12)
    gen = ex.generator
    ratio = G(gen.vertex_id([11])) / G(gen.vertex_id([10]))
    assert ratio == pytest.approx(2 - np.sqrt(3), abs=1e-12)


def test_green_flat_grows_linearly(z1):
    f, ex = z1
    vals = [green_function(f, 0, ex, n)(0) for n in (64, 128, 256)]
    assert vals == pytest.approx([32, 64, 128], rel=1e-9)


def test_green_symmetry():
    g = random_graph(np.random.default_rng(4), 20, kappa_range=(0.1, 1.0), measure=False)
    f = FormHandle(g)
    from shnol_lab.graph import Exhaustion
    ex = Exhaustion.of_graph(g)
    top = ex.max_index + 1
    a, b = 0, 7
    Ga = green_function(f, a, ex, top)
    Gb = green_function(f, b, ex, top)
    assert Ga(b) == pytest.approx(Gb(a), abs=1e-10)


def test_green_not_positive_definite():
    g, ex = build_lattice(1, 2, kappa=-1.0)
    with pytest.raises(NotPositiveDefiniteError, match="region not positive definite"):
        green_function(FormHandle(g), 0, ex, 50)


def test_green_monotone_in_region():
    g, ex = build_lattice(2, 2, kappa=0.05)
    f = FormHandle(g)
    small = green_function(f, 0, ex, 4)
    big = green_function(f, 0, ex, 8)
    gs = ex.truncation(3)
    assert np.all(small.on(gs) <= big.on(gs, strict=False) + 1e-12)


def test_one_point_identity(z1):
    f, ex = z1
    for n in (8, 32, 128):
        res = critical_coupling(f, BoundedPotential.indicator([0]), ex, n)
        _, cap = equilibrium_potential(f, n, ex=ex)
        assert abs(res.value - cap) <= 1e-10


def test_coupling_rank_one_kappa_two():
    g, ex = build_lattice(1, 4, kappa=2.0)
    res = critical_coupling(FormHandle(g), BoundedPotential.indicator([0]), ex, 200)
    assert res.value == pytest.approx(np.sqrt(12), abs=1e-2)


def test_coupling_requires_nonzero_w(z1):
    f, ex = z1
    with pytest.raises(ConfigError):
        critical_coupling(f, BoundedPotential(), ex, 10)
    with pytest.raises(ConfigError):
        critical_coupling(f, BoundedPotential.constant(-1.0), ex, 10)


def test_tree_coupling_trace_and_extrapolation():
    t, et = build_regular_tree(3, 2)
    res = critical_coupling(FormHandle(t), BoundedPotential.constant(1.0), et, 14, radii=[12, 13, 14])
    assert res.trace == sorted(res.trace, reverse=True)
    # t*(B_n) is the lowest Dirichlet eigenvalue of the depth-(n-1) ball
    from .test_numerics import radial_tree_lowest
    assert res.value == pytest.approx(radial_tree_lowest(3, 13), abs=1e-9)
    assert abs(res.extrapolated - (3 - 2 * np.sqrt(2))) < 5e-3


def test_extrapolation_exact_on_model():
    n = np.array([10, 20, 40])
    t = 0.3 + 2.0 / (n + 3.0) ** 2
    assert extrapolate_inverse_square(n, t) == pytest.approx(0.3, abs=1e-10)
    assert extrapolate_inverse_square([1, 2], [1, 0.5]) is None
    assert extrapolate_inverse_square([1, 2, 3], [1, 2, 3]) is None


def test_criticalize_kappa_two():
    g, ex = build_lattice(1, 4, kappa=2.0)
    f = FormHandle(g)
    gen = ex.generator
    K = [gen.vertex_id([x]) for x in (-1, 0, 1)]
    W = criticalize(f, K, ex, 256)
    v = detect_criticality(f.perturbed(-W), ex, [64, 128, 256])
    assert v.kind == "Critical"
    phi = v.ground_state.on(ex.truncation(150), strict=False)
    assert np.all(phi > 0)


def test_criticalize_tree_root():
    t, et = build_regular_tree(3, 2)
    f = FormHandle(t)
    W = criticalize(f, [0], et, 16, radii=[4, 8, 16])
    v = detect_criticality(f.perturbed(-W), et, [4, 8, 16])
    assert v.kind == "Critical"


def test_criticalize_critical_form_refused(z1):
    f, ex = z1
    with pytest.raises(PreconditionError, match="nothing to criticalize"):
        criticalize(f, [0], ex, 2048, radii=[512, 1024, 2048])


def test_criticalize_unknown_vertex():
    g, ex = build_lattice(1, 4, kappa=2.0)
    with pytest.raises(ConfigError):
        criticalize(FormHandle(g), [-1], ex, 64)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_potentials_between_zero_and_one(seed):
    """Maximum principle for kappa + W >= 0 and monotone capacities."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    kap, freq = rng.uniform(0, 1, 2)
    # kappa must be a fixed function of position, not redrawn per truncation
    g, ex = build_lattice(d, 2, kappa=lambda x: kap * np.sin(freq * 7 * x.sum(1) + 1) ** 2)
    f = FormHandle(g)
    tr = null_sequence(f, ex, [2, 3, 5, 8])
    assert tr.is_monotone()
    for p in tr.potentials:
        assert p.values.min() >= -1e-12 and p.values.max() <= 1 + 1e-12
        assert p(0) == 1.0
