import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from surflab.numkit import (
    AmbientVector,
    DimensionError,
    DivergenceError,
    DomainError,
    NodalFlow,
    Signature,
    gauss_legendre,
    inner,
    inner_arrays,
    integrate_ode,
    jet1,
    jet2,
    quad,
    rk4_endpoint,
)

finite = st.floats(-10, 10, allow_nan=False)


@pytest.mark.parametrize(
    "sig, u, v, expected",
    [
        ((1, 2), (1, 1, 0), (1, 1, 0), 0.0),
        ((1, 3), (1, 0, 0, 0), (1, 0, 0, 0), -1.0),
        ((2, 2), (1, 0, 1, 0), (0, 1, 0, 1), 0.0),
    ],
)
def test_inner_examples(sig, u, v, expected):
    s = Signature(*sig)
    assert inner(AmbientVector(u, s), AmbientVector(v, s)) == expected


def test_signature_mismatch_raises():
    with pytest.raises(DimensionError):
        inner(AmbientVector((1, 0, 0), Signature(1, 2)), AmbientVector((1, 0, 0, 0), Signature(1, 3)))
    with pytest.raises(DimensionError):
        AmbientVector((1, 0), Signature(1, 2))
    with pytest.raises(DimensionError):
        Signature(0, 7).validate()


@given(arrays(float, (3, 4), elements=finite), st.floats(-3, 3), st.integers(0, 4))
def test_inner_symmetric_bilinear(vecs, s, neg):
    a, b, c = vecs
    assert inner_arrays(a, b, neg) == inner_arrays(b, a, neg)
    lhs = inner_arrays(a + s * b, c, neg)
    rhs = inner_arrays(a, c, neg) + s * inner_arrays(b, c, neg)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))


def test_ambient_vector_arithmetic():
    s = Signature(1, 2)
    a, b = AmbientVector((1, 2, 3), s), AmbientVector((0, 1, 0), s)
    np.testing.assert_array_equal((a + b).coords, [1, 3, 3])
    np.testing.assert_array_equal((a - b).coords, [1, 1, 3])
    np.testing.assert_array_equal((2 * a).coords, [2, 4, 6])


def test_jet2_polynomial_example():
    j = jet2(lambda u, v: (u * u * v)[..., None], np.array(1.0), np.array(2.0))
    got = [j.d_u, j.d_v, j.d_uu, j.d_uv, j.d_vv]
    for g, e in zip(got, [4, 1, 4, 2, 0]):
        assert abs(float(g[0]) - e) < 1e-8


def test_jet2_trig_example():
    j = jet2(lambda u, v: np.stack([np.sin(u), np.cos(v)], -1), np.array(0.0), np.array(0.0))
    np.testing.assert_allclose(j.d_u, [1, 0], atol=1e-7)
    np.testing.assert_allclose(j.d_v, [0, 0], atol=1e-7)
    np.testing.assert_allclose(j.d_uu, [0, 0], atol=1e-7)
    np.testing.assert_allclose(j.d_vv, [0, -1], atol=1e-7)


def test_jet_constant_map():
    j = jet2(lambda u, v: np.full(np.shape(u) + (2,), 3.0), np.zeros(4), np.zeros(4))
    for d in (j.d_u, j.d_v, j.d_uu, j.d_uv, j.d_vv):
        assert np.all(d == 0)


@given(arrays(float, 10, elements=st.floats(-2, 2)), st.floats(-1, 1), st.floats(-1, 1))
def test_jet2_exact_on_cubics(c, u, v):
    def poly(u, v):
        mons = [1, u, v, u * u, u * v, v * v, u**3, u * u * v, u * v * v, v**3]
        return sum(ci * m for ci, m in zip(c, mons))[..., None] + 0 * u[..., None]

    j = jet2(poly, np.array(u), np.array(v))
    du = c[1] + 2 * c[3] * u + c[4] * v + 3 * c[6] * u * u + 2 * c[7] * u * v + c[8] * v * v
    dvv = 2 * c[5] + 2 * c[8] * u + 6 * c[9] * v
    duv = c[4] + 2 * c[7] * u + 2 * c[8] * v
    scale = 1 + np.abs(c).sum()
    assert abs(float(j.d_u[0]) - du) < 1e-7 * scale
    assert abs(float(j.d_uv[0]) - duv) < 1e-7 * scale
    assert abs(float(j.d_vv[0]) - dvv) < 1e-7 * scale


def test_jet1_matches_jet2_first_derivatives():
    fn = lambda u, v: np.stack([np.exp(u) * v, np.sin(u + 2 * v)], -1)
    u, v = np.linspace(-1, 1, 5), np.linspace(0, 1, 5)
    a, b = jet1(fn, u, v), jet2(fn, u, v)
    np.testing.assert_allclose(a.d_u, b.d_u, atol=1e-12)
    np.testing.assert_allclose(a.d_v, b.d_v, atol=1e-12)


def test_jet_rejects_bad_step():
    with pytest.raises(DomainError):
        jet2(lambda u, v: u[..., None], np.zeros(1), np.zeros(1), step=0)


def test_integrate_ode_exponential():
    ts, ys = integrate_ode(lambda t, y: y, np.array([1.0]), (0.0, 1.0), 1e-3)
    assert abs(ys[-1, 0] - math.e) < 1e-8
    assert ts[-1] == pytest.approx(1.0)


def test_integrate_ode_constant_path():
    _ts, ys = integrate_ode(lambda t, y: np.zeros_like(y), np.array([2.0, -1.0]), (0.0, 3.0), 0.1)
    assert np.all(ys == np.array([2.0, -1.0]))


def test_integrate_ode_linear_system_vs_matrix_exponential():
    # harmonic oscillator: exact solution is a rotation
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    for step in (0.1, 0.05):
        _, ys = integrate_ode(lambda t, y: y @ A.T, np.array([1.0, 0.0]), (0.0, 2.0), step)
        exact = np.array([math.cos(2.0), -math.sin(2.0)])
        assert np.abs(ys[-1] - exact).max() < 0.05 * step**4


def test_integrate_ode_divergence():
    with pytest.raises(DivergenceError) as info:
        integrate_ode(lambda t, y: y * y, np.array([1.0]), (0.0, 2.0), 1e-2)
    assert 0.9 < info.value.time < 2.0
    with pytest.raises(DomainError):
        integrate_ode(lambda t, y: y, np.array([1.0]), (0.0, 1.0), 0.0)


def test_rk4_order():
    errs = [abs(rk4_endpoint(lambda t, y: y, np.array([1.0]), 0.0, np.array(1.0), n)[0] - math.e) for n in (10, 20, 40)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) > 3.9


def test_rk4_endpoint_vectorised_over_endpoints():
    t1 = np.array([0.5, 1.0, -0.5])
    y = rk4_endpoint(lambda t, y: y, np.array([1.0]), 0.0, t1, 200)
    np.testing.assert_allclose(y[..., 0], np.exp(t1), rtol=1e-11)


def test_nodal_flow_accuracy_and_smoothness():
    flow = NodalFlow(lambda t, y: np.stack([y[..., 1], -y[..., 0]], -1), np.array([0.0, 1.0]), 0.2, (-1.0, 1.0), 1e-3)
    t = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(flow(t)[..., 0], np.sin(t - 0.2), atol=1e-12)
    # second differences across node switches stay clean
    h = 2e-3
    t0 = np.linspace(-0.9, 0.9, 37)
    d2 = (flow(t0 + h)[..., 0] - 2 * flow(t0)[..., 0] + flow(t0 - h)[..., 0]) / h**2
    np.testing.assert_allclose(d2, -np.sin(t0 - 0.2), atol=1e-6)


def test_nodal_flow_nodes_cover_span():
    flow = NodalFlow(lambda t, y: y, np.array([1.0]), 0.0, (-0.5, 0.5), 1e-2)
    assert flow.t_nodes[0] < -0.5 and flow.t_nodes[-1] > 0.5
    np.testing.assert_allclose(flow.nodes[flow.k0], [1.0])


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (lambda s: 1.0, 0.0, 0.7, 0.7),
        (math.exp, 0.0, 1.0, math.e - 1),
        (lambda s: 1 / math.exp(s), 0.0, 1.0, 1 - math.exp(-1)),
        (lambda s: 1 / math.cosh(s), 0.0, 1.0, 2 * math.atan(math.tanh(0.5))),
    ],
)
def test_quadrature_examples(f, a, b, exact):
    assert abs(quad(f, a, b) - exact) < 1e-9
    vec = np.vectorize(f)
    assert abs(float(gauss_legendre(vec, a, b)) - exact) < 1e-9


def test_gauss_legendre_vectorised_endpoints():
    b = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(gauss_legendre(np.exp, 0.0, b), np.exp(b) - 1, atol=1e-13)
