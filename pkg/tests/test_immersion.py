import numpy as np
import pytest

from surflab.families import build_family, default_config
from surflab.immersion import (
    AssumptionError,
    ContractError,
    NotInScopeError,
    SurfaceChart,
    adapted_frame,
    analyze,
    covariant_derivatives,
    gaussian_curvature,
    generator_coefficients,
    generator_gaussian_curvature,
    generator_metric,
    generator_shape_closed_form,
    induced_metric,
    shape_matrix,
)
from surflab.spaceforms import GeometryError, model
from surflab.spacetime import Warping, metric

GENERATED = [
    "classA/s31",
    "classA/h31",
    "classA/h31-quadric",
    "classA/e31",
    "classA/nullscroll",
    "pseudoumb/e31-cone",
    "pseudoumb/s31-torus",
    "totumb/h31",
    "fixture/sheared-bscroll",
]


def _pts(chart, n=4):
    (u0, u1), (v0, v1) = chart.domain
    us = np.linspace(u0, u1, n + 2)[1:-1]
    vs = np.linspace(v0, v1, n + 2)[1:-1]
    V, U = np.meshgrid(vs, us, indexing="ij")
    return U, V


def _flat_chart(fn, c=0, f="exp(z)", generated=False):
    return SurfaceChart(fn, model(c), Warping.from_text(f), ((-0.5, 0.5), (-0.5, 0.5)), generated=generated)


@pytest.mark.parametrize("fid", GENERATED)
def test_frame_relations(chart, fid):
    ch = chart(fid)
    u, v = _pts(ch)
    fr = adapted_frame(ch, u, v)
    z = ch(u, v)[..., -1]
    inv = fr.invariants(z, ch.warping, ch.model)
    assert max(float(np.max(x)) for x in inv.values()) < 1e-9


@pytest.mark.parametrize("fid", GENERATED)
def test_generated_chart_coordinates(chart, fid):
    ch = chart(fid)
    u, v = _pts(ch)
    g, character = induced_metric(ch, u, v)
    gc = generator_coefficients(ch, u, v)
    assert character == "lorentzian"
    assert np.abs(g[..., 1, 1]).max() < 1e-9 * (1 + np.abs(g).max())
    np.testing.assert_allclose(g[..., 0, 1], gc.E, rtol=1e-9)
    fr = adapted_frame(ch, u, v)
    # T = (1/E) d_v, and U has u-coordinate -1
    np.testing.assert_allclose(fr.t_coords[..., 0], 0, atol=1e-9)
    np.testing.assert_allclose(fr.t_coords[..., 1], 1 / gc.E, rtol=1e-8)
    np.testing.assert_allclose(fr.u_coords[..., 0], -1, rtol=1e-8)


@pytest.mark.parametrize("fid", GENERATED)
def test_lemma_closed_forms(chart, fid):
    ch = chart(fid)
    u, v = _pts(ch)
    _, _, sh = analyze(ch, u, v)
    gc = generator_coefficients(ch, u, v)
    w = ch.warping
    ratio = w.log_derivative(u)
    assert np.abs(sh.h3_11).max() < 1e-6
    assert np.abs(sh.h3_12 - ratio).max() < 1e-6
    assert np.abs(sh.h3_22 - (ratio - gc.E_u / gc.E)).max() < 1e-5 * (1 + np.abs(gc.E_u / gc.E).max())
    A4 = generator_shape_closed_form(gc, w.value(u))
    assert np.abs(sh.A_e4 - A4).max() < 1e-5 * (1 + np.abs(A4).max())
    np.testing.assert_allclose(sh.A_e3, shape_matrix(sh.h3_11, sh.h3_12, sh.h3_22))


@pytest.mark.parametrize("fid", ["classA/s31", "pseudoumb/s31-torus", "fixture/sheared-bscroll"])
def test_weingarten_formula(chart, fid):
    # A_xi T = -(nabla_T xi)^T, with W^T = -<W, U> T - <W, T> U
    ch = chart(fid)
    u, v = _pts(ch, 2)
    loc, fr, nab = covariant_derivatives(ch, u, v)
    _, _, sh = analyze(ch, u, v)
    w, m = ch.warping, ch.model
    t, s = fr.t_coords, fr.u_coords
    for xi, A in (("e3", sh.A_e3), ("e4", sh.A_e4)):
        for col, coords in ((0, t), (1, s)):
            dxi = coords[..., 0, None] * nab[0][xi] + coords[..., 1, None] * nab[1][xi]
            a_T = metric(dxi, fr.U, loc.z, w, m)
            a_U = metric(dxi, fr.T, loc.z, w, m)
            scale = 1 + np.abs(A).max()
            assert np.abs(A[..., 0, col] - a_T).max() < 1e-4 * scale
            assert np.abs(A[..., 1, col] - a_U).max() < 1e-4 * scale


def test_null_scroll_E(chart):
    ch = chart("classA/nullscroll")
    prof = ch.meta["profile"]
    u, v = _pts(ch)
    gc = generator_coefficients(ch, u, v)
    h = 1e-4
    V_v = (prof.at(u, v + h) - prof.at(u, v - h)) / (2 * h)
    f = ch.warping.value(u)
    np.testing.assert_allclose(gc.E, -f**2 * 1.0 * V_v, rtol=1e-6)  # U(u) = u


def test_generator_is_null_in_v(chart):
    ch = chart("classA/e31")
    u, v = _pts(ch)
    G = generator_metric(ch, u, v)
    assert np.abs(G[..., 1, 1]).max() < 1e-9


def test_generator_curvature_of_de_sitter_plane(chart):
    ch = chart("classA/s31")  # r = 0.5
    u, v = _pts(ch, 2)
    K = generator_gaussian_curvature(ch.base, ch.model, u, v)
    np.testing.assert_allclose(K, 4.0, rtol=1e-3)


@pytest.mark.parametrize("fid", ["generator/umbilic-h31-flat", "pseudoumb/s31-torus", "generator/scroll-e31-flat"])
def test_flat_generators(chart, fid):
    ch = chart(fid)
    u, v = _pts(ch, 2)
    K = generator_gaussian_curvature(ch.base, ch.model, u, v)
    assert np.abs(K).max() < 1e-4


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_gaussian_curvature_of_scaled_de_sitter_plane(r):
    # horizontal slice z = z0 over S^2_1(r) in E31: metric f(z0)^2 g, K = 1/(r f)^2
    z0 = 0.3

    def fn(u, v):
        return np.stack(
            [r * np.sinh(u), r * np.cosh(u) * np.cos(v), r * np.cosh(u) * np.sin(v), np.full(np.shape(u), z0)], -1
        )

    ch = _flat_chart(fn)
    u, v = np.array([0.1, -0.2]), np.array([0.3, 0.0])
    K = gaussian_curvature(ch, u, v)
    np.testing.assert_allclose(K, 1 / (r * np.exp(z0)) ** 2, rtol=1e-5)


def test_horizontal_riemannian_slice_is_rejected():
    ch = _flat_chart(lambda u, v: np.stack([0 * u, u, v, 0 * u + 0.1], -1))
    assert induced_metric(ch, np.array([0.0]), np.array([0.0]))[1] == "riemannian"
    with pytest.raises(GeometryError, match="Riemannian"):
        adapted_frame(ch, np.array([0.0]), np.array([0.0]))


def test_lorentzian_horizontal_slice_violates_assumption():
    ch = _flat_chart(lambda u, v: np.stack([u, v, 0 * u, 0 * u + 0.1], -1))
    with pytest.raises(AssumptionError, match="T vanishes"):
        adapted_frame(ch, np.array([0.0]), np.array([0.0]))


def test_vertical_cylinder_violates_assumption():
    ch = _flat_chart(lambda u, v: np.stack([v, 0 * u, 0 * u, u], -1))
    with pytest.raises(AssumptionError, match="eta vanishes"):
        adapted_frame(ch, np.array([0.1]), np.array([0.0]))


def test_non_lightlike_T_is_out_of_scope():
    ch = _flat_chart(lambda u, v: np.stack([v, 0 * u, u, u], -1))
    with pytest.raises(NotInScopeError):
        adapted_frame(ch, np.array([0.1]), np.array([0.0]))


def test_degenerate_chart():
    ch = _flat_chart(lambda u, v: np.stack([u, u, v, 0 * u], -1))
    assert induced_metric(ch, np.array([0.0]), np.array([0.0]))[1] == "degenerate"


def test_generator_coefficients_need_generated_chart():
    cfg = default_config("pseudoumb/e31-cone")
    ch = build_family(cfg, warn=False)
    bad = SurfaceChart(ch.map, ch.model, ch.warping, ch.domain, generated=False)
    with pytest.raises(ContractError):
        generator_coefficients(bad, np.array([0.0]), np.array([0.0]))
    shifted = SurfaceChart(lambda u, v: ch.map(u, v) + np.array([0, 0, 0, 0.01]), ch.model, ch.warping, ch.domain)
    with pytest.raises(ContractError):
        generator_coefficients(shifted, np.array([0.0]), np.array([0.0]))


def test_shape_operator_linearity(chart):
    ch = chart("classA/h31")
    u, v = _pts(ch, 2)
    _, _, sh = analyze(ch, u, v)
    np.testing.assert_allclose(sh.shape_operator(2.0, -3.0), 2 * sh.A_e3 - 3 * sh.A_e4)
    H3, H4 = -sh.h3_12, -sh.h4_12
    np.testing.assert_allclose(sh.A_H, sh.shape_operator(H3, H4))
