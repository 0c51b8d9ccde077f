import math

import numpy as np
import pytest

from surflab import exprlang
from surflab.classify import PASS, is_class_A, is_lightlike_T
from surflab.families import (
    EXPECTABLE,
    ClippedDomainWarning,
    FamilyConfig,
    build_family,
    default_config,
    family_ids,
    isothermal_change,
    solve_profile_A,
    solve_profile_V,
)
from surflab.immersion import generator_metric
from surflab.spacetime import ConfigError, Warping


def test_catalog_size_and_models(chart):
    ids = family_ids()
    assert len(ids) >= 12
    assert ids == sorted(ids)
    for fid in ids:
        assert chart(fid).model.c == default_config(fid).c


@pytest.mark.parametrize(
    "data, path",
    [
        ({"family": "nope"}, "family"),
        ({"family": "classA/s31", "params": {"r": 2.0}}, "params.r"),
        ({"family": "classA/s31", "params": {"q": 2.0}}, "params.q"),
        ({"family": "classA/s31", "params": {"r": "x"}}, "params.r"),
        ({"family": "classA/s31", "c": 0}, "c"),
        ({"family": "classA/s31", "profiles": {"a": "u +"}}, "profiles.a"),
        ({"family": "classA/s31", "profiles": {"zz": "u"}}, "profiles.zz"),
        ({"family": "classA/s31", "grid": {"nu": 1}}, "grid.nu"),
        ({"family": "classA/s31", "grid": {"u_range": [0.5, 0.1]}}, "grid.u_range"),
        ({"family": "classA/s31", "grid": {"u_range": [-3, 0.1]}}, "grid.u_range"),
        ({"family": "classA/s31", "grid": {"w": 1}}, "grid.w"),
        ({"family": "classA/s31", "ode": {"step": 0}}, "ode.step"),
        ({"family": "classA/s31", "warping": {"f": "z"}}, "warping"),
        ({"family": "classA/s31", "warping": {"g": "1"}}, "warping.g"),
        ({"family": "classA/s31", "branch": "other"}, "branch"),
        ({"family": "classA/s31", "expect": {"flat": "pass"}}, "expect.flat"),
        ({"family": "classA/s31", "expect": {"class_a": "yes"}}, "expect.class_a"),
        ({"family": "classA/s31", "colour": 1}, "colour"),
        ({"family": "totumb/h31", "params": {"k": 0}}, "params.k"),
        ({"family": "pseudoumb/e31-cone", "profiles": {"b1": "2*cos(v)"}}, "profiles.b1"),
        ({"family": "pseudoumb/s31-nullscroll", "params": {"c3": 0.5}}, "params.c3"),
        ({"family": "pseudoumb/s31-torus", "params": {"theta": 1.0}}, "params.theta"),
    ],
)
def test_config_errors_name_the_key(data, path):
    with pytest.raises(ConfigError) as info:
        FamilyConfig.from_mapping(data)
    assert str(info.value).startswith(path + ":")


def test_config_defaults_and_overrides():
    cfg = default_config("classA/nullscroll", c=1, profiles={"b": "2"}, expect={"class_a": "pass"})
    assert cfg.c == 1
    assert exprlang.to_string(cfg.profiles["b"]) == "2"
    assert exprlang.to_string(cfg.profiles["a"]) == "1"
    assert cfg.expect == {"class_a": "pass"}
    assert set(EXPECTABLE) >= set(cfg.expect)
    assert default_config("classA/s31").params == {"r": 0.5}


def test_umbilic_profile_residual():
    w = Warping.from_text("exp(z)")
    prof = solve_profile_A(-1, 0.5, w, exprlang.parse("u"), exprlang.parse("1 + v"), (-0.1, 0.3), 0.0, 1e-3)
    V, U = np.meshgrid(np.linspace(-0.5, 0.5, 11), np.linspace(-0.1, 0.3, 21), indexing="ij")
    assert prof.valid(U, V).all()
    assert prof.residual(U, V).max() < 1e-7
    np.testing.assert_allclose(prof.at(np.zeros(3), np.array([-0.5, 0.0, 0.5])), [0.5, 1.0, 1.5])


def test_profile_needs_monotone_a():
    w = Warping.from_text("exp(z)")
    with pytest.raises(ConfigError, match="profiles.a"):
        solve_profile_A(-1, 0.5, w, exprlang.parse("u^2"), exprlang.parse("1"), (-0.1, 0.3), 0.0, 1e-3)
    with pytest.raises(ValueError):
        solve_profile_A(0, 0.5, w, exprlang.parse("u"), exprlang.parse("1"), (-0.1, 0.3), 0.0, 1e-3)


def test_null_scroll_profile_closed_form_for_b_zero():
    # V_u = 1/(2 f^2) for c = 0, b = 0, U = u: V = V0 + (1 - exp(-2u))/4 with f = exp(z)
    w = Warping.from_text("exp(z)")
    prof = solve_profile_V(
        exprlang.parse("u"), lambda u: np.zeros(np.shape(u)), 0, w, exprlang.parse("v"), (-0.5, 0.5), 0.0, 1e-3
    )
    V, U = np.meshgrid(np.linspace(-1, 1, 5), np.linspace(-0.5, 0.5, 11), indexing="ij")
    np.testing.assert_allclose(prof.at(U, V), V + (1 - np.exp(-2 * U)) / 4, atol=1e-12)


@pytest.mark.parametrize("c1, c2", [(1.0, 0.0), (-0.5, 0.3), (2.0, -1.0)])
def test_isothermal_change(c1, c2):
    w = Warping.from_text("cosh(z)")
    change, jac = isothermal_change(c1, c2, w)
    u, v = np.array([-0.3, 0.1, 0.4]), np.array([0.2, -0.5, 0.0])
    h = 1e-5
    cols = []
    for du, dv in ((h, 0), (0, h)):
        p, m = change(u + du, v + dv), change(u - du, v - dv)
        cols.append(np.stack([(p[0] - m[0]) / (2 * h), (p[1] - m[1]) / (2 * h)], -1))
    fd = np.stack(cols, -1)
    J = jac(u, v)
    np.testing.assert_allclose(J, fd, atol=1e-8)
    np.testing.assert_allclose(np.linalg.det(J), 1 / w.value(u), rtol=1e-12)
    assert np.all(J[..., 1, 1] == 0)
    with pytest.raises(ConfigError):
        isothermal_change(0.0, 0.0, w)


@pytest.mark.parametrize("fid", family_ids())
def test_every_family_has_lightlike_T(chart, fid):
    assert is_lightlike_T(chart(fid)).verdict == PASS


@pytest.mark.parametrize("fid", ["classA/s31", "classA/e31", "classA/h31", "classA/nullscroll"])
def test_generators_have_null_v_lines(chart, fid):
    ch = chart(fid)
    (u0, u1), (v0, v1) = ch.domain
    u, v = np.linspace(u0, u1, 7)[1:-1], np.linspace(v0, v1, 7)[1:-1]
    assert np.abs(generator_metric(ch, u, v)[..., 1, 1]).max() < 1e-9


def test_riccati_validity_is_clipped():
    cfg = default_config("classA/s31")
    ch = build_family(cfg, warn=False)
    (lo, hi), vr = ch.domain
    assert cfg.grid.u_range[0] <= lo < hi <= cfg.grid.u_range[1]
    assert (lo, hi) != cfg.grid.u_range
    assert vr == cfg.grid.v_range
    prof = ch.meta["profile"]
    V, U = np.meshgrid(np.linspace(*vr, 21), np.linspace(lo, hi, 41), indexing="ij")
    assert prof.valid(U, V).all()
    assert ch.meta["valid_rect"] == ch.domain


def test_clipping_warning(recwarn):
    with pytest.warns(ClippedDomainWarning, match="valid only on u"):
        build_family(default_config("classA/s31"))
    build_family(default_config("totumb/h31"))
    build_family(default_config("classA/s31"), warn=False)
    assert len(recwarn) == 0


def test_alternate_branch_is_the_same_class(chart):
    ch = build_family(default_config("classA/s31", branch="atan"), warn=False)
    assert is_class_A(ch).verdict == PASS
    # same point set up to reparametrisation: both charts lie on S^3_1 and share z = u
    u, v = np.array([0.0, 0.1]), np.array([0.2, -0.3])
    x = ch(u, v)
    np.testing.assert_allclose(x[..., -1], u)
    np.testing.assert_allclose(ch.model.inner(x[..., :-1], x[..., :-1]), 1, atol=1e-10)


@pytest.mark.parametrize("fid", family_ids())
def test_charts_lie_in_the_model(chart, fid):
    ch = chart(fid)
    U, V = ch.grid(7, 7, margin=0.05)
    x = ch(U, V)
    np.testing.assert_allclose(x[..., -1], U, atol=1e-12)
    if ch.model.c:
        q = ch.model.inner(x[..., :-1], x[..., :-1])
        assert np.abs(q - 1 / ch.model.c).max() < 1e-9


def test_s31_torus_constant():
    cfg = default_config("pseudoumb/s31-torus")
    ch = build_family(cfg, warn=False)
    th = cfg.params["theta"]
    assert ch.meta["c1"] == pytest.approx(math.sqrt(0.5 / math.cos(2 * th)))
