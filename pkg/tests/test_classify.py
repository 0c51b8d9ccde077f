import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from surflab.classify import (
    FAIL,
    INDETERMINATE,
    PASS,
    UNDEFINED,
    classify,
    is_pseudo_umbilical,
    shape_canonical_form,
    survey,
    umbilical_along,
    verdict,
)
from surflab.families import family_ids
from surflab.immersion import ContractError

P, F = PASS, FAIL
# class_a, pseudo_umbilical, totally_umbilical, flat_normal_bundle
CATALOG = {
    "classA/e31": (P, F, F, P),
    "classA/h31": (P, F, F, P),
    "classA/h31-quadric": (P, F, F, P),
    "classA/nullscroll": (P, F, F, P),
    "classA/s31": (P, F, F, P),
    "fixture/sheared-bscroll": (F, F, F, F),
    "generator/scroll-e31-flat": (F, F, F, P),
    "generator/scroll-h31-flat": (F, F, F, P),
    "generator/umbilic-e31": (P, F, F, P),
    "generator/umbilic-h31": (P, F, F, P),
    "generator/umbilic-h31-flat": (P, F, F, P),
    "generator/umbilic-s31": (P, F, F, P),
    "pseudoumb/e31-bscroll": (P, P, F, P),
    "pseudoumb/e31-cone": (F, P, F, P),
    "pseudoumb/e31-nullscroll": (P, P, F, P),
    "pseudoumb/s31-nullscroll": (P, P, F, P),
    "pseudoumb/s31-torus": (F, P, F, P),
    "totumb/h31": (P, P, P, P),
}
NAMES = ("class_a", "pseudo_umbilical", "totally_umbilical", "flat_normal_bundle")


def test_catalog_table_is_complete():
    assert set(CATALOG) == set(family_ids())


@pytest.fixture(scope="module")
def flags(chart):
    return {fid: classify(chart(fid)) for fid in CATALOG}


@pytest.mark.parametrize("fid", sorted(CATALOG))
def test_catalog_flags(flags, fid):
    got = flags[fid]
    assert got["lightlike_T"].verdict == PASS
    assert tuple(got[n].verdict for n in NAMES) == CATALOG[fid]


@pytest.mark.parametrize("fid", sorted(CATALOG))
def test_routes_agree(flags, fid):
    for flag in flags[fid].values():
        assert flag.routes_agree, (fid, flag.name, flag.routes)


@pytest.mark.parametrize("fid", sorted(CATALOG))
def test_logical_chain(flags, fid):
    f = flags[fid]
    if f["totally_umbilical"].passed:
        assert f["pseudo_umbilical"].passed
        assert f["class_a"].passed
    # class A with a generator criterion h3 = 0 gives a flat normal bundle
    if f["class_a"].passed:
        assert f["flat_normal_bundle"].passed


def test_flag_serialisation(flags):
    d = flags["totumb/h31"]["class_a"].to_dict()
    assert d["verdict"] == PASS
    assert set(d["routes"]) == {"direct", "criterion_h3"}
    assert d["residual"] < d["tolerance"]


def test_verdict_tri_state():
    assert verdict([0.0, 1e-7]) == PASS
    assert verdict([0.0, 1e-2]) == FAIL
    assert verdict([0.0, 1e-4]) == INDETERMINATE
    assert verdict([1e-4], norm=100.0) == PASS
    assert verdict([np.nan]) == FAIL


@given(st.lists(st.floats(0, 1e-6), min_size=1, max_size=10))
def test_small_residuals_pass(res):
    assert verdict(res) == PASS


def test_pseudo_umbilicity_undefined_when_H_vanishes(chart):
    s = survey(chart("classA/e31"), n=3)
    zero = s.shape.__class__(**{**s.shape.__dict__, "h3_12": 0 * s.shape.h3_12, "h4_12": 0 * s.shape.h4_12})
    s0 = s.__class__(**{**s.__dict__, "shape": zero})
    assert is_pseudo_umbilical(s0).verdict == UNDEFINED


def test_umbilical_along_directions(chart):
    s = survey(chart("totumb/h31"), n=3)
    for xi in ("e3", "e4", "H", (0.3, -2.0)):
        assert umbilical_along(s, xi).verdict == PASS
    assert umbilical_along(survey(chart("classA/e31"), n=3), "e4").verdict == FAIL


G = np.array([[0.0, -1.0], [-1.0, 0.0]])  # metric over {T, U}
G_DIAG = np.diag([-1.0, 1.0])


def test_canonical_form_type_I():
    out = shape_canonical_form(np.diag([2.0, 3.0]), G_DIAG)
    assert out == {"type": "I", "lambda1": 2.0, "lambda2": 3.0}
    assert shape_canonical_form(2 * np.eye(2), G)["type"] == "I"


def test_canonical_form_type_II():
    A = np.array([[1.0, 2.0], [-2.0, 1.0]])  # self-adjoint for diag(-1, 1)
    out = shape_canonical_form(A, G_DIAG)
    assert out["type"] == "II"
    assert out["lambda"] == pytest.approx(1.0)
    assert out["mu"] == pytest.approx(2.0)


def test_canonical_form_type_III():
    A = np.array([[0.7, 0.0], [1.0, 0.7]])  # over {T, U}: A T = 0.7 T + U
    out = shape_canonical_form(A, G)
    assert out == {"type": "III", "lambda": pytest.approx(0.7)}


def test_canonical_form_of_the_null_scroll_generator(chart):
    # the anti de Sitter B-scroll generator of the totally umbilical family has b = 1
    from surflab.immersion import base_shape_operator, generator_metric

    ch = chart("generator/scroll-h31-flat")
    u, v = np.array([0.1]), np.array([0.2])
    S, _ = base_shape_operator(ch.base, ch.model, u, v)
    out = shape_canonical_form(S[0], generator_metric(ch, u, v)[0], tol=1e-6)
    assert out["type"] == "III"
    assert abs(out["lambda"]) == pytest.approx(1.0, abs=1e-5)


def test_canonical_form_contract():
    with pytest.raises(ContractError):
        shape_canonical_form(np.eye(3), np.eye(3))
    with pytest.raises(ContractError):
        shape_canonical_form(np.array([[1.0, 2.0], [0.0, 1.0]]), G_DIAG)
