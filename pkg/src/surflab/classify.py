"""Property predicates for surfaces with light-like tangential d/dz.

Every predicate returns a :class:`Flag` with a tri-state verdict.  Where two
independent routes exist (direct shape-operator checks and the generator
criteria in terms of E, h1, h2, h3) both are computed and reported; the
verdict comes from the direct route.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .immersion import (
    ContractError,
    SurfaceChart,
    analyze,
    generator_coefficients,
    normal_curvature,
    tangent_dz_character,
)
from .spaceforms import GeometryError

__all__ = [
    "FAIL",
    "INDETERMINATE",
    "PASS",
    "UNDEFINED",
    "Flag",
    "Survey",
    "classify",
    "has_flat_normal_bundle",
    "is_class_A",
    "is_lightlike_T",
    "is_pseudo_umbilical",
    "is_totally_umbilical",
    "shape_canonical_form",
    "survey",
    "umbilical_along",
    "verdict",
]

PASS, FAIL, INDETERMINATE, UNDEFINED = "pass", "fail", "indeterminate", "undefined"
REL_TOL = 1e-5
FAIL_TOL = 1e-3


def verdict(residual, norm=0.0) -> str:
    """Tri-state verdict over sample points: every point below tolerance, or any point clearly above."""
    r = np.abs(np.asarray(residual, dtype=float)).ravel()
    n = np.broadcast_to(np.abs(np.asarray(norm, dtype=float)), np.shape(residual)).ravel()
    if not np.all(np.isfinite(r)) or np.any(r > FAIL_TOL):
        return FAIL
    if np.all(r < REL_TOL * (n + 1)):
        return PASS
    return INDETERMINATE


@dataclass(frozen=True)
class Flag:
    name: str
    verdict: str
    residual: float
    tolerance: float
    routes: dict[str, dict[str, Any]] = field(default_factory=dict)
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def routes_agree(self) -> bool:
        return all(r["verdict"] == self.verdict for r in self.routes.values())

    def to_dict(self) -> dict[str, Any]:
        out = {"verdict": self.verdict, "residual": self.residual, "tolerance": self.tolerance, "routes": self.routes}
        if self.detail:
            out["detail"] = self.detail
        return out


def _route(residual, norm) -> dict[str, Any]:
    r = np.abs(np.asarray(residual, dtype=float))
    return {"residual": float(np.max(r)), "verdict": verdict(r, norm)}


def _flag(name, primary: dict, routes: dict, norm, detail="") -> Flag:
    tol = float(REL_TOL * (np.max(norm) + 1))
    return Flag(name, primary["verdict"], primary["residual"], tol, routes, detail)


@dataclass(frozen=True)
class Survey:
    """Pointwise frame, shape and generator data on a fixed sample grid."""

    chart: SurfaceChart
    u: np.ndarray
    v: np.ndarray
    loc: Any
    frame: Any
    shape: Any
    gc: Any  # generator coefficients, None for non-generated charts
    f: np.ndarray
    fp: np.ndarray

    @property
    def norm(self) -> np.ndarray:
        """Max-entry norm of the shape operators at each point."""
        a3 = np.abs(self.shape.A_e3).max(axis=(-2, -1))
        a4 = np.abs(self.shape.A_e4).max(axis=(-2, -1))
        return np.maximum(a3, a4)


def sample_points(chart: SurfaceChart, n: int = 5, margin: float = 0.1):
    """An n x n grid inside the chart domain, shrunk by ``margin`` of each range."""
    (u0, u1), (v0, v1) = chart.domain
    du, dv = margin * (u1 - u0), margin * (v1 - v0)
    us = np.linspace(u0 + du, u1 - du, n)
    vs = np.linspace(v0 + dv, v1 - dv, n)
    V, U = np.meshgrid(vs, us, indexing="ij")
    return U, V


def survey(chart: SurfaceChart, n: int = 5, points=None) -> Survey:
    u, v = sample_points(chart, n) if points is None else map(np.asarray, points)
    loc, frame, shape = analyze(chart, u, v)
    gc = generator_coefficients(chart, u, v) if chart.generated else None
    w = chart.warping
    return Survey(chart, u, v, loc, frame, shape, gc, w.value(loc.z), w.d1(loc.z))


def _as_survey(target, n: int = 5) -> Survey:
    return target if isinstance(target, Survey) else survey(target, n)


# ---------------------------------------------------------------------------
# predicates


def is_lightlike_T(chart: SurfaceChart, n: int = 5) -> Flag:
    """|<T, T>| over the sample grid; T = 0 or eta = 0 violate the standing assumptions."""
    u, v = sample_points(chart, n)
    try:
        tt, tnorm, eta = tangent_dz_character(chart, u, v)
    except GeometryError as exc:
        return Flag("lightlike_T", FAIL, float("nan"), REL_TOL, detail=str(exc))
    if np.any(tnorm < 1e-8):
        return Flag("lightlike_T", FAIL, float(np.max(np.abs(tt))), REL_TOL, detail="assumption violated: T = 0")
    if np.any(np.abs(eta) < 1e-12):
        return Flag("lightlike_T", FAIL, float(np.max(np.abs(tt))), REL_TOL, detail="assumption violated: eta = 0")
    r = _route(tt, 0.0)
    return _flag("lightlike_T", r, {"direct": r}, 0.0)


def is_class_A(target, n: int = 5) -> Flag:
    """T is an eigenvector of A_e3 and A_e4; cross-checked with h3 = 0 on generated charts.

    Over {T, U} the first column of A_xi is (-h_12, -h_11), so the direct
    residual is max(|h3_11|, |h4_11|).
    """
    s = _as_survey(target, n)
    res = np.maximum(np.abs(s.shape.h3_11), np.abs(s.shape.h4_11))
    routes = {"direct": _route(res, s.norm)}
    if s.gc is not None:
        routes["criterion_h3"] = _route(s.gc.h3, s.norm)
    return _flag("class_a", routes["direct"], routes, s.norm)


def _umbilic_residual(A):
    half = 0.5 * np.trace(A, axis1=-2, axis2=-1)
    return np.abs(A - half[..., None, None] * np.eye(2)).max(axis=(-2, -1))


def umbilical_along(target, xi="H", n: int = 5) -> Flag:
    """A_xi proportional to the identity; ``xi`` is "e3", "e4", "H" or coefficients (xi3, xi4)."""
    s = _as_survey(target, n)
    if isinstance(xi, str):
        A = {"e3": s.shape.A_e3, "e4": s.shape.A_e4, "H": s.shape.A_H}[xi]
        label = xi
    else:
        A = s.shape.shape_operator(*xi)
        label = "xi"
    r = _route(_umbilic_residual(A), s.norm)
    return _flag(f"umbilical_{label}", r, {"direct": r}, s.norm)


def is_pseudo_umbilical(target, n: int = 5) -> Flag:
    """A_H proportional to the identity.

    The generator criterion is h2 h3 = 0 together with
    h1 h2 f^4 + E_u f' f - E f'^2 = 0, the off-diagonal entries of A_H.
    A_H is quadratic in the normal frame, so the check does not depend on
    the orientation of e3, e4.
    """
    s = _as_survey(target, n)
    Hn = np.hypot(s.shape.h3_12, s.shape.h4_12)
    if np.all(Hn < 1e-10):
        return Flag("pseudo_umbilical", UNDEFINED, 0.0, REL_TOL, detail="H = 0: pseudo-umbilicity undefined")
    norm = np.maximum(s.norm**2, np.abs(s.shape.A_H).max(axis=(-2, -1)))
    routes = {"direct": _route(_umbilic_residual(s.shape.A_H), norm)}
    if s.gc is not None:
        g, f, fp = s.gc, s.f, s.fp
        r1 = f**2 * g.h2 * g.h3 / g.E**3
        r2 = (g.h1 * g.h2 * f**4 + g.E_u * fp * f - g.E * fp**2) / (g.E * f**2)
        routes["criterion"] = _route(np.maximum(np.abs(r1), np.abs(r2)), norm)
    return _flag("pseudo_umbilical", routes["direct"], routes, norm)


def is_totally_umbilical(target, n: int = 5) -> Flag:
    """A_e3 and A_e4 both proportional to the identity; criterion f'/f - E_u/E = h1 = h3 = 0."""
    s = _as_survey(target, n)
    res = np.maximum(_umbilic_residual(s.shape.A_e3), _umbilic_residual(s.shape.A_e4))
    routes = {"direct": _route(res, s.norm)}
    if s.gc is not None:
        g = s.gc
        crit = np.max(np.abs([s.fp / s.f - g.E_u / g.E, g.h1, g.h3]), axis=0)
        routes["criterion"] = _route(crit, s.norm)
    return _flag("totally_umbilical", routes["direct"], routes, s.norm)


def has_flat_normal_bundle(target, n: int = 5) -> Flag:
    """R_perp = 0 by finite differences of the normal connection; criterion h3 (f'/f - E_u/E) = 0."""
    s = _as_survey(target, n)
    rperp = normal_curvature(s.chart, s.u, s.v)
    routes = {"direct": _route(rperp, s.norm)}
    if s.gc is not None:
        g = s.gc
        routes["criterion"] = _route(g.h3 * (s.fp / s.f - g.E_u / g.E), s.norm)
    return _flag("flat_normal_bundle", routes["direct"], routes, s.norm)


def shape_canonical_form(A, metric, tol: float = 1e-8) -> dict[str, Any]:
    """Canonical type of a self-adjoint operator on a Lorentzian plane.

    Returns ``{"type": "I" | "II" | "III", ...}`` with the eigenvalues
    (type I), ``lambda`` and ``mu`` of the complex pair (type II) or the
    double eigenvalue (type III).
    """
    A = np.asarray(A, dtype=float)
    G = np.asarray(metric, dtype=float)
    if A.shape != (2, 2) or G.shape != (2, 2):
        raise ContractError("shape_canonical_form expects 2x2 matrices")
    scale = max(np.abs(A).max(), 1.0) * max(np.abs(G).max(), 1.0)
    if np.abs(G @ A - (G @ A).T).max() > 1e-6 * scale:
        raise ContractError("operator is not self-adjoint with respect to the metric")
    tr, det = np.trace(A), np.linalg.det(A)
    disc = tr * tr - 4 * det
    a = max(np.abs(A).max(), 1.0)
    if disc > tol * a * a:
        root = np.sqrt(disc)
        return {"type": "I", "lambda1": float((tr - root) / 2), "lambda2": float((tr + root) / 2)}
    if disc < -tol * a * a:
        return {"type": "II", "lambda": float(tr / 2), "mu": float(np.sqrt(-disc) / 2)}
    lam = tr / 2
    if np.abs(A - lam * np.eye(2)).max() < np.sqrt(tol) * a:
        return {"type": "I", "lambda1": float(lam), "lambda2": float(lam)}
    return {"type": "III", "lambda": float(lam)}


def classify(chart: SurfaceChart, n: int = 5) -> dict[str, Flag]:
    """All property flags of a chart, sharing one survey."""
    lt = is_lightlike_T(chart, n)
    if lt.verdict == FAIL:
        return {"lightlike_T": lt}
    s = survey(chart, n)
    return {
        "lightlike_T": lt,
        "class_a": is_class_A(s),
        "pseudo_umbilical": is_pseudo_umbilical(s),
        "totally_umbilical": is_totally_umbilical(s),
        "flat_normal_bundle": has_flat_normal_bundle(s),
    }
