"""Time-like surfaces in the static space-time.

A :class:`SurfaceChart` is a vectorised map ``(u, v) -> array(..., dim + 1)``
whose last component is ``z``.  Everything geometric is computed from
finite-difference jets of that map: the induced metric, the adapted
pseudo-orthonormal frame {T, U; e3, e4}, the second fundamental form, shape
operators and, for generated charts ``(x(u, v), u)``, the generator
coefficients E, h1, h2, h3.

Shape operators are 2x2 matrices over the ordered basis {T, U}; column j is
the image of the j-th basis vector.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .numkit import DEFAULT_STEP, field_partials, jet1, jet2
from .spaceforms import GeometryError, SpaceFormModel
from .spacetime import Warping, connection, metric

__all__ = [
    "AdaptedFrame",
    "AssumptionError",
    "ContractError",
    "GeneratorCoefficients",
    "NotInScopeError",
    "ShapeData",
    "SurfaceChart",
    "adapted_frame",
    "analyze",
    "base_shape_operator",
    "covariant_derivatives",
    "fundamental_forms",
    "gaussian_curvature",
    "generator_coefficients",
    "generator_gaussian_curvature",
    "generator_metric",
    "generator_shape_closed_form",
    "induced_metric",
    "normal_connection_form",
    "normal_curvature",
    "shape_matrix",
]

LIGHTLIKE_TOL = 1e-6
DEGENERATE_TOL = 1e-12


class NotInScopeError(GeometryError):
    """(d/dz)^T is not light-like."""


class AssumptionError(GeometryError):
    """T = 0 or eta = 0 (horizontal slices and vertical cylinders are excluded)."""


class ContractError(ValueError):
    """An operation was applied to a chart outside its contract."""


@dataclass(frozen=True)
class SurfaceChart:
    """Parametrised surface in the space-time.

    ``map(u, v)`` broadcasts over array arguments and returns an array of
    shape ``u.shape + (dim + 1,)`` holding the model coordinates followed by z.
    ``generated`` marks charts of the form (x(u, v), u).
    """

    map: Callable
    model: SpaceFormModel
    warping: Warping
    domain: tuple[tuple[float, float], tuple[float, float]]
    name: str = "chart"
    generated: bool = True
    meta: Mapping = field(default_factory=dict)

    def __call__(self, u, v):
        return self.map(np.asarray(u, dtype=float), np.asarray(v, dtype=float))

    def base(self, u, v):
        """The model part x(u, v)."""
        return self(u, v)[..., :-1]

    def grid(self, nu: int = 21, nv: int = 21, margin: float = 0.0):
        """Grid arrays (u, v) of shape (nv, nu): rows are v-lines, so ravel() is v-major."""
        (u0, u1), (v0, v1) = self.domain
        du, dv = margin * (u1 - u0), margin * (v1 - v0)
        us = np.linspace(u0 + du, u1 - du, nu)
        vs = np.linspace(v0 + dv, v1 - dv, nv)
        V, U = np.meshgrid(vs, us, indexing="ij")
        return U, V


@dataclass(frozen=True)
class AdaptedFrame:
    """The frame {T, U; e3, e4} at a batch of points (arrays of shape (..., dim + 1))."""

    T: np.ndarray
    U: np.ndarray
    e3: np.ndarray
    e4: np.ndarray
    t_coords: np.ndarray  # T = t^u phi_u + t^v phi_v
    u_coords: np.ndarray

    def invariants(self, z, w: Warping, m: SpaceFormModel) -> dict[str, np.ndarray]:
        """Residuals of the defining inner-product relations."""
        ip = lambda a, b: metric(a, b, z, w, m)
        return {
            "TT": np.abs(ip(self.T, self.T)),
            "UU": np.abs(ip(self.U, self.U)),
            "TU": np.abs(ip(self.T, self.U) + 1.0),
            "e3e3": np.abs(ip(self.e3, self.e3) - 1.0),
            "e4e4": np.abs(ip(self.e4, self.e4) - 1.0),
            "e3e4": np.abs(ip(self.e3, self.e4)),
            "cross": np.max(
                np.abs([ip(a, b) for a in (self.T, self.U) for b in (self.e3, self.e4)]), axis=0
            ),
        }


@dataclass(frozen=True)
class ShapeData:
    h3_11: np.ndarray
    h3_12: np.ndarray
    h3_22: np.ndarray
    h4_11: np.ndarray
    h4_12: np.ndarray
    h4_22: np.ndarray
    A_e3: np.ndarray
    A_e4: np.ndarray
    A_H: np.ndarray
    H: np.ndarray

    def shape_operator(self, xi3, xi4):
        """A_xi for xi = xi3 e3 + xi4 e4."""
        return np.asarray(xi3)[..., None, None] * self.A_e3 + np.asarray(xi4)[..., None, None] * self.A_e4


@dataclass(frozen=True)
class GeneratorCoefficients:
    E: np.ndarray
    E_u: np.ndarray
    E_v: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray
    N: np.ndarray  # unit normal of the generating surface in the model


def shape_matrix(h11, h12, h22):
    """A_xi over {T, U} from h_jk = <h(., .), xi> (pseudo-orthonormal, <T,U> = -1)."""
    return np.stack([np.stack([-h12, -h22], -1), np.stack([-h11, -h12], -1)], -2)


# ---------------------------------------------------------------------------
# pointwise analysis


@dataclass(frozen=True)
class _Local:
    x: np.ndarray
    z: np.ndarray
    d_u: np.ndarray
    d_v: np.ndarray
    d_uu: np.ndarray | None
    d_uv: np.ndarray | None
    d_vv: np.ndarray | None
    g: np.ndarray


def _local(chart: SurfaceChart, u, v, order: int = 2, step: float = DEFAULT_STEP) -> _Local:
    if order == 2:
        j = jet2(chart, u, v, step)
        second = (j.d_uu, j.d_uv, j.d_vv)
    else:
        j = jet1(chart, u, v, step)
        second = (None, None, None)
    value = j.value
    x, z = value[..., :-1], value[..., -1]
    w, m = chart.warping, chart.model
    guu = metric(j.d_u, j.d_u, z, w, m)
    guv = metric(j.d_u, j.d_v, z, w, m)
    gvv = metric(j.d_v, j.d_v, z, w, m)
    g = np.stack([np.stack([guu, guv], -1), np.stack([guv, gvv], -1)], -2)
    return _Local(x, z, j.d_u, j.d_v, *second, g)


def _check_lorentzian(g):
    det = np.linalg.det(g)
    scale = 1.0 + np.abs(g).max(axis=(-2, -1)) ** 2
    if np.any(np.abs(det) < DEGENERATE_TOL * scale):
        raise GeometryError("degenerate induced metric")
    if np.any(det > 0):
        raise GeometryError("induced metric is Riemannian; a time-like surface is required")
    return det


def induced_metric(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP):
    """Induced metric g_ij = <phi_i, phi_j> and its causal character.

    Returns ``(g, character)`` with ``g`` of shape (..., 2, 2) and character
    one of "lorentzian", "riemannian", "degenerate" (worst over the batch).
    """
    g = _local(chart, u, v, order=1, step=step).g
    det = np.linalg.det(g)
    scale = 1.0 + np.abs(g).max(axis=(-2, -1)) ** 2
    if np.any(np.abs(det) < DEGENERATE_TOL * scale):
        character = "degenerate"
    elif np.any(det > 0):
        character = "riemannian"
    else:
        character = "lorentzian"
    return g, character


def generator_metric(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP):
    """Metric g_c(x_i, x_j) of the generating surface x(u, v) in the model."""
    j = jet1(chart.base, u, v, step)
    ip = chart.model.inner
    guu, guv, gvv = ip(j.d_u, j.d_u), ip(j.d_u, j.d_v), ip(j.d_v, j.d_v)
    return np.stack([np.stack([guu, guv], -1), np.stack([guv, gvv], -1)], -2)


def _dz(loc: _Local):
    out = np.zeros(loc.d_u.shape)
    out[..., -1] = 1.0
    return out


def _generalized_cross(rows):
    """Vector orthogonal (Euclidean) to each row; rows has shape (..., k, k + 1)."""
    k1 = rows.shape[-1]
    comps = []
    for c in range(k1):
        minor = np.delete(rows, c, axis=-1)
        comps.append((-1) ** c * np.linalg.det(minor))
    return np.stack(comps, -1)


def _lowered(vec, z, w: Warping, m: SpaceFormModel):
    """Covector of a space-time vector under the space-time metric."""
    out = np.array(vec, dtype=float)
    out[..., :-1] *= (w.value(z) ** 2)[..., None] * m.signature.diag
    return out


def _tangent_dz(loc: _Local, w, m):
    """Tangential part T of d/dz, its chart coordinates, and <T,T>."""
    b = np.stack([loc.d_u[..., -1], loc.d_v[..., -1]], -1)
    t = np.linalg.solve(loc.g, b[..., None])[..., 0]
    T = t[..., 0, None] * loc.d_u + t[..., 1, None] * loc.d_v
    return T, t, metric(T, T, loc.z, w, m)


def _frame(loc: _Local, chart: SurfaceChart, check: bool = True) -> AdaptedFrame:
    w, m = chart.warping, chart.model
    _check_lorentzian(loc.g)
    T, t, TT = _tangent_dz(loc, w, m)
    tnorm = np.linalg.norm(T, axis=-1)
    if check:
        if np.any(tnorm < 1e-10):
            raise AssumptionError("T vanishes (horizontal slice); excluded by the standing assumptions")
        if np.any(np.abs(TT) > LIGHTLIKE_TOL):
            if np.any(np.abs(1.0 - TT) < 1e-10):
                raise AssumptionError("eta vanishes (vertical cylinder); excluded by the standing assumptions")
            raise NotInScopeError(f"light-like T required; max |<T,T>| = {np.abs(TT).max():.3g}")
    # coordinate vector least parallel to T gives the second null direction
    wu = metric(loc.d_u, T, loc.z, w, m)
    wv = metric(loc.d_v, T, loc.z, w, m)
    nu = np.linalg.norm(loc.d_u, axis=-1)
    nv = np.linalg.norm(loc.d_v, axis=-1)
    use_u = np.abs(wu) / nu >= np.abs(wv) / nv
    W = np.where(use_u[..., None], loc.d_u, loc.d_v)
    wcoord = np.where(use_u[..., None], np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    WT = np.where(use_u, wu, wv)
    k = metric(W, W, loc.z, w, m) / (2 * WT)
    U = -(W - k[..., None] * T) / WT[..., None]
    ucoord = -(wcoord - k[..., None] * t) / WT[..., None]
    e3 = _dz(loc) - T
    rows = [_lowered(loc.d_u, loc.z, w, m), _lowered(loc.d_v, loc.z, w, m), _lowered(e3, loc.z, w, m)]
    if m.c != 0:
        rows.append(np.concatenate([loc.x * m.signature.diag, np.zeros(loc.z.shape + (1,))], -1))
    e4 = _generalized_cross(np.stack(rows, -2))
    n2 = metric(e4, e4, loc.z, w, m)
    if np.any(n2 <= 0):
        raise GeometryError("normal complement is not space-like")
    e4 = e4 / np.sqrt(n2)[..., None]
    cols = [T, U, e3, e4]
    if m.c != 0:
        cols.insert(0, np.concatenate([loc.x, np.zeros(loc.z.shape + (1,))], -1))
    orient = np.linalg.det(np.stack(cols, -2))
    e4 = np.where((orient < 0)[..., None], -e4, e4)
    return AdaptedFrame(T, U, e3, e4, t, ucoord)


def adapted_frame(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP) -> AdaptedFrame:
    """The frame {T, U; e3, e4} of a surface with light-like (d/dz)^T.

    T is the tangential part of d/dz, U the tangent null vector with
    <T, U> = -1, e3 = d/dz - T and e4 completes an orthonormal normal frame,
    oriented so that (x, T, U, e3, e4) (or (T, U, e3, e4) for c = 0) is
    positively oriented.
    """
    return _frame(_local(chart, u, v, order=1, step=step), chart)


def tangent_dz_character(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP):
    """<T, T>, |T| and <eta, eta> without raising; used by predicates."""
    loc = _local(chart, u, v, order=1, step=step)
    T, _, TT = _tangent_dz(loc, chart.warping, chart.model)
    eta = _dz(loc) - T
    return TT, np.linalg.norm(T, axis=-1), metric(eta, eta, loc.z, chart.warping, chart.model)


def _second_fundamental(loc: _Local, chart: SurfaceChart, frame: AdaptedFrame):
    """h(phi_i, phi_j) for coordinate fields, as normal space-time vectors."""
    w, m = chart.warping, chart.model
    out = {}
    ginv = np.linalg.inv(loc.g)
    basis = (loc.d_u, loc.d_v)
    second = {(0, 0): loc.d_uu, (0, 1): loc.d_uv, (1, 1): loc.d_vv}
    for (i, j), dd in second.items():
        nab = connection(loc.x, loc.z, basis[i], basis[j], dd, w, m)
        low = np.stack([metric(nab, b, loc.z, w, m) for b in basis], -1)
        coef = np.einsum("...kl,...l->...k", ginv, low)
        out[(i, j)] = nab - coef[..., 0, None] * loc.d_u - coef[..., 1, None] * loc.d_v
    out[(1, 0)] = out[(0, 1)]
    return out


def _bilinear(hc, a, b):
    return sum(a[..., i, None] * b[..., j, None] * hc[(i, j)] for i in range(2) for j in range(2))


def _shape_from(loc: _Local, chart: SurfaceChart, frame: AdaptedFrame) -> ShapeData:
    w, m = chart.warping, chart.model
    hc = _second_fundamental(loc, chart, frame)
    t, s = frame.t_coords, frame.u_coords
    hTT, hTU, hUU = _bilinear(hc, t, t), _bilinear(hc, t, s), _bilinear(hc, s, s)
    comp = {}
    for name, vec in (("11", hTT), ("12", hTU), ("22", hUU)):
        comp["h3_" + name] = metric(vec, frame.e3, loc.z, w, m)
        comp["h4_" + name] = metric(vec, frame.e4, loc.z, w, m)
    A3 = shape_matrix(comp["h3_11"], comp["h3_12"], comp["h3_22"])
    A4 = shape_matrix(comp["h4_11"], comp["h4_12"], comp["h4_22"])
    # H = (1/2) g^{ij} h_ij = -h(T, U) in the pseudo-orthonormal frame
    H3, H4 = -comp["h3_12"], -comp["h4_12"]
    AH = H3[..., None, None] * A3 + H4[..., None, None] * A4
    H = H3[..., None] * frame.e3 + H4[..., None] * frame.e4
    return ShapeData(A_e3=A3, A_e4=A4, A_H=AH, H=H, **comp)


def fundamental_forms(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP) -> ShapeData:
    """Second fundamental form components, shape operators and mean curvature."""
    loc = _local(chart, u, v, order=2, step=step)
    frame = _frame(loc, chart)
    return _shape_from(loc, chart, frame)


def analyze(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP):
    """Frame and shape data from a single jet evaluation."""
    loc = _local(chart, u, v, order=2, step=step)
    frame = _frame(loc, chart)
    return loc, frame, _shape_from(loc, chart, frame)


# ---------------------------------------------------------------------------
# generated charts


def _require_generated(chart: SurfaceChart, u, v):
    if not chart.generated:
        raise ContractError(f"{chart.name}: generator coefficients need a generated chart (x(u, v), u)")
    z = chart(u, v)[..., -1]
    if np.any(np.abs(z - np.asarray(u)) > 1e-10 * (1 + np.abs(u))):
        raise ContractError(f"{chart.name}: z-component differs from u")


def generator_coefficients(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP) -> GeneratorCoefficients:
    """E, its partials, and h1, h2, h3 of the generating surface.

    The unit normal of the generating surface is f * e4bar, which ties the
    sign of h_i to the orientation of e4.
    """
    _require_generated(chart, u, v)
    loc = _local(chart, u, v, order=2, step=step)
    frame = _frame(loc, chart)
    m, w = chart.model, chart.warping
    ip = m.inner
    xu, xv = loc.d_u[..., :-1], loc.d_v[..., :-1]
    xuu, xuv, xvv = loc.d_uu[..., :-1], loc.d_uv[..., :-1], loc.d_vv[..., :-1]
    f, fp = w.value(loc.z), w.d1(loc.z)
    E = f**2 * ip(xu, xv)
    E_u = 2 * f * fp * ip(xu, xv) + f**2 * (ip(xuu, xv) + ip(xu, xuv))
    E_v = f**2 * (ip(xuv, xv) + ip(xu, xvv))
    N = f[..., None] * frame.e4[..., :-1]
    return GeneratorCoefficients(E, E_u, E_v, ip(xuu, N), ip(xuv, N), ip(xvv, N), N)


def generator_shape_closed_form(gc: GeneratorCoefficients, f):
    """A_e4 over {T, U} in terms of the generator coefficients."""
    E = gc.E
    return np.stack(
        [
            np.stack([f * gc.h2 / E, -f * gc.h1], -1),
            np.stack([-f * gc.h3 / E**2, f * gc.h2 / E], -1),
        ],
        -2,
    )


# ---------------------------------------------------------------------------
# curvature


def _christoffel(g, dg_u, dg_v):
    """Gamma[k, i, j] for a 2-metric (batch-leading)."""
    ginv = np.linalg.inv(g)
    dg = np.stack([dg_u, dg_v], -3)  # (..., l, i, j) = d_l g_ij
    # Gamma_{ijl} lowered: (d_i g_jl + d_j g_il - d_l g_ij)/2
    low = 0.5 * (
        np.einsum("...ijl->...ijl", dg)  # d_i g_jl
        + np.einsum("...jil->...ijl", dg)  # d_j g_il
        - np.einsum("...lij->...ijl", dg)  # d_l g_ij
    )
    return np.einsum("...kl,...ijl->...kij", ginv, low)


def _metric_and_partials(fn, inner, u, v, step):
    """Metric of ``fn`` under ``inner`` and its analytic first partials from jet2."""
    j = jet2(fn, u, v, step)
    P = (j.d_u, j.d_v)
    PP = {(0, 0): j.d_uu, (0, 1): j.d_uv, (1, 0): j.d_uv, (1, 1): j.d_vv}
    g = np.empty(np.shape(j.value)[:-1] + (2, 2))
    dgu, dgv = np.empty_like(g), np.empty_like(g)
    for a in range(2):
        for b in range(2):
            g[..., a, b] = inner(P[a], P[b], j.value)
            dgu[..., a, b] = inner(PP[(0, a)], P[b], j.value) + inner(P[a], PP[(0, b)], j.value)
            dgv[..., a, b] = inner(PP[(1, a)], P[b], j.value) + inner(P[a], PP[(1, b)], j.value)
    return g, dgu, dgv, j.value


def _gaussian_curvature(fn, inner, u, v, step, outer, dinner=None):
    """K = <R(d_u, d_v) d_v, d_u> / det g from finite differences of Christoffel symbols.

    ``inner(a, b, value)`` evaluates the ambient metric at the point ``value``;
    ``dinner(a, b, value, dvalue)`` is the derivative of the metric's point
    dependence along ``dvalue`` (zero for constant ambient metrics).
    """

    def gamma(uu, vv):
        g, dgu, dgv, val = _metric_and_partials(fn, inner, uu, vv, step)
        if dinner is not None:
            j = jet1(fn, uu, vv, step)
            P = (j.d_u, j.d_v)
            for a in range(2):
                for b in range(2):
                    dgu[..., a, b] += dinner(P[a], P[b], val, j.d_u)
                    dgv[..., a, b] += dinner(P[a], P[b], val, j.d_v)
        G = _christoffel(g, dgu, dgv)
        return G.reshape(G.shape[:-3] + (8,))

    G0f, Guf, Gvf = field_partials(gamma, u, v, outer)
    shp = G0f.shape[:-1] + (2, 2, 2)
    G0, dG = G0f.reshape(shp), (Guf.reshape(shp), Gvf.reshape(shp))
    g, *_ = _metric_and_partials(fn, inner, u, v, step)
    # R^l_{122} = d_1 G^l_22 - d_2 G^l_12 + G^l_1m G^m_22 - G^l_2m G^m_12
    R = (
        dG[0][..., :, 1, 1]
        - dG[1][..., :, 0, 1]
        + np.einsum("...lm,...m->...l", G0[..., :, 0, :], G0[..., :, 1, 1])
        - np.einsum("...lm,...m->...l", G0[..., :, 1, :], G0[..., :, 0, 1])
    )
    num = np.einsum("...l,...l->...", g[..., :, 0], R)
    det = np.linalg.det(g)
    if np.any(np.abs(det) < DEGENERATE_TOL):
        raise GeometryError("degenerate metric in Gaussian curvature")
    return num / det


def gaussian_curvature(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP, outer: float = 1e-2):
    """Intrinsic Gaussian curvature of the surface in the space-time."""
    w, m = chart.warping, chart.model

    def inner(a, b, val):
        return metric(a, b, val[..., -1], w, m)

    def dinner(a, b, val, dval):
        z, dz = val[..., -1], dval[..., -1]
        f = w.value(z)
        return 2 * f * w.d1(z) * dz * m.inner(a[..., :-1], b[..., :-1])

    return _gaussian_curvature(chart, inner, u, v, step, outer, dinner)


def generator_gaussian_curvature(
    fn: Callable, m: SpaceFormModel, u, v, step: float = DEFAULT_STEP, outer: float = 1e-2
):
    """Gaussian curvature of a surface x(u, v) in the model (metric g_c)."""
    return _gaussian_curvature(fn, lambda a, b, val: m.inner(a, b), u, v, step, outer)


def base_shape_operator(fn: Callable, m: SpaceFormModel, u, v, step: float = DEFAULT_STEP):
    """Shape operator of a time-like surface x(u, v) in the model.

    Returns ``(S, N)`` with ``S`` over the coordinate basis {d_u, d_v} (column
    j = image of the j-th coordinate vector) and ``N`` the unit normal
    (orientation: generalised cross product of the lowered rows).
    """
    j = jet2(fn, u, v, step)
    diag = m.signature.diag
    rows = [j.d_u * diag, j.d_v * diag]
    if m.c != 0:
        rows.append(j.value * diag)
    N = _generalized_cross(np.stack(rows, -2))
    N = N / np.sqrt(np.abs(m.inner(N, N)))[..., None]
    ip = m.inner
    g = np.stack(
        [np.stack([ip(j.d_u, j.d_u), ip(j.d_u, j.d_v)], -1), np.stack([ip(j.d_u, j.d_v), ip(j.d_v, j.d_v)], -1)],
        -2,
    )
    II = np.stack(
        [np.stack([ip(j.d_uu, N), ip(j.d_uv, N)], -1), np.stack([ip(j.d_uv, N), ip(j.d_vv, N)], -1)], -2
    )
    return np.linalg.solve(g, II), N


# ---------------------------------------------------------------------------
# frame-field derivatives


def _frame_fields(chart: SurfaceChart, step: float):
    def fields(uu, vv):
        loc = _local(chart, uu, vv, order=1, step=step)
        fr = _frame(loc, chart, check=False)
        return np.concatenate([fr.T, fr.U, fr.e3, fr.e4], -1)

    return fields


def covariant_derivatives(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP, outer: float = 1e-2):
    """Space-time covariant derivatives of the frame fields along d_u and d_v.

    Returns ``(loc, frame, nabla)`` where ``nabla[i][name]`` is the covariant
    derivative of frame field ``name`` along the i-th coordinate vector.
    """
    w, m = chart.warping, chart.model
    n1 = m.dim + 1
    val, du, dv = field_partials(_frame_fields(chart, step), u, v, outer)
    loc = _local(chart, u, v, order=1, step=step)
    frame = _frame(loc, chart)
    names = ("T", "U", "e3", "e4")
    nabla = []
    for X, dF in ((loc.d_u, du), (loc.d_v, dv)):
        out = {}
        for k, name in enumerate(names):
            Y = val[..., k * n1 : (k + 1) * n1]
            dY = dF[..., k * n1 : (k + 1) * n1]
            out[name] = connection(loc.x, loc.z, X, Y, dY, w, m)
        nabla.append(out)
    return loc, frame, nabla


def normal_connection_form(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP, outer: float = 1e-2):
    """omega_i = <nabla_{d_i} e3, e4> for i = u, v."""
    loc, frame, nabla = covariant_derivatives(chart, u, v, step, outer)
    w, m = chart.warping, chart.model
    return np.stack([metric(nabla[i]["e3"], frame.e4, loc.z, w, m) for i in range(2)], -1)


def normal_curvature(chart: SurfaceChart, u, v, step: float = DEFAULT_STEP, outer: float = 1e-2):
    """<R_perp(T, U) e3, e4> from finite differences of the normal connection form."""

    def omega(uu, vv):
        return normal_connection_form(chart, uu, vv, step, outer)

    _, du, dv = field_partials(omega, u, v, outer)
    curl = du[..., 1] - dv[..., 0]
    frame = adapted_frame(chart, u, v, step)
    t, s = frame.t_coords, frame.u_coords
    return curl * (t[..., 0] * s[..., 1] - t[..., 1] * s[..., 0])
