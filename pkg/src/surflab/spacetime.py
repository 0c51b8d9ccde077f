"""The static space-time  L^3_1(c) x_f I  with metric  f(z)^2 g_c + dz^2.

Points are pairs ``(x, z)`` with ``x`` on the space-form model.  Tangent
vectors are arrays of length ``dim + 1``: the first ``dim`` entries are the
fiber part (an ambient vector tangent to the model), the last entry is the
``dz`` component.  All routines broadcast over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exprlang
from .exprlang import Expr
from .numkit import DomainError, gauss_legendre, quad
from .spaceforms import SpaceFormModel, spaceform_curvature, tangent_projection

__all__ = [
    "ConfigError",
    "F",
    "F_adaptive",
    "SpacetimePoint",
    "SpacetimeVector",
    "Warping",
    "christoffel_fd",
    "connection",
    "coordinate_chart",
    "curvature",
    "curvature_fd",
    "curvature_tensor_fd",
    "d_dz",
    "fiber_curvature",
    "join",
    "metric",
    "split",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Warping:
    """Warping function f on the interval I, with its derivatives and F."""

    f: Expr
    interval: tuple[float, float] = (-1.0, 1.0)
    z0: float = 0.0
    fp: Expr = field(init=False, compare=False)
    fpp: Expr = field(init=False, compare=False)
    _fast: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        f = exprlang.as_expr(self.f, "z")
        object.__setattr__(self, "f", f)
        lo, hi = map(float, self.interval)
        object.__setattr__(self, "interval", (lo, hi))
        if not lo < hi:
            raise ConfigError(f"empty interval {self.interval}")
        if not lo <= self.z0 <= hi:
            raise ConfigError(f"z0={self.z0} outside I={self.interval}")
        fp = exprlang.differentiate(f, "z")
        object.__setattr__(self, "fp", fp)
        object.__setattr__(self, "fpp", exprlang.differentiate(fp, "z"))
        object.__setattr__(self, "_fast", tuple(exprlang.compile(e) for e in (f, fp, self.fpp)))
        samples = np.linspace(lo, hi, 1024)
        try:
            vals = _const_eval(f, samples)
        except exprlang.EvaluationError as exc:
            raise ConfigError(f"warping function not evaluable on I: {exc}") from None
        if np.any(vals <= 0):
            raise ConfigError(f"warping function {f} is not positive on I={self.interval}")

    @classmethod
    def from_text(cls, text="exp(z)", interval=(-1.0, 1.0), z0=0.0) -> Warping:
        return cls(exprlang.as_expr(text, "z"), tuple(interval), float(z0))

    def value(self, z):
        return _fast_eval(self._fast[0], z)

    def d1(self, z):
        return _fast_eval(self._fast[1], z)

    def d2(self, z):
        return _fast_eval(self._fast[2], z)

    def log_derivative(self, z):
        return self.d1(z) / self.value(z)

    def antiderivative(self, z):
        """F without the interval check (used inside stencils near the edge of I)."""
        return gauss_legendre(lambda s: 1.0 / self.value(s), self.z0, z)

    def contains(self, z) -> bool:
        lo, hi = self.interval
        z = np.asarray(z)
        return bool(np.all((z >= lo) & (z <= hi)))


def _const_eval(e: Expr, z):
    z = np.asarray(z, dtype=float)
    out = np.asarray(exprlang.evaluate(e, z), dtype=float)
    return np.broadcast_to(out, z.shape).copy() if out.shape != z.shape else out


def _fast_eval(fn, z):
    out = fn(z)
    return out if isinstance(out, np.ndarray) and out.flags.writeable else np.array(out, dtype=float)


def F(z, w: Warping):
    """F(z) = integral of 1/f from z0 to z."""
    if not w.contains(z):
        raise DomainError(f"z={z} outside I={w.interval}")
    return w.antiderivative(z)


def F_adaptive(z: float, w: Warping) -> float:
    """Scalar F via adaptive Simpson; independent check of :func:`F`."""
    if not w.contains(z):
        raise DomainError(f"z={z} outside I={w.interval}")
    return quad(lambda s: 1.0 / float(w.value(s)), w.z0, float(z))


@dataclass(frozen=True)
class SpacetimePoint:
    base: np.ndarray
    z: float


@dataclass(frozen=True)
class SpacetimeVector:
    bar: np.ndarray
    x4: float

    @property
    def array(self) -> np.ndarray:
        return join(self.bar, self.x4)


def split(X):
    """Fiber part and dz component of a tangent vector."""
    X = np.asarray(X, dtype=float)
    return X[..., :-1], X[..., -1]


def join(bar, x4):
    bar = np.asarray(bar, dtype=float)
    x4 = np.asarray(x4, dtype=float)
    return np.concatenate([bar, x4[..., None] * np.ones(bar.shape[:-1] + (1,))], axis=-1)


def d_dz(m: SpaceFormModel, shape=()) -> np.ndarray:
    out = np.zeros(tuple(shape) + (m.dim + 1,))
    out[..., -1] = 1.0
    return out


def metric(X, Y, z, w: Warping, m: SpaceFormModel):
    """f(z)^2 g_c(Xbar, Ybar) + X4 Y4."""
    Xb, X4 = split(X)
    Yb, Y4 = split(Y)
    return w.value(z) ** 2 * m.inner(Xb, Yb) + X4 * Y4


def connection(x, z, X, Y, dY, w: Warping, m: SpaceFormModel):
    """Covariant derivative of a vector field Y along X.

    ``dY`` is the ordinary derivative of Y's components along X (Y is given as
    a field along a curve or chart).  The product connection acts on the fiber
    part through the model's Gauss formula; the warping adds
    ``(f'/f) (X4 Ybar + Y4 Xbar, -<Xbar, Ybar>)`` with <,> the space-time
    metric restricted to fiber vectors.
    """
    x = np.asarray(x, dtype=float)
    Xb, X4 = split(X)
    Yb, Y4 = split(Y)
    dYb, dY4 = split(dY)
    fiber = dYb
    if m.c != 0:
        fiber = dYb + m.c * m.inner(Xb, Yb)[..., None] * x
    ratio = np.asarray(w.log_derivative(z))
    fz = w.value(z)
    fiber = fiber + ratio[..., None] * (X4[..., None] * Yb + Y4[..., None] * Xb)
    vert = dY4 - ratio * fz**2 * m.inner(Xb, Yb)
    return join(fiber, vert)


def curvature(x, z, X, Y, Z, w: Warping, m: SpaceFormModel):
    """Closed-form R(X,Y)Z, with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].

    Fiber planes have sectional curvature (c - f'^2)/f^2, planes containing
    d/dz have -f''/f, and mixed components R(Xbar,Ybar)d/dz vanish.
    """
    Xb, X4 = split(X)
    Yb, Y4 = split(Y)
    Zb, Z4 = split(Z)
    f = w.value(z)
    k_fiber = (m.c - w.d1(z) ** 2) / f**2
    k_mixed = -w.d2(z) / f
    yz = f**2 * m.inner(Yb, Zb)
    xz = f**2 * m.inner(Xb, Zb)
    fib = k_fiber[..., None] * (yz[..., None] * Xb - xz[..., None] * Yb) + k_mixed[..., None] * (
        (Y4 * Z4)[..., None] * Xb - (X4 * Z4)[..., None] * Yb
    )
    vert = k_mixed * (yz * X4 - xz * Y4)
    return join(fib, vert)


def fiber_curvature(X, Y, Z, m: SpaceFormModel):
    """Curvature of the model alone, exposed for comparison tests."""
    return spaceform_curvature(X, Y, Z, m)


# ---------------------------------------------------------------------------
# finite-difference route


def _tangent_basis(x, m: SpaceFormModel):
    """Three ambient vectors spanning the tangent space of the model at x."""
    x = np.asarray(x, dtype=float)
    eye = np.eye(m.dim)
    cands = np.stack([tangent_projection(x, eye[i], m) for i in range(m.dim)])
    # Euclidean-orthonormal span keeps the chart well conditioned far from the origin
    _, _, vt = np.linalg.svd(cands)
    return vt[:3]


def coordinate_chart(x0, z0, m: SpaceFormModel):
    """Local coordinates (y1, y2, y3, s) of the space-time around (x0, z0)."""
    x0 = np.asarray(x0, dtype=float)
    basis = _tangent_basis(x0, m)

    def psi(y):
        y = np.asarray(y, dtype=float)
        q = x0 + y[..., :3] @ basis
        if m.c != 0:
            q = q / np.sqrt(m.c * m.inner(q, q))[..., None]
        return q, z0 + y[..., 3]

    return psi


_W4 = np.array([8.0, -8.0, -1.0, 1.0]) / 12.0
_K4 = np.array([1.0, -1.0, 2.0, -2.0])


def _grad(fn, y, h):
    """Richardson central-difference partials of fn along each of the 4 axes.

    ``y`` has shape (..., 4); the result has shape (..., 4, *out) with the
    axis index first after the batch axes.  fn is called once on the stacked
    stencil.
    """
    y = np.asarray(y, dtype=float)
    offs = h * _K4[:, None, None] * np.eye(4)[None, :, :]  # (4 offsets, 4 axes, 4)
    vals = fn(y[..., None, None, :] + offs)  # (..., 4, 4, *out)
    vals = np.moveaxis(vals, y.ndim - 1, -1)  # offsets last
    out = vals @ _W4 / h  # (..., 4 axes, *out)
    return out


def christoffel_fd(x0, z0, w: Warping, m: SpaceFormModel, step: float = 1e-3):
    """Christoffel symbols of the coordinate chart, built from :func:`connection`.

    Returns ``(psi, embed, gamma)``; ``gamma(y)`` maps points of shape
    (..., 4) to arrays (..., 4, 4, 4) with ``[c, a, b]`` the component along
    d_c of nabla_{d_a} d_b.
    """
    psi = coordinate_chart(x0, z0, m)

    def embed(y):
        q, s = psi(y)
        return np.concatenate([q, np.asarray(s)[..., None]], -1)

    def gamma(y):
        y = np.asarray(y, dtype=float)
        pt = embed(y)
        x, z = pt[..., :-1], pt[..., -1]
        d1 = _grad(embed, y, step)  # (..., a, n+1)
        d2 = _grad(lambda yy: _grad(embed, yy, step), y, step)  # (..., b, a, n+1) = d_b d_a embed
        za = z[..., None, None]
        G = metric(d1[..., :, None, :], d1[..., None, :, :], za, w, m)
        Ginv = np.linalg.inv(G)
        nab = connection(
            x[..., None, None, :], za, d1[..., :, None, :], d1[..., None, :, :], np.swapaxes(d2, -2, -3), w, m
        )  # (..., a, b, n+1)
        low = metric(nab[..., None, :, :, :], d1[..., :, None, None, :], z[..., None, None, None], w, m)
        return np.einsum("...cd,...dab->...cab", Ginv, low)

    return psi, embed, gamma


def curvature_tensor_fd(x, z, w: Warping, m: SpaceFormModel, step: float = 1e-3, outer: float = 1e-2):
    """Components R^d_{abc} in the normalized chart at (x, z), plus the chart Jacobian.

    Independent of :func:`curvature`: it only uses the connection formula.
    """
    _psi, embed, gamma = christoffel_fd(x, z, w, m, step)
    y0 = np.zeros(4)
    J = _grad(embed, y0, step)  # rows: d_a embed
    G0 = gamma(y0)
    dG = _grad(gamma, y0, outer)  # dG[e, c, a, b] = d_e Gamma^c_ab
    # R^d_{abc} = d_a G^d_bc - d_b G^d_ac + G^d_ae G^e_bc - G^d_be G^e_ac
    R = (
        np.einsum("adbc->dabc", dG)
        - np.einsum("bdac->dabc", dG)
        + np.einsum("dae,ebc->dabc", G0, G0)
        - np.einsum("dbe,eac->dabc", G0, G0)
    )
    return R, J


def curvature_fd(x, z, X, Y, Z, w: Warping, m: SpaceFormModel, step: float = 1e-3, outer: float = 1e-2):
    """R(X,Y)Z from finite differences of the Christoffel symbols at a single point.

    X, Y, Z may carry leading batch axes (many vector triples at one point).
    """
    R, J = curvature_tensor_fd(x, z, w, m, step, outer)
    pinv = np.linalg.pinv(J.T)  # coordinates of tangent vectors

    def coords(V):
        return np.asarray(V, dtype=float) @ pinv.T

    comp = np.einsum("dabc,...a,...b,...c->...d", R, coords(X), coords(Y), coords(Z))
    return comp @ J
