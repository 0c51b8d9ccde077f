"""Small signature-aware linear algebra and numerical calculus.

Everything here is vectorised over leading axes: a "vector" is the last axis
of an array, so a grid of vectors is simply an array of shape ``(..., n)``.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "AmbientVector",
    "DimensionError",
    "DivergenceError",
    "DomainError",
    "Jet1",
    "Jet2",
    "NodalFlow",
    "NumericError",
    "Signature",
    "field_partials",
    "gauss_legendre",
    "inner",
    "inner_arrays",
    "integrate_ode",
    "jet1",
    "jet2",
    "quad",
    "rk4_endpoint",
]


class DimensionError(ValueError):
    """Raised when vectors of incompatible signatures are combined."""


class NumericError(ArithmeticError):
    """Raised when a function evaluates to a non-finite value."""


class DivergenceError(NumericError):
    """Raised when an ODE solution blows up; ``time`` is the first bad sample."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class DomainError(ValueError):
    """Raised when an argument lies outside the admissible domain."""


class Signature(NamedTuple):
    """Counts of minus and plus signs of a flat metric, minus signs first."""

    negatives: int
    positives: int

    @property
    def dim(self) -> int:
        return self.negatives + self.positives

    @property
    def diag(self) -> np.ndarray:
        return np.array([-1.0] * self.negatives + [1.0] * self.positives)

    def validate(self) -> Signature:
        if self.negatives < 0 or self.positives < 0 or self.dim not in (2, 3, 4, 5):
            raise DimensionError(f"unsupported signature {tuple(self)}")
        return self


@dataclass(frozen=True)
class AmbientVector:
    """Coordinates in a flat semi-Euclidean space together with its signature."""

    coords: np.ndarray
    signature: Signature

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        self.signature.validate()
        if coords.shape[-1:] != (self.signature.dim,):
            raise DimensionError(
                f"vector of length {coords.shape[-1:]} does not match signature {tuple(self.signature)}"
            )
        object.__setattr__(self, "coords", coords)

    def __add__(self, other: AmbientVector) -> AmbientVector:
        _check_same(self, other)
        return AmbientVector(self.coords + other.coords, self.signature)

    def __sub__(self, other: AmbientVector) -> AmbientVector:
        _check_same(self, other)
        return AmbientVector(self.coords - other.coords, self.signature)

    def __mul__(self, s: float) -> AmbientVector:
        return AmbientVector(self.coords * s, self.signature)

    __rmul__ = __mul__


def _check_same(a: AmbientVector, b: AmbientVector) -> None:
    if a.signature != b.signature or a.coords.shape[-1] != b.coords.shape[-1]:
        raise DimensionError(f"signature mismatch: {tuple(a.signature)} vs {tuple(b.signature)}")


def inner_arrays(a, b, negatives: int) -> np.ndarray:
    """Flat inner product over the last axis with ``negatives`` leading minus signs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"length mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    prod = a * b
    return prod[..., negatives:].sum(axis=-1) - prod[..., :negatives].sum(axis=-1)


def inner(u: AmbientVector, v: AmbientVector):
    """Semi-Euclidean inner product of two ambient vectors."""
    _check_same(u, v)
    val = inner_arrays(u.coords, v.coords, u.signature.negatives)
    return float(val) if np.ndim(val) == 0 else val


# ---------------------------------------------------------------------------
# finite differences


@dataclass(frozen=True)
class Jet1:
    value: np.ndarray
    d_u: np.ndarray
    d_v: np.ndarray


@dataclass(frozen=True)
class Jet2:
    """Value, first and second partials of a map of two variables.

    The mixed partial is stored once, so symmetry holds by construction.
    """

    value: np.ndarray
    d_u: np.ndarray
    d_v: np.ndarray
    d_uu: np.ndarray
    d_uv: np.ndarray
    d_vv: np.ndarray


DEFAULT_STEP = 2e-3

# (du, dv) offsets in units of the step; 3x3 stencil at scales 1 and 2
_OFFSETS_2 = [(0, 0)] + [
    (s * i, s * j) for s in (1, 2) for i in (-1, 0, 1) for j in (-1, 0, 1) if (i, j) != (0, 0)
]
_INDEX_2 = {o: k for k, o in enumerate(_OFFSETS_2)}
_OFFSETS_1 = [(0, 0), (1, 0), (-1, 0), (2, 0), (-2, 0), (0, 1), (0, -1), (0, 2), (0, -2)]
_INDEX_1 = {o: k for k, o in enumerate(_OFFSETS_1)}


def _evaluate_stencil(fn, u, v, h, offsets):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    h = np.asarray(h, dtype=float) * np.maximum(1.0, np.maximum(np.abs(u), np.abs(v)))
    du = np.array([o[0] for o in offsets], dtype=float).reshape((-1,) + (1,) * u.ndim)
    dv = np.array([o[1] for o in offsets], dtype=float).reshape((-1,) + (1,) * u.ndim)
    vals = np.asarray(fn(u + du * h, v + dv * h), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals.reshape(len(offsets), -1)))[0]
        off = offsets[bad[0]]
        raise NumericError(f"non-finite evaluation at stencil offset {off} (step units)")
    # broadcast step against trailing value axes
    extra = vals.ndim - 1 - u.ndim
    hh = h.reshape(h.shape + (1,) * extra)
    return vals, hh


def _richardson_first(fp1, fm1, fp2, fm2, h):
    d1 = (fp1 - fm1) / (2 * h)
    d2 = (fp2 - fm2) / (4 * h)
    return (4 * d1 - d2) / 3


def jet1(fn: Callable, u, v, step: float = DEFAULT_STEP) -> Jet1:
    """Value and first partials of ``fn(u, v)`` (vectorised) by Richardson-extrapolated central differences."""
    vals, h = _evaluate_stencil(fn, u, v, step, _OFFSETS_1)
    g = lambda i, j: vals[_INDEX_1[(i, j)]]
    d_u = _richardson_first(g(1, 0), g(-1, 0), g(2, 0), g(-2, 0), h)
    d_v = _richardson_first(g(0, 1), g(0, -1), g(0, 2), g(0, -2), h)
    return Jet1(vals[0], d_u, d_v)


def jet2(fn: Callable, u, v, step: float = DEFAULT_STEP) -> Jet2:
    """Value, first and second partials of ``fn(u, v)``.

    Central differences on 3x3 stencils at steps ``h`` and ``2h``, combined by
    one Richardson level; truncation error is O(h^4) for every entry.
    ``fn`` must accept broadcast arrays ``u, v`` and return an array whose
    leading axes match them (trailing axes are vector components).
    """
    if step <= 0:
        raise DomainError("step must be positive")
    vals, h = _evaluate_stencil(fn, u, v, step, _OFFSETS_2)
    g = lambda i, j: vals[_INDEX_2[(i, j)]]
    f0 = g(0, 0)
    d_u = _richardson_first(g(1, 0), g(-1, 0), g(2, 0), g(-2, 0), h)
    d_v = _richardson_first(g(0, 1), g(0, -1), g(0, 2), g(0, -2), h)

    def second(i, j, s):
        return (g(s * i, s * j) - 2 * f0 + g(-s * i, -s * j)) / (s * h) ** 2

    d_uu = (4 * second(1, 0, 1) - second(1, 0, 2)) / 3
    d_vv = (4 * second(0, 1, 1) - second(0, 1, 2)) / 3

    def mixed(s):
        return (g(s, s) - g(s, -s) - g(-s, s) + g(-s, -s)) / (4 * (s * h) ** 2)

    d_uv = (4 * mixed(1) - mixed(2)) / 3
    return Jet2(f0, d_u, d_v, d_uu, d_uv, d_vv)


def field_partials(fn: Callable, u, v, step: float = 1e-2):
    """Partials (d_u, d_v) of a derived field that is itself computed numerically.

    Uses a larger default step than :func:`jet2` because the field values carry
    their own finite-difference noise.
    """
    j = jet1(fn, u, v, step)
    return j.value, j.d_u, j.d_v


# ---------------------------------------------------------------------------
# ODEs


def _rk4_step(rhs, t, y, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + dt / 2, y + dt / 2 * k1)
    k3 = rhs(t + dt / 2, y + dt / 2 * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_ode(rhs: Callable, init, span, step: float):
    """Classical fixed-step RK4 on ``span = (t0, t1)``.

    The step is shrunk to divide the interval evenly.  Returns ``(t, y)`` with
    ``y[k]`` the state at ``t[k]``.
    """
    if step <= 0:
        raise DomainError("step must be positive")
    t0, t1 = float(span[0]), float(span[1])
    n = max(1, math.ceil(abs(t1 - t0) / step - 1e-9))
    dt = (t1 - t0) / n
    y = np.array(init, dtype=float)
    ts = t0 + dt * np.arange(n + 1)
    out = np.empty((n + 1,) + y.shape)
    out[0] = y
    for k in range(n):
        with np.errstate(over="ignore", invalid="ignore"):
            y = _rk4_step(rhs, ts[k], y, dt)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"solution diverged near t={ts[k + 1]:.6g}", ts[k + 1])
        out[k + 1] = y
    return ts, out


def rk4_endpoint(rhs: Callable, y0, t0, t1, n_steps: int):
    """Integrate from ``t0`` to each ``t1`` using exactly ``n_steps`` RK4 steps.

    ``t1`` is an array; every element gets its own step ``(t1 - t0)/n_steps``
    so the result is a smooth function of ``t1`` (finite differences of it stay
    clean).  ``y0`` has shape ``t1.shape + (d,)``.  Non-finite results are
    returned as NaN for the caller to report.
    """
    t1 = np.asarray(t1, dtype=float)
    t = np.array(np.broadcast_to(np.asarray(t0, dtype=float), t1.shape))
    dt = (t1 - t) / n_steps
    dtv = dt[..., None]
    y = np.array(np.broadcast_to(y0, t1.shape + np.shape(y0)[-1:]), dtype=float)
    with np.errstate(all="ignore"):
        for _ in range(n_steps):
            k1 = rhs(t, y)
            k2 = rhs(t + dt / 2, y + dtv / 2 * k1)
            k3 = rhs(t + dt / 2, y + dtv / 2 * k2)
            k4 = rhs(t + dt, y + dtv * k3)
            y = y + dtv / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = t + dt
    return y


def _rk4_varstep(rhs: Callable, t, y, dt):
    """One RK4 step with an elementwise step size ``dt`` (shape of ``t``)."""
    dtv = dt[..., None]
    k1 = rhs(t, y)
    k2 = rhs(t + dt / 2, y + dtv / 2 * k1)
    k3 = rhs(t + dt / 2, y + dtv / 2 * k2)
    k4 = rhs(t + dt, y + dtv * k3)
    return y + dtv / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


class NodalFlow:
    """Solution of y' = rhs(t, y), y(t0) = y0, tabulated on the nodes t0 + k*step.

    The table covers ``span`` (plus a small pad for finite-difference
    stencils) in both directions from ``t0``.  Evaluation at any t takes one
    RK4 step from the nearest node, so it costs four right-hand-side calls and
    its error is the global RK4 error plus a local step of at most step/2.
    Switching nodes changes the value by a local truncation error only, which
    keeps the result smooth enough for nested finite differences.
    """

    def __init__(self, rhs: Callable, y0, t0: float, span, step: float, pad: float = 0.05):
        if step <= 0:
            raise DomainError("step must be positive")
        lo, hi = float(min(span)), float(max(span))
        margin = pad * (hi - lo) + 8 * step
        self.rhs, self.t0, self.step = rhs, float(t0), float(step)
        y0 = np.array(y0, dtype=float)
        n_fwd = max(1, math.ceil((max(hi, t0) + margin - t0) / step))
        n_bwd = max(1, math.ceil((t0 - min(lo, t0) + margin) / step))
        with np.errstate(all="ignore"):
            fwd = self._sweep(y0, n_fwd, step)
            bwd = self._sweep(y0, n_bwd, -step)
        self.nodes = np.concatenate([bwd[:0:-1], fwd])
        self.k0 = n_bwd

    def _sweep(self, y, n, h):
        out = np.empty((n + 1,) + y.shape)
        out[0] = y
        one = np.ones(())
        for k in range(n):
            y = _rk4_varstep(self.rhs, one * (self.t0 + k * h), y, one * h)
            out[k + 1] = y
        return out

    @property
    def t_nodes(self) -> np.ndarray:
        return self.t0 + self.step * (np.arange(len(self.nodes)) - self.k0)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = np.clip(np.rint((t - self.t0) / self.step), -self.k0, len(self.nodes) - 1 - self.k0).astype(int)
        tk = self.t0 + k * self.step
        with np.errstate(all="ignore"):
            return _rk4_varstep(self.rhs, tk, self.nodes[k + self.k0], t - tk)


# ---------------------------------------------------------------------------
# quadrature


def quad(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature of a scalar function to absolute tolerance ``tol``."""
    if a == b:
        return 0.0

    def ev(x):
        y = float(f(x))
        if not math.isfinite(y):
            raise NumericError(f"integrand not finite at {x}")
        return y

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6 * (fa + 4 * fm + fb)

    def recurse(lo, hi, fa, fm, fb, whole, eps, depth):
        mid = (lo + hi) / 2
        lm, rm = (lo + mid) / 2, (mid + hi) / 2
        flm, frm = ev(lm), ev(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        if depth >= max_depth or abs(left + right - whole) <= 15 * eps:
            return left + right + (left + right - whole) / 15
        return recurse(lo, mid, fa, flm, fm, left, eps / 2, depth + 1) + recurse(
            mid, hi, fm, frm, fb, right, eps / 2, depth + 1
        )

    fa, fb, fm = ev(a), ev(b), ev((a + b) / 2)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(f: Callable, a, b, nodes: int = 24, panels: int = 4) -> np.ndarray:
    """Composite Gauss-Legendre rule, vectorised over arrays of endpoints ``b``.

    The result is an analytic function of the endpoints, which keeps finite
    differences of integrals noise-free.
    """
    if nodes not in _GL_CACHE:
        _GL_CACHE[nodes] = np.polynomial.legendre.leggauss(nodes)
    x, w = _GL_CACHE[nodes]
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    total = np.zeros(a.shape)
    width = (b - a) / panels
    for p in range(panels):
        lo = a + p * width
        mid = lo + width / 2
        pts = mid[..., None] + (width / 2)[..., None] * x
        total = total + (width / 2) * np.sum(w * f(pts), axis=-1)
    return total
