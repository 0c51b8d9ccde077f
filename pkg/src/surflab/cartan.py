"""Cartan frames along null curves and the null scrolls they generate.

The frame equations

    alpha' = A,  A' = a C,  B' = b C + c alpha,  C' = b A + a B

are integrated as flat ambient ODEs; the Gram relations of the frame and
the quadric constraint on alpha are first integrals of this flow.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from . import exprlang
from .numkit import NodalFlow, NumericError
from .spaceforms import SpaceFormModel

__all__ = [
    "CartanState",
    "FramePath",
    "IntegrationError",
    "canonical_initial_frame",
    "flat_bscroll_e31",
    "flat_nullscroll_h31",
    "frame_rhs",
    "gram_residuals",
    "integrate_cartan_frame",
    "null_scroll_chart",
    "state_from_scroll",
]


class IntegrationError(NumericError):
    pass


@dataclass(frozen=True)
class CartanState:
    alpha: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def pack(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.A, self.B, self.C], -1)

    @classmethod
    def unpack(cls, y) -> CartanState:
        y = np.asarray(y, dtype=float)
        n = y.shape[-1] // 4
        return cls(y[..., :n], y[..., n : 2 * n], y[..., 2 * n : 3 * n], y[..., 3 * n :])


def canonical_initial_frame(m: SpaceFormModel) -> CartanState:
    """A fixed frame satisfying every Gram relation exactly."""
    s = 1 / math.sqrt(2)
    if m.c == 0:
        return CartanState(np.zeros(3), np.array([s, s, 0.0]), np.array([s, -s, 0.0]), np.array([0.0, 0, 1]))
    if m.c == 1:
        # alpha on the unit quadric; the frame spans alpha's orthogonal complement
        return CartanState(
            np.array([0.0, 1, 0, 0]), np.array([s, 0, s, 0]), np.array([s, 0, -s, 0]), np.array([0.0, 0, 0, 1])
        )
    return CartanState(
        np.array([1.0, 0, 0, 0]), np.array([0, s, s, 0]), np.array([0, s, -s, 0]), np.array([0.0, 0, 0, 1])
    )


def gram_residuals(state: CartanState, m: SpaceFormModel) -> np.ndarray:
    """Absolute deviations of all Gram relations (shape (..., k))."""
    ip = m.inner
    al, A, B, C = state.alpha, state.A, state.B, state.C
    res = [ip(A, B) + 1, ip(C, C) - 1, ip(A, A), ip(B, B), ip(C, A), ip(C, B)]
    if m.c != 0:
        res += [ip(al, al) - 1 / m.c, ip(al, A), ip(al, B), ip(al, C)]
    return np.abs(np.stack(res, -1))


def frame_rhs(a: Callable, b: Callable, m: SpaceFormModel, speed: Callable | None = None):
    """Right-hand side of the frame equations in the curve parameter.

    With ``speed`` given, the independent variable is u and the curve
    parameter is U(u): a and b are then functions of u (already composed) and
    the derivative is scaled by speed(u) = U'(u).
    """
    c = m.c

    def rhs(t, y):
        n = y.shape[-1] // 4
        al, A, B, C = y[..., :n], y[..., n : 2 * n], y[..., 2 * n : 3 * n], y[..., 3 * n :]
        av = np.asarray(a(t), dtype=float)[..., None]
        bv = np.asarray(b(t), dtype=float)[..., None]
        out = np.concatenate([A, av * C, bv * C + c * al, bv * A + av * B], -1)
        if speed is not None:
            out = np.asarray(speed(t), dtype=float)[..., None] * out
        return out

    return rhs


def _const_fn(e):
    e = exprlang.as_expr(e, "U") if isinstance(e, str) else e
    if isinstance(e, exprlang.Expr):
        return exprlang.compile(e)
    if callable(e):
        return e
    return lambda t: np.full(np.shape(t), float(e))


@dataclass(frozen=True)
class FramePath:
    """Frame along a null curve, tabulated on RK4 nodes and re-evaluable anywhere.

    ``at(U)`` takes one RK4 step from the nearest node, so the result is a
    smooth function of U and can be differentiated by finite differences.
    """

    flow: NodalFlow
    model: SpaceFormModel
    init: CartanState

    @property
    def ts(self) -> np.ndarray:
        return self.flow.t_nodes

    def at(self, t) -> CartanState:
        y = self.flow(t)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("frame integration produced non-finite values")
        return CartanState.unpack(y)

    @property
    def sampled(self) -> CartanState:
        return CartanState.unpack(self.flow.nodes)

    def drift(self) -> float:
        return float(gram_residuals(self.sampled, self.model).max())


def integrate_cartan_frame(
    a,
    b,
    m: SpaceFormModel,
    init: CartanState | None = None,
    span=(0.0, 1.0),
    step: float = 1e-3,
    speed: Callable | None = None,
    drift_tol: float = 1e-6,
) -> FramePath:
    """Integrate the frame equations over ``span`` starting from ``init`` at span[0].

    ``a`` and ``b`` are expressions in U, callables or constants.
    """
    init = canonical_initial_frame(m) if init is None else init
    if gram_residuals(init, m).max() > 1e-10:
        raise IntegrationError("initial frame violates the Gram relations")
    rhs = frame_rhs(_const_fn(a), _const_fn(b), m, speed)
    flow = NodalFlow(lambda t, y: rhs(np.asarray(t), y), init.pack(), float(span[0]), span, step)
    if not np.all(np.isfinite(flow.nodes)):
        raise IntegrationError("frame integration diverged")
    path = FramePath(flow, m, init)
    d = path.drift()
    if d > drift_tol:
        raise IntegrationError(f"Gram relations drifted by {d:.3g}")
    return path


def null_scroll_chart(path: FramePath) -> Callable:
    """The map (U, V) -> alpha(U) + V B(U) into the model."""

    def phi(U, V):
        st = path.at(U)
        return st.alpha + np.asarray(V, dtype=float)[..., None] * st.B

    return phi


def flat_bscroll_e31(U, V):
    """The flat B-scroll of Minkowski 3-space (b = 0, a = 1)."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    s = 1 / (6 * math.sqrt(2))
    return np.stack([s * (U**3 + 6 * U + 6 * V), s * 3 * math.sqrt(2) * U**2, s * (U**3 - 6 * U + 6 * V)], -1)


def flat_nullscroll_h31(k: float) -> Callable:
    """The flat B-scroll of anti de Sitter space generated by a = -1/k^2, b = 1."""
    if k == 0:
        raise ValueError("k must be non-zero")
    r2 = math.sqrt(2)

    def phi(U, V):
        U, V = np.asarray(U), np.asarray(V)  # complex input allowed
        W = U - 2 * k * k * V
        cs, sn = np.cos(U / k), np.sin(U / k)
        return np.stack(
            [
                (W * cs - 2 * k * sn) / (2 * k),
                -((2 * k**3 + k) * cs + W * sn) / (2 * r2 * k * k),
                (k * (2 * k * k - 1) * cs - W * sn) / (2 * r2 * k * k),
                W * cs / (2 * k),
            ],
            -1,
        )

    return phi


def state_from_scroll(phi: Callable, m: SpaceFormModel, b0: float, h: float = 1e-20) -> CartanState:
    """Frame at U = 0 read off a closed-form scroll alpha(U) + V B(U).

    First derivatives use the complex step, so the state is exact to rounding;
    C follows from B' = b C + c alpha, so b must be non-zero.
    """
    if b0 == 0:
        raise ValueError("state_from_scroll needs b != 0")
    alpha = phi(np.array(0.0), np.array(0.0))
    B = phi(np.array(0.0), np.array(1.0)) - alpha
    ih = np.array(1j * h)
    A = np.imag(phi(ih, np.array(0.0))) / h
    dB = np.imag(phi(ih, np.array(1.0)) - phi(ih, np.array(0.0))) / h
    C = (dB - m.c * alpha) / b0
    return CartanState(alpha, A, B, C)
