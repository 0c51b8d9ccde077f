"""Lorentzian space forms of curvature c in {-1, 0, 1} as flat-space models.

* c = 0: Minkowski 3-space, signature (1, 2), no constraint;
* c = 1: de Sitter 3-space, the quadric <x, x> = 1 in signature (1, 3);
* c = -1: anti de Sitter 3-space, the quadric <x, x> = -1 in signature (2, 2).

Coordinates are ordered with the negative directions first, so the two
time-like axes of the anti de Sitter ambient are the first two coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import Signature, inner_arrays

__all__ = [
    "GeometryError",
    "SpaceFormModel",
    "check_membership",
    "model",
    "spaceform_connection",
    "spaceform_curvature",
    "tangent_projection",
]


class GeometryError(ValueError):
    """A geometric precondition (tangency, non-degeneracy, ...) failed."""


@dataclass(frozen=True)
class SpaceFormModel:
    c: int

    def __post_init__(self):
        if self.c not in (-1, 0, 1):
            raise ValueError(f"curvature must be -1, 0 or 1, got {self.c}")

    @property
    def signature(self) -> Signature:
        return {0: Signature(1, 2), 1: Signature(1, 3), -1: Signature(2, 2)}[self.c]

    @property
    def dim(self) -> int:
        return self.signature.dim

    @property
    def name(self) -> str:
        return {0: "E31", 1: "S31", -1: "H31"}[self.c]

    def inner(self, a, b):
        return inner_arrays(a, b, self.signature.negatives)


def model(c: int) -> SpaceFormModel:
    return SpaceFormModel(int(c))


def check_membership(x, m: SpaceFormModel, tol: float = 1e-9) -> bool:
    """True when every point of ``x`` (shape ``(..., dim)``) lies on the model."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != m.dim:
        raise GeometryError(f"point of length {x.shape[-1]} for model of dimension {m.dim}")
    if m.c == 0:
        return True
    return bool(np.all(np.abs(m.inner(x, x) - 1.0 / m.c) <= tol))


def membership_residual(x, m: SpaceFormModel) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if m.c == 0:
        return np.zeros(x.shape[:-1])
    return np.abs(m.inner(x, x) - 1.0 / m.c)


def _check_tangent(x, vecs, m, tol):
    if m.c == 0:
        return
    for w in vecs:
        if np.any(np.abs(m.inner(w, x)) > tol * (1 + np.abs(w).max(axis=-1))):
            raise GeometryError("vector is not tangent to the space form")


def spaceform_connection(flat_derivative, x, X, Y, m: SpaceFormModel, tol: float = 1e-8):
    """Levi-Civita derivative on the model from the flat ambient derivative.

    ``flat_derivative`` is D_X Y in the ambient flat space; the model's
    connection removes the component along the position vector:
    ``D_X Y + c <X, Y> x``.
    """
    flat_derivative = np.asarray(flat_derivative, dtype=float)
    if m.c == 0:
        return flat_derivative
    _check_tangent(x, (X, Y), m, tol)
    return flat_derivative + m.c * m.inner(X, Y)[..., None] * np.asarray(x, dtype=float)


def spaceform_curvature(X, Y, Z, m: SpaceFormModel):
    """R(X,Y)Z = c (<Y,Z> X - <X,Z> Y)."""
    X, Y, Z = (np.asarray(a, dtype=float) for a in (X, Y, Z))
    return m.c * (m.inner(Y, Z)[..., None] * X - m.inner(X, Z)[..., None] * Y)


def tangent_projection(x, w, m: SpaceFormModel):
    """Remove the component of ``w`` along the position vector (identity for c = 0)."""
    w = np.asarray(w, dtype=float)
    if m.c == 0:
        return w
    return w - (m.inner(w, x) * m.c)[..., None] * np.asarray(x, dtype=float)
