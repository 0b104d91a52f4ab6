"""Prescribed-curvature data and ambient scalar fields.

Curvature prescriptions expose values and height derivatives at surface
points.  Ambient fields expose Euclidean partial derivatives up to second
order at ambient points; model-specific covariant corrections are applied
by the geometry layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConstantField:
    """Height-independent constant curvature prescription."""

    value_const: float

    def value(self, x, y, height):
        return np.full(np.broadcast(x, y, height).shape, float(self.value_const))

    def d_height(self, x, y, height):
        return np.zeros(np.broadcast(x, y, height).shape)


@dataclass(frozen=True)
class AffineField:
    """Curvature prescription affine in position and height."""

    c0: float
    cx: float = 0.0
    cy: float = 0.0
    ch: float = 0.0

    def value(self, x, y, height):
        return self.c0 + self.cx * np.asarray(x) + self.cy * np.asarray(y) \
            + self.ch * np.asarray(height)

    def d_height(self, x, y, height):
        return np.full(np.broadcast(x, y, height).shape, float(self.ch))


class NodalField:
    """Curvature prescription given per interior node, height independent."""

    def __init__(self, values: np.ndarray):
        self.values = np.asarray(values, dtype=float)

    def value(self, x, y, height):
        return self.values

    def d_height(self, x, y, height):
        return np.zeros_like(self.values)


class BlendField:
    """Convex combination (1 - t) kappa0 + t kappa1 of two prescriptions."""

    def __init__(self, kappa0, kappa1, t: float):
        self.kappa0, self.kappa1, self.t = kappa0, kappa1, float(t)

    def value(self, x, y, height):
        return (1.0 - self.t) * self.kappa0.value(x, y, height) \
            + self.t * self.kappa1.value(x, y, height)

    def d_height(self, x, y, height):
        return (1.0 - self.t) * self.kappa0.d_height(x, y, height) \
            + self.t * self.kappa1.d_height(x, y, height)


@dataclass(frozen=True)
class LinearAmbientField:
    """Ambient field a . P + b with constant Euclidean gradient."""

    a: tuple
    b: float = 0.0

    def value(self, points):
        return np.asarray(points) @ np.asarray(self.a, dtype=float) + self.b

    def gradient(self, points):
        pts = np.asarray(points)
        return np.broadcast_to(np.asarray(self.a, dtype=float),
                               pts.shape).copy()

    def hessian(self, points):
        pts = np.asarray(points)
        return np.zeros(pts.shape[:-1] + (3, 3))


@dataclass(frozen=True)
class EuclideanDistanceField:
    """Euclidean distance to a base point."""

    base: tuple

    def value(self, points):
        rel = np.asarray(points) - np.asarray(self.base, dtype=float)
        return np.linalg.norm(rel, axis=-1)

    def gradient(self, points):
        rel = np.asarray(points) - np.asarray(self.base, dtype=float)
        return rel / np.linalg.norm(rel, axis=-1, keepdims=True)

    def hessian(self, points):
        rel = np.asarray(points) - np.asarray(self.base, dtype=float)
        r = np.linalg.norm(rel, axis=-1)
        eye = np.eye(rel.shape[-1])
        outer = rel[..., :, None] * rel[..., None, :]
        return (eye - outer / (r ** 2)[..., None, None]) / r[..., None, None]


@dataclass(frozen=True)
class HyperbolicDistanceField:
    """Hyperbolic distance to a base point in the upper half space.

    With q = |P - P0|^2 the distance is arccosh(1 + q / (2 h h0)) where h
    and h0 are the heights of P and the base point.
    """

    base: tuple

    def _parts(self, points):
        pts = np.asarray(points, dtype=float)
        base = np.asarray(self.base, dtype=float)
        rel = pts - base
        q = np.sum(rel ** 2, axis=-1)
        h = pts[..., -1]
        h0 = base[-1]
        c = 1.0 + q / (2.0 * h * h0)
        return pts, base, rel, q, h, h0, c

    def value(self, points):
        c = self._parts(points)[-1]
        return np.arccosh(c)

    def _c_derivatives(self, points):
        pts, base, rel, q, h, h0, c = self._parts(points)
        vert = np.zeros(pts.shape[-1])
        vert[-1] = 1.0
        ci = rel / (h * h0)[..., None] \
            - vert * (q / (2.0 * h ** 2 * h0))[..., None]
        eye = np.eye(pts.shape[-1])
        cij = eye / (h * h0)[..., None, None]
        cross = rel[..., :, None] * vert[None, :] / (h ** 2 * h0)[..., None, None]
        cij = cij - cross - np.swapaxes(cross, -1, -2)
        cij = cij + (vert[:, None] * vert[None, :]) \
            * (q / (h ** 3 * h0))[..., None, None]
        return c, ci, cij

    def gradient(self, points):
        c, ci, _ = self._c_derivatives(points)
        s = np.sqrt(c ** 2 - 1.0)
        return ci / s[..., None]

    def hessian(self, points):
        c, ci, cij = self._c_derivatives(points)
        s2 = c ** 2 - 1.0
        s = np.sqrt(s2)
        outer = ci[..., :, None] * ci[..., None, :]
        return cij / s[..., None, None] \
            - outer * (c / (s2 * s))[..., None, None]
