"""Discrete planar domains with sparse derivative operators.

Rectangle grids carry explicit boundary nodes.  Disk domains use a masked
lattice; stencil arms that leave the disk are closed by one-dimensional
Lagrange extrapolation through the exact circle crossing, which keeps the
second-order accuracy of the interior stencils at the curved boundary.
Radial domains are one-dimensional profiles for rotationally symmetric
problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import GridError

# Crossings closer to the adjacent interior node than this fraction of a
# step would create ill-conditioned extrapolation weights; the node is
# dropped from the stencil instead.
BETA_MIN = 0.1
# Lattice nodes within this fraction of a step of the circle are excluded
# from the unknowns; their stencil references are closed through the exact
# circle crossing, which the margin keeps a bounded fraction of a step away
# from every remaining interior node.
SNAP_FRAC = 0.25
SNAP_REL = 1.0e-12
MAX_CLOSURE_POINTS = 4

AXIS_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))
DIAG_DIRECTIONS = ((1, 1), (-1, -1), (-1, 1), (1, -1))


def _lagrange_weights(points: Sequence[float], t: float) -> list[float]:
    weights = []
    for j, pj in enumerate(points):
        w = 1.0
        for l, pl in enumerate(points):
            if l != j:
                w *= (t - pl) / (pj - pl)
        weights.append(w)
    return weights


@dataclass
class DerivativeOperators:
    """First and second difference operators on a grid's interior nodes.

    Each derivative is ``matrix @ u + boundary_matrix @ g`` where ``u`` is
    the interior field and ``g`` holds boundary values at
    ``boundary_points``.
    """

    boundary_points: np.ndarray
    matrices: dict
    boundary_matrices: dict

    def boundary_values(self, fn) -> np.ndarray:
        if np.isscalar(fn):
            return np.full(self.boundary_points.shape[0], float(fn))
        return np.asarray(
            fn(self.boundary_points[:, 0], self.boundary_points[:, 1]),
            dtype=float)

    def derivative(self, name: str, u: np.ndarray, bvals: np.ndarray) -> np.ndarray:
        return self.matrices[name] @ u + self.boundary_matrices[name] @ bvals

    def jet(self, u: np.ndarray, bvals: np.ndarray):
        """Gradient (N, 2) and Hessian (N, 2, 2) of the interior field."""
        du = np.stack([self.derivative("dx", u, bvals),
                       self.derivative("dy", u, bvals)], axis=-1)
        hxx = self.derivative("dxx", u, bvals)
        hyy = self.derivative("dyy", u, bvals)
        hxy = self.derivative("dxy", u, bvals)
        hess = np.empty((u.shape[0], 2, 2))
        hess[:, 0, 0] = hxx
        hess[:, 1, 1] = hyy
        hess[:, 0, 1] = hess[:, 1, 0] = hxy
        return du, hess


@dataclass
class LineStencil:
    """One-sided sample set along a grid line ending at a boundary crossing."""

    crossing: np.ndarray
    direction: np.ndarray
    offsets: np.ndarray
    node_indices: np.ndarray
    step: float


class RectangleGrid:
    """Tensor lattice over an axis-aligned rectangle with boundary ring."""

    kind = "rectangle"

    def __init__(self, x0: float, x1: float, y0: float, y1: float,
                 nx: int, ny: int):
        if nx < 3 or ny < 3:
            raise GridError("rectangle grids need at least 3 nodes per side")
        if x1 <= x0 or y1 <= y0:
            raise GridError("rectangle extents must be increasing")
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1
        self.nx, self.ny = nx, ny
        self.hx = (x1 - x0) / (nx - 1)
        self.hy = (y1 - y0) / (ny - 1)
        self.h = max(self.hx, self.hy)
        xs = x0 + self.hx * np.arange(nx)
        ys = y0 + self.hy * np.arange(ny)
        self._xs, self._ys = xs, ys
        interior = []
        self._lattice_to_interior = -np.ones((nx, ny), dtype=int)
        for iy in range(1, ny - 1):
            for ix in range(1, nx - 1):
                self._lattice_to_interior[ix, iy] = len(interior)
                interior.append((xs[ix], ys[iy]))
        self.interior_points = np.array(interior)
        boundary = []
        self._lattice_to_boundary = -np.ones((nx, ny), dtype=int)
        for iy in range(ny):
            for ix in range(nx):
                if ix in (0, nx - 1) or iy in (0, ny - 1):
                    self._lattice_to_boundary[ix, iy] = len(boundary)
                    boundary.append((xs[ix], ys[iy]))
        self.boundary_points = np.array(boundary)
        self._ops_cache = None

    @property
    def interior_count(self) -> int:
        return self.interior_points.shape[0]

    def operators(self) -> DerivativeOperators:
        if self._ops_cache is not None:
            return self._ops_cache
        stencils = _stencil_table(self.hx, self.hy)
        builders = {name: _CooBuilder() for name in stencils}
        for iy in range(1, self.ny - 1):
            for ix in range(1, self.nx - 1):
                row = self._lattice_to_interior[ix, iy]
                for name, entries in stencils.items():
                    b = builders[name]
                    for (sx, sy), coeff in entries:
                        jx, jy = ix + sx, iy + sy
                        jint = self._lattice_to_interior[jx, jy]
                        if jint >= 0:
                            b.add_interior(row, jint, coeff)
                        else:
                            b.add_boundary(row, self._lattice_to_boundary[jx, jy],
                                           coeff)
        n = self.interior_count
        nb = self.boundary_points.shape[0]
        self._ops_cache = DerivativeOperators(
            boundary_points=self.boundary_points,
            matrices={k: b.interior_csr(n) for k, b in builders.items()},
            boundary_matrices={k: b.boundary_csr(n, nb) for k, b in builders.items()})
        return self._ops_cache


class DiskGrid:
    """Masked lattice over a disk with exact-crossing stencil closure."""

    kind = "disk"

    def __init__(self, radius: float, resolution: int, center=(0.0, 0.0)):
        if resolution < 7:
            raise GridError("disk grids need at least 7 nodes per side")
        if radius <= 0:
            raise GridError("disk radius must be positive")
        self.radius = float(radius)
        self.resolution = int(resolution)
        self.center = np.asarray(center, dtype=float)
        self.h = 2.0 * radius / (resolution - 1)
        coords = self.center[0] - radius + self.h * np.arange(resolution)
        ys = self.center[1] - radius + self.h * np.arange(resolution)
        self._xs, self._ys = coords, ys
        n = resolution
        self._lattice_to_interior = -np.ones((n, n), dtype=int)
        interior = []
        cutoff = radius - SNAP_FRAC * self.h
        for iy in range(n):
            for ix in range(n):
                p = np.array([coords[ix], ys[iy]])
                if np.linalg.norm(p - self.center) < cutoff:
                    self._lattice_to_interior[ix, iy] = len(interior)
                    interior.append(p)
        if not interior:
            raise GridError("disk mask contains no interior nodes")
        self.interior_points = np.array(interior)
        self._closure_cache: dict = {}
        self._crossing_registry: dict = {}
        self._crossing_points: list = []
        self._ops_cache = None

    @property
    def interior_count(self) -> int:
        return self.interior_points.shape[0]

    def _is_interior(self, ix: int, iy: int) -> bool:
        n = self.resolution
        return 0 <= ix < n and 0 <= iy < n and self._lattice_to_interior[ix, iy] >= 0

    def _crossing_beta(self, p: np.ndarray, v: np.ndarray) -> float:
        """Positive parameter where p + t v meets the circle.

        Masked lattice nodes may still lie inside the circle, so the
        crossing can sit beyond one step (t > 1); the boundary sample is
        always placed at the true circle point.
        """
        rel = p - self.center
        a = float(v @ v)
        b = float(rel @ v)
        c = float(rel @ rel) - self.radius ** 2
        disc = b * b - a * c
        t = (-b + math.sqrt(max(disc, 0.0))) / a
        return max(t, SNAP_REL)

    def _crossing_index(self, point: np.ndarray, key) -> int:
        if key not in self._crossing_registry:
            self._crossing_registry[key] = len(self._crossing_points)
            self._crossing_points.append(point)
        return self._crossing_registry[key]

    def _closure(self, ix: int, iy: int, sx: int, sy: int):
        """Affine representation of the ghost value at (ix+sx, iy+sy).

        Returns (interior_weights, boundary_weights) as index->weight dicts.
        """
        key = (ix, iy, sx, sy)
        if key in self._closure_cache:
            return self._closure_cache[key]
        p = np.array([self._xs[ix], self._ys[iy]])
        v = np.array([sx * self.h, sy * self.h])
        beta = self._crossing_beta(p, v)
        crossing = p + beta * v
        cross_idx = self._crossing_index(crossing, ("f",) + key)

        points = [(beta, ("b", cross_idx))]
        m = 0
        while m <= 3:
            jx, jy = ix - m * sx, iy - m * sy
            if self._is_interior(jx, jy):
                points.append((-float(m), ("i", self._lattice_to_interior[jx, jy])))
                m += 1
            else:
                back = np.array([self._xs[ix - (m - 1) * sx],
                                 self._ys[iy - (m - 1) * sy]])
                tb = self._crossing_beta(back, -v)
                bpt = back - tb * v
                bidx = self._crossing_index(bpt, ("r", ix, iy, sx, sy))
                points.append((-(m - 1) - tb, ("b", bidx)))
                break
        if beta < BETA_MIN and len(points) > 2:
            points = [pt for pt in points if pt[0] != 0.0]
        points = points[:MAX_CLOSURE_POINTS]
        if len(points) < 2:
            raise GridError(
                f"stencil arm at lattice ({ix}, {iy}) direction ({sx}, {sy}) "
                "has too few usable sample points; refine the grid")
        weights = _lagrange_weights([pt[0] for pt in points], 1.0)
        interior_w: dict = {}
        boundary_w: dict = {}
        for (xi, (tag, idx)), w in zip(points, weights):
            target = interior_w if tag == "i" else boundary_w
            target[idx] = target.get(idx, 0.0) + w
        self._closure_cache[key] = (interior_w, boundary_w)
        return self._closure_cache[key]

    def operators(self) -> DerivativeOperators:
        if self._ops_cache is not None:
            return self._ops_cache
        stencils = _stencil_table(self.h, self.h)
        builders = {name: _CooBuilder() for name in stencils}
        n_res = self.resolution
        for iy in range(n_res):
            for ix in range(n_res):
                row = self._lattice_to_interior[ix, iy]
                if row < 0:
                    continue
                for name, entries in stencils.items():
                    b = builders[name]
                    for (sx, sy), coeff in entries:
                        jx, jy = ix + sx, iy + sy
                        if (sx, sy) == (0, 0) or self._is_interior(jx, jy):
                            b.add_interior(
                                row, self._lattice_to_interior[jx, jy], coeff)
                            continue
                        interior_w, boundary_w = self._closure(ix, iy, sx, sy)
                        for idx, w in interior_w.items():
                            b.add_interior(row, idx, coeff * w)
                        for idx, w in boundary_w.items():
                            b.add_boundary(row, idx, coeff * w)
        n = self.interior_count
        bpts = (np.array(self._crossing_points)
                if self._crossing_points else np.zeros((0, 2)))
        nb = bpts.shape[0]
        self._ops_cache = DerivativeOperators(
            boundary_points=bpts,
            matrices={k: b.interior_csr(n) for k, b in builders.items()},
            boundary_matrices={k: b.boundary_csr(n, nb) for k, b in builders.items()})
        return self._ops_cache

    def boundary_line_stencils(self, depth: int = 3) -> list[LineStencil]:
        """One-sided sample lines for boundary-derivative estimation.

        For every axis-direction crossing, returns the crossing point, the
        outward unit direction of the line, and the interior nodes walking
        inward from the crossing with their signed offsets along the line.
        """
        out = []
        n_res = self.resolution
        for iy in range(n_res):
            for ix in range(n_res):
                if self._lattice_to_interior[ix, iy] < 0:
                    continue
                for sx, sy in AXIS_DIRECTIONS:
                    if self._is_interior(ix + sx, iy + sy):
                        continue
                    p = np.array([self._xs[ix], self._ys[iy]])
                    v = np.array([sx * self.h, sy * self.h])
                    beta = self._crossing_beta(p, v)
                    crossing = p + beta * v
                    offsets, idxs = [], []
                    for m in range(depth + 1):
                        jx, jy = ix - m * sx, iy - m * sy
                        if not self._is_interior(jx, jy):
                            break
                        offsets.append(-(beta + m) * self.h)
                        idxs.append(self._lattice_to_interior[jx, jy])
                    if len(idxs) >= 3:
                        out.append(LineStencil(
                            crossing=crossing,
                            direction=np.array([float(sx), float(sy)]),
                            offsets=np.array(offsets),
                            node_indices=np.array(idxs, dtype=int),
                            step=self.h))
        return out


class RadialGrid:
    """Evenly spaced radii from the axis to the domain boundary."""

    kind = "radial"

    def __init__(self, radius: float, count: int):
        if count < 5:
            raise GridError("radial grids need at least 5 nodes")
        if radius <= 0:
            raise GridError("radial extent must be positive")
        self.radius = float(radius)
        self.count = int(count)
        self.nodes = np.linspace(0.0, radius, count)
        self.h = self.nodes[1] - self.nodes[0]


class _CooBuilder:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []
        self.brows, self.bcols, self.bvals = [], [], []

    def add_interior(self, r, c, v):
        self.rows.append(r)
        self.cols.append(c)
        self.vals.append(v)

    def add_boundary(self, r, c, v):
        self.brows.append(r)
        self.bcols.append(c)
        self.bvals.append(v)

    def interior_csr(self, n):
        return sp.coo_matrix((self.vals, (self.rows, self.cols)),
                             shape=(n, n)).tocsr()

    def boundary_csr(self, n, nb):
        return sp.coo_matrix((self.bvals, (self.brows, self.bcols)),
                             shape=(n, nb)).tocsr()


def _stencil_table(hx: float, hy: float) -> dict:
    return {
        "dx": [((1, 0), 1.0 / (2 * hx)), ((-1, 0), -1.0 / (2 * hx))],
        "dy": [((0, 1), 1.0 / (2 * hy)), ((0, -1), -1.0 / (2 * hy))],
        "dxx": [((1, 0), 1.0 / hx ** 2), ((0, 0), -2.0 / hx ** 2),
                ((-1, 0), 1.0 / hx ** 2)],
        "dyy": [((0, 1), 1.0 / hy ** 2), ((0, 0), -2.0 / hy ** 2),
                ((0, -1), 1.0 / hy ** 2)],
        "dxy": [((1, 1), 0.25 / (hx * hy)), ((-1, -1), 0.25 / (hx * hy)),
                ((-1, 1), -0.25 / (hx * hy)), ((1, -1), -0.25 / (hx * hy))],
    }
