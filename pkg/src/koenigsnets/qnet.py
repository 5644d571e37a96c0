"""Finite windows of maps Z^m -> R^N with planar quadrilaterals.

Storage is a dense row-major array of shape ``extents + (ambient_dim,)``.
Nets are immutable after construction; all iterators are read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator

import numpy as np

from .errors import DimensionTooLow
from .geom import DEFAULT_TOL, PlanarQuad, Tolerances

__all__ = [
    "QNet",
    "VertexScalar",
    "EdgeLabelling",
    "PlanarityReport",
    "quads",
    "quad_points",
    "hexahedra",
    "check_qnet",
    "vertex_parity",
    "BLACK",
    "WHITE",
]

BLACK = "black"
WHITE = "white"


def vertex_parity(u) -> str:
    """Black iff u_1 + ... + u_m is even."""
    return BLACK if sum(u) % 2 == 0 else WHITE


class QNet:
    """A window of a map Z^m -> R^N, m >= 2, N >= 2."""

    def __init__(self, vertices):
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim < 3:
            raise DimensionTooLow("need lattice dimension m >= 2 and a coordinate axis")
        if not np.all(np.isfinite(vertices)):
            raise ValueError("net vertices must be finite")
        self._vertices = vertices
        self._vertices.setflags(write=False)
        self.m = vertices.ndim - 1
        self.extents = vertices.shape[:-1]
        self.ambient_dim = vertices.shape[-1]
        if any(e < 2 for e in self.extents):
            raise ValueError("every axis needs at least 2 vertices")
        if self.ambient_dim < 2:
            raise DimensionTooLow("ambient dimension must be >= 2")

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    def vertex(self, u) -> np.ndarray:
        return self._vertices[tuple(u)]

    def diameter(self) -> float:
        flat = self._vertices.reshape(-1, self.ambient_dim)
        return float(np.linalg.norm(flat.max(axis=0) - flat.min(axis=0)))

    def base_indices(self, i: int, j: int) -> Iterator[tuple]:
        """Base multi-indices of all elementary quads in the (i, j) plane."""
        ranges = [
            range(e - 1) if ax in (i, j) else range(e)
            for ax, e in enumerate(self.extents)
        ]
        return product(*ranges)

    def interior_indices(self) -> Iterator[tuple]:
        return product(*(range(1, e - 1) for e in self.extents))

    def with_vertices(self, vertices) -> "QNet":
        return QNet(vertices)


def quad_points(net: QNet, u, i: int, j: int) -> np.ndarray:
    """Vertices (f, f_i, f_ij, f_j) of the quad based at u in plane (i, j)."""
    u = tuple(u)
    ei = tuple(u[k] + (1 if k == i else 0) for k in range(net.m))
    ej = tuple(u[k] + (1 if k == j else 0) for k in range(net.m))
    eij = tuple(u[k] + (1 if k in (i, j) else 0) for k in range(net.m))
    return np.stack([net.vertex(u), net.vertex(ei), net.vertex(eij), net.vertex(ej)])


def quads(net: QNet, tol: Tolerances = DEFAULT_TOL) -> Iterator[tuple]:
    """Yield every elementary quadrilateral (u, i, j, PlanarQuad), i < j."""
    for i, j in combinations(range(net.m), 2):
        for u in net.base_indices(i, j):
            pts = quad_points(net, u, i, j)
            yield u, i, j, PlanarQuad(*pts, plane_tolerance=tol.incidence)


def hexahedra(net: QNet) -> Iterator[tuple]:
    """Yield each combinatorial cube as (u, (i, j, k), points).

    Points are ordered (f, f_i, f_j, f_k, f_ij, f_ik, f_jk, f_ijk).
    """
    if net.m < 3:
        raise DimensionTooLow("hexahedra need lattice dimension m >= 3")
    for axes in combinations(range(net.m), 3):
        i, j, k = axes
        ranges = [
            range(e - 1) if ax in axes else range(e)
            for ax, e in enumerate(net.extents)
        ]
        for u in product(*ranges):
            def at(*shift):
                v = list(u)
                for ax in shift:
                    v[ax] += 1
                return net.vertex(v)

            pts = np.stack([
                at(), at(i), at(j), at(k),
                at(i, j), at(i, k), at(j, k), at(i, j, k),
            ])
            yield u, axes, pts


@dataclass
class PlanarityReport:
    passed: bool
    max_residual: float
    offenders: list  # (u, i, j, residual) of quads above tolerance


def check_qnet(net: QNet, tol: Tolerances = DEFAULT_TOL) -> PlanarityReport:
    """Per-quad planarity residuals (smallest/largest singular value of the
    centered 4xN point matrix).  Passes iff the maximum is <= tol.incidence."""
    max_res = 0.0
    offenders = []
    for i, j in combinations(range(net.m), 2):
        pts, bases = _gather_quads(net, i, j)
        centered = pts - pts.mean(axis=1, keepdims=True)
        sv = np.linalg.svd(centered, compute_uv=False)
        if sv.shape[1] > 2:
            res = np.where(sv[:, 0] > 0, sv[:, 2] / np.maximum(sv[:, 0], 1e-300), 0.0)
        else:
            res = np.zeros(len(pts))
        max_res = max(max_res, float(res.max(initial=0.0)))
        for idx in np.nonzero(res > tol.incidence)[0]:
            offenders.append((bases[idx], i, j, float(res[idx])))
    return PlanarityReport(passed=max_res <= tol.incidence, max_residual=max_res, offenders=offenders)


def _gather_quads(net: QNet, i: int, j: int):
    """Stacked quad vertex arrays (Q, 4, N) plus the list of base indices."""
    bases = list(net.base_indices(i, j))
    v = net.vertices
    ei = np.zeros(net.m, dtype=int)
    ei[i] = 1
    ej = np.zeros(net.m, dtype=int)
    ej[j] = 1
    idx = np.array(bases)
    p00 = v[tuple(idx.T)]
    p10 = v[tuple((idx + ei).T)]
    p11 = v[tuple((idx + ei + ej).T)]
    p01 = v[tuple((idx + ej).T)]
    return np.stack([p00, p10, p11, p01], axis=1), bases


@dataclass
class VertexScalar:
    """Real-valued function on the vertices of a net."""

    values: np.ndarray
    nonzero: bool = True

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("vertex scalars must be finite")
        if self.nonzero and np.any(self.values == 0.0):
            raise ValueError("vertex scalar declared nonzero but contains zeros")

    def __getitem__(self, u) -> float:
        return float(self.values[tuple(u)])


@dataclass
class EdgeLabelling:
    """Per-axis labels alpha_i(u_i), one value per edge layer.

    Constant on opposite edges of every elementary quad by construction.
    """

    per_axis: tuple

    def __post_init__(self):
        self.per_axis = tuple(np.asarray(a, dtype=float) for a in self.per_axis)
        for a in self.per_axis:
            if np.any(a == 0.0) or not np.all(np.isfinite(a)):
                raise ValueError("edge labels must be finite and nonzero")

    def label(self, axis: int, layer: int) -> float:
        return float(self.per_axis[axis][layer])
