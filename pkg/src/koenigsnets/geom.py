"""Euclidean and Minkowski vector primitives.

Points are plain numpy arrays of shape ``(N,)`` with ``N >= 2``.  Everything
here is a pure function of its inputs; tolerances are relative and collected
in :class:`Tolerances`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CoincidentPoints,
    CollinearTriple,
    DegenerateQuad,
    DimensionMismatch,
    GeneralPositionViolated,
    NotConcircular,
    NotOnLightCone,
    NotPlanar,
    PointOffLine,
    VertexOnDiagonal,
    ZeroE0Component,
)

__all__ = [
    "Tolerances",
    "PlanarQuad",
    "MinkowskiVec",
    "affine_rank",
    "planarity_residual",
    "intersect_diagonals",
    "diagonal_ratios",
    "menelaus_product",
    "circularity_residual",
    "cross_ratio",
    "is_convex",
    "minkowski_dot",
    "lift_to_lightcone",
    "project_from_lightcone",
    "plane_frame",
    "to_plane_coords",
]


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances: ``incidence`` for point/line/plane predicates,
    ``product`` for multiplicative-cycle residuals."""

    incidence: float = 1e-9
    product: float = 1e-8

    def __post_init__(self):
        if self.incidence <= 0 or self.product <= 0:
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerances()


def _as_point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.shape[0] < 2:
        raise DimensionMismatch(f"point must be a 1-d array of length >= 2, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


def planarity_residual(points: np.ndarray) -> float:
    """Smallest/largest singular value of the centered point matrix.

    Zero iff the points lie in a common 2-plane; scale invariant.
    """
    pts = np.asarray(points, dtype=float)
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] == 0.0:
        return 0.0
    return float(sv[2] / sv[0]) if len(sv) > 2 else 0.0


def affine_rank(points, tol: float = 1e-9) -> int:
    """Dimension of the affine span of the points.

    Singular values of the centered point matrix below ``tol`` times the
    largest one count as zero.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 1:
        raise ValueError("need at least one point")
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


@dataclass(frozen=True)
class PlanarQuad:
    """Planar quadrilateral (A, B, C, D) in cyclic order.

    Validates on construction that the four vertices lie within
    ``plane_tolerance`` of a common 2-plane and that no three consecutive
    vertices are collinear.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    plane_tolerance: float = field(default=DEFAULT_TOL.incidence)

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, _as_point(getattr(self, name)))
        if self.plane_tolerance <= 0:
            raise ValueError("plane_tolerance must be positive")
        res = planarity_residual(self.points)
        if res > self.plane_tolerance:
            raise NotPlanar(f"quad planarity residual {res:.3e} exceeds {self.plane_tolerance:.3e}")
        pts = self.points
        diam = self.diameter
        for k in range(4):
            p, q, r = pts[k - 1], pts[k], pts[(k + 1) % 4]
            u, v = q - p, r - q
            area = _cross_norm(u, v)
            if area <= self.plane_tolerance * diam * diam:
                raise CollinearTriple(f"vertices {k-1},{k},{(k+1)%4} are collinear")

    @property
    def points(self) -> np.ndarray:
        return np.stack([self.a, self.b, self.c, self.d])

    @property
    def diameter(self) -> float:
        pts = self.points
        return float(max(np.linalg.norm(pts[i] - pts[j]) for i in range(4) for j in range(i + 1, 4)))


def _cross_norm(u: np.ndarray, v: np.ndarray) -> float:
    """|u x v| in arbitrary dimension, via the Gram determinant."""
    g = np.dot(u, u) * np.dot(v, v) - np.dot(u, v) ** 2
    return float(np.sqrt(max(g, 0.0)))


def _intersect_lines(a, u, b, v, tol_rel, scale):
    """Least-squares intersection of lines a + t*u and b + s*v.

    Returns (point, t, s).  Raises DegenerateQuad if the lines are parallel
    within ``tol_rel`` or the residual exceeds ``tol_rel * scale``.
    """
    uu, vv, uv = np.dot(u, u), np.dot(v, v), np.dot(u, v)
    det = uu * vv - uv * uv
    if det <= tol_rel * uu * vv:
        raise DegenerateQuad("diagonals are parallel (intersection at infinity)")
    w = b - a
    t = (vv * np.dot(w, u) - uv * np.dot(w, v)) / det
    s = (uv * np.dot(w, u) - uu * np.dot(w, v)) / det
    p1 = a + t * u
    p2 = b + s * v
    resid = np.linalg.norm(p1 - p2)
    if resid > tol_rel * scale:
        raise DegenerateQuad(f"skew diagonals: residual {resid:.3e} exceeds tolerance")
    return 0.5 * (p1 + p2), float(t), float(s)


def intersect_diagonals(q: PlanarQuad, tol: Tolerances = DEFAULT_TOL):
    """Intersection M of the diagonals (AC) and (BD).

    Returns ``(m, t_ac, t_bd)`` where ``t_ac`` and ``t_bd`` are the affine
    parameters of M on each diagonal (A at 0, C at 1; B at 0, D at 1).
    """
    u = q.c - q.a
    v = q.d - q.b
    return _intersect_lines(q.a, u, q.b, v, tol.incidence, q.diameter)


def diagonal_ratios(q: PlanarQuad, tol: Tolerances = DEFAULT_TOL):
    """Ratios of directed diagonal segments, q_ac = l(M,C)/l(M,A) and
    q_bd = l(M,D)/l(M,B).

    Reversing a diagonal direction inverts the value; both values are
    negative exactly for a convex quadrilateral.
    """
    _, t_ac, t_bd = intersect_diagonals(q, tol)
    for t in (t_ac, t_bd):
        if abs(t) <= tol.incidence or abs(1.0 - t) <= tol.incidence:
            raise VertexOnDiagonal("diagonal intersection coincides with a vertex")
    return (1.0 - t_ac) / (-t_ac), (1.0 - t_bd) / (-t_bd)


def is_convex(q: PlanarQuad) -> bool:
    """True iff the quadrilateral is convex (embedded, no crossing)."""
    frame = plane_frame(q.points)
    z = to_plane_coords(q.points, frame)
    signs = []
    for k in range(4):
        u = z[(k + 1) % 4] - z[k]
        v = z[(k + 2) % 4] - z[(k + 1) % 4]
        signs.append(np.sign(u[0] * v[1] - u[1] * v[0]))
    return all(s > 0 for s in signs) or all(s < 0 for s in signs)


def menelaus_product(vertices, division_points, tol: Tolerances = DEFAULT_TOL) -> float:
    """Product of ratios of directed lengths for n+1 points dividing the
    sides of an n-simplex cycle.

    ``vertices`` are n+1 points in general position in R^n, and
    ``division_points[i]`` lies on the line (P_i, P_{i+1}).  The product
    equals (-1)^(n+1) iff the division points lie in an (n-1)-dimensional
    affine subspace.
    """
    verts = [np.asarray(p, dtype=float) for p in vertices]
    divs = [np.asarray(p, dtype=float) for p in division_points]
    n = len(verts) - 1
    if len(divs) != n + 1:
        raise DimensionMismatch("need as many division points as vertices")
    if affine_rank(verts, tol.incidence) != n:
        raise GeneralPositionViolated("vertices do not span an n-dimensional affine space")
    scale = max(np.linalg.norm(p - verts[0]) for p in verts[1:])
    product = 1.0
    for i in range(n + 1):
        p, pn = verts[i], verts[(i + 1) % (n + 1)]
        edge = pn - p
        w = divs[i] - p
        xi = float(np.dot(w, edge) / np.dot(edge, edge))
        off = np.linalg.norm(w - xi * edge)
        if off > tol.incidence * scale:
            raise PointOffLine(f"division point {i} is off its line by {off:.3e}")
        if abs(xi) <= tol.incidence or abs(1.0 - xi) <= tol.incidence:
            raise PointOffLine(f"division point {i} coincides with an endpoint")
        product *= xi / (1.0 - xi)
    return product


def plane_frame(points: np.ndarray):
    """Orthonormal in-plane basis (origin, u, v) for nearly-coplanar points.

    u points along ``points[1] - points[0]``; v spans the remaining in-plane
    direction.
    """
    pts = np.asarray(points, dtype=float)
    origin = pts[0]
    u = pts[1] - origin
    nu = np.linalg.norm(u)
    if nu == 0.0:
        raise CoincidentPoints("cannot build a frame from coincident points")
    u = u / nu
    v = None
    for p in pts[2:]:
        w = p - origin
        w = w - np.dot(w, u) * u
        nw = np.linalg.norm(w)
        if nw > 1e-13 * max(nu, np.linalg.norm(p - origin)):
            v = w / nw
            break
    if v is None:
        raise CollinearTriple("all points are collinear; no plane frame")
    return origin, u, v


def to_plane_coords(points: np.ndarray, frame) -> np.ndarray:
    origin, u, v = frame
    rel = np.asarray(points, dtype=float) - origin
    return np.stack([rel @ u, rel @ v], axis=-1)


def circularity_residual(a, b, c, d, tol: Tolerances = DEFAULT_TOL) -> float:
    """Scale-invariant residual, zero iff the four points are concircular.

    Determinant test on rows (x, y, x^2 + y^2, 1) in plane coordinates;
    the determinant scales with the fourth power of length, so it is
    normalized by the fourth power of the diameter.
    """
    pts = np.stack([_as_point(a), _as_point(b), _as_point(c), _as_point(d)])
    res = planarity_residual(pts)
    if res > tol.incidence:
        raise NotPlanar(f"points are not coplanar (residual {res:.3e})")
    frame = plane_frame(pts)  # raises CollinearTriple if a, b, c collinear
    z = to_plane_coords(pts, frame)
    diam = max(np.linalg.norm(z[i] - z[j]) for i in range(4) for j in range(i + 1, 4))
    if diam == 0.0:
        raise CoincidentPoints("all four points coincide")
    rows = np.column_stack([z[:, 0], z[:, 1], (z ** 2).sum(axis=1), np.ones(4)])
    return float(abs(np.linalg.det(rows)) / diam ** 4)


def cross_ratio(a, b, c, d, tol: Tolerances = DEFAULT_TOL) -> float:
    """Real cross-ratio (a-b)(b-c)^{-1}(c-d)(d-a)^{-1} of concircular points.

    The quad's plane is identified with the complex plane via an orthonormal
    in-plane frame; for concircular points the value is real and independent
    of the frame.  Negative exactly for embedded quadrilaterals.
    """
    pts = np.stack([_as_point(a), _as_point(b), _as_point(c), _as_point(d)])
    res = circularity_residual(a, b, c, d, tol)
    if res > tol.incidence:
        raise NotConcircular(f"points are not concircular (residual {res:.3e})")
    frame = plane_frame(pts)
    z = to_plane_coords(pts, frame)
    za, zb, zc, zd = (complex(p[0], p[1]) for p in z)
    for x, y in ((za, zb), (zb, zc), (zc, zd), (zd, za)):
        if x == y:
            raise CoincidentPoints("consecutive points coincide")
    cr = (za - zb) / (zb - zc) * (zc - zd) / (zd - za)
    if abs(cr.imag) > tol.product * (abs(cr) + 1.0):
        raise NotConcircular(f"cross-ratio has imaginary residual {cr.imag:.3e}")
    return float(cr.real)


# --- Minkowski space R^{N+1,1} ----------------------------------------------


@dataclass(frozen=True)
class MinkowskiVec:
    """Vector in R^{N+1,1} in the basis e_1..e_N, e_0, e_inf with
    <e_0,e_0> = <e_inf,e_inf> = 0, <e_0,e_inf> = -1/2, <e_i,e_j> = delta_ij."""

    spatial: np.ndarray
    e0: float
    einf: float

    def __post_init__(self):
        object.__setattr__(self, "spatial", np.asarray(self.spatial, dtype=float))
        if not (np.all(np.isfinite(self.spatial)) and np.isfinite(self.e0) and np.isfinite(self.einf)):
            raise ValueError("Minkowski components must be finite")

    def as_array(self) -> np.ndarray:
        """Flat layout [spatial..., e0, einf]."""
        return np.concatenate([self.spatial, [self.e0, self.einf]])

    @classmethod
    def from_array(cls, arr) -> "MinkowskiVec":
        arr = np.asarray(arr, dtype=float)
        return cls(arr[:-2], float(arr[-2]), float(arr[-1]))

    def __mul__(self, k: float) -> "MinkowskiVec":
        return MinkowskiVec(self.spatial * k, self.e0 * k, self.einf * k)

    __rmul__ = __mul__

    def __add__(self, other: "MinkowskiVec") -> "MinkowskiVec":
        return MinkowskiVec(self.spatial + other.spatial, self.e0 + other.e0, self.einf + other.einf)

    def __sub__(self, other: "MinkowskiVec") -> "MinkowskiVec":
        return MinkowskiVec(self.spatial - other.spatial, self.e0 - other.e0, self.einf - other.einf)


def minkowski_dot(x: MinkowskiVec, y: MinkowskiVec) -> float:
    """<x,y> = sum x_i y_i - (x.e0 * y.einf + x.einf * y.e0) / 2."""
    if x.spatial.shape != y.spatial.shape:
        raise DimensionMismatch("spatial dimensions differ")
    return float(np.dot(x.spatial, y.spatial) - 0.5 * (x.e0 * y.einf + x.einf * y.e0))


def minkowski_dot_arrays(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bulk Minkowski product on flat-layout arrays (..., N+2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (x[..., :-2] * y[..., :-2]).sum(axis=-1) - 0.5 * (
        x[..., -2] * y[..., -1] + x[..., -1] * y[..., -2]
    )


def lift_to_lightcone(f) -> MinkowskiVec:
    """f_hat = f + e_0 + |f|^2 e_inf; isotropic by construction."""
    f = _as_point(f)
    return MinkowskiVec(f, 1.0, float(np.dot(f, f)))


def project_from_lightcone(y: MinkowskiVec, tol: Tolerances = DEFAULT_TOL):
    """Inverse of the homogeneous light-cone lift.

    Returns ``(s, f)`` with s = 1/y.e0 and f = s * spatial(y), so that
    ``(1/s) * lift_to_lightcone(f)`` reproduces y.
    """
    norm2 = np.dot(y.spatial, y.spatial) + y.e0 ** 2 + y.einf ** 2
    iso = minkowski_dot(y, y)
    if abs(iso) > tol.incidence * max(norm2, 1e-300):
        raise NotOnLightCone(f"<y,y> = {iso:.3e} is not isotropic")
    if abs(y.e0) <= tol.incidence * np.sqrt(norm2):
        raise ZeroE0Component("e_0 component vanishes (point at infinity)")
    s = 1.0 / y.e0
    return s, y.spatial * s
