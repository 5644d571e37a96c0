"""Discrete Koenigs nets.

The diagonal one-form q, its closedness products, integration of the vertex
function nu, dual quadrilaterals and dual nets, Moutard lifts/evolution, and
the geometric characterizations for m = 2 and m = 3.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .errors import (
    DegenerateQuad,
    DimensionTooLow,
    EqualNuOnWhiteDiagonal,
    NotAlternating,
    NotKoenigs,
    VanishingLastComponent,
    VertexOnDiagonal,
    ZeroNu,
)
from .geom import (
    DEFAULT_TOL,
    PlanarQuad,
    Tolerances,
    affine_rank,
    intersect_diagonals,
)
from .qnet import QNet, VertexScalar, _gather_quads

__all__ = [
    "DiagonalForm",
    "KoenigsData",
    "MoutardNet",
    "ClosednessReport",
    "build_q_form",
    "check_closedness",
    "integrate_nu",
    "dualize_quad",
    "dual_quad_residual",
    "dualize_net",
    "laplace_residual",
    "moutard_lift",
    "moutard_evolve",
    "check_koenigs_2d_geometric",
    "check_koenigs_3d_geometric",
    "normalize_nu_for_limit",
]


@dataclass
class DiagonalForm:
    """Ratios of directed diagonal segments for every elementary quad.

    Canonical orientations: ``q_main[(i,j)][u]`` is q(f -> f_ij), taken from
    the lexicographically smaller corner; ``q_cross[(i,j)][u]`` is
    q(f_i -> f_j).  Reversing an orientation inverts the value.  ``m_points``
    holds the diagonal intersection points.
    """

    q_main: dict
    q_cross: dict
    m_points: dict

    def directed(self, base, i, j, frm, to) -> float:
        """q for the directed diagonal ``frm -> to`` of the quad at ``base``."""
        base = tuple(base)
        c00 = base
        c10 = _shift(base, i)
        c01 = _shift(base, j)
        c11 = _shift(base, i, j)
        frm, to = tuple(frm), tuple(to)
        if {frm, to} == {c00, c11}:
            val = self.q_main[(i, j)][base]
            return val if frm == c00 else 1.0 / val
        if {frm, to} == {c10, c01}:
            val = self.q_cross[(i, j)][base]
            return val if frm == c10 else 1.0 / val
        raise ValueError("vertices are not a diagonal of this quad")


def _shift(u, *axes):
    v = list(u)
    for ax in axes:
        v[ax] += 1
    return tuple(v)


def _diag_data(net: QNet, i: int, j: int, tol: Tolerances):
    """Vectorized diagonal intersections for all quads in the (i, j) plane.

    Returns (t, s, m, q_main, q_cross) arrays shaped like the base grid.
    """
    pts, bases = _gather_quads(net, i, j)
    # extended precision: the normal-equation determinant cancels badly for
    # nearly parallel diagonals, which double precision turns into O(1e-8)
    # errors in t just above the degeneracy guard
    pts = pts.astype(np.longdouble)
    a, b, c, d = pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3]
    u = c - a
    v = d - b
    uu = (u * u).sum(axis=1)
    vv = (v * v).sum(axis=1)
    uv = (u * v).sum(axis=1)
    det = uu * vv - uv * uv
    bad = det <= tol.incidence * uu * vv
    if np.any(bad):
        raise DegenerateQuad(f"parallel diagonals at quad base {bases[int(np.argmax(bad))]} (axes {i},{j})")
    w = b - a
    wu = (w * u).sum(axis=1)
    wv = (w * v).sum(axis=1)
    t = (vv * wu - uv * wv) / det
    s = (uv * wu - uu * wv) / det
    p1 = a + t[:, None] * u
    p2 = b + s[:, None] * v
    diam = np.sqrt(np.maximum(uu, vv))
    resid = np.linalg.norm(p1 - p2, axis=1)
    bad = resid > tol.incidence * diam
    if np.any(bad):
        raise DegenerateQuad(f"skew diagonals at quad base {bases[int(np.argmax(bad))]} (axes {i},{j})")
    near = np.minimum(np.minimum(np.abs(t), np.abs(1 - t)), np.minimum(np.abs(s), np.abs(1 - s)))
    bad = near <= tol.incidence
    if np.any(bad):
        raise VertexOnDiagonal(f"intersection at a vertex, quad base {bases[int(np.argmax(bad))]}")
    shape = tuple(e - 1 if ax in (i, j) else e for ax, e in enumerate(net.extents))
    q_main = ((1.0 - t) / (-t)).reshape(shape).astype(float)
    q_cross = ((1.0 - s) / (-s)).reshape(shape).astype(float)
    m = (0.5 * (p1 + p2)).reshape(shape + (net.ambient_dim,)).astype(float)
    return t.reshape(shape).astype(float), s.reshape(shape).astype(float), m, q_main, q_cross


def build_q_form(net: QNet, tol: Tolerances = DEFAULT_TOL) -> DiagonalForm:
    """The multiplicative one-form q on the diagonals of all elementary quads."""
    q_main, q_cross, m_points = {}, {}, {}
    for i, j in combinations(range(net.m), 2):
        _, _, m, qm, qc = _diag_data(net, i, j, tol)
        q_main[(i, j)] = qm
        q_cross[(i, j)] = qc
        m_points[(i, j)] = m
    return DiagonalForm(q_main=q_main, q_cross=q_cross, m_points=m_points)


@dataclass
class ClosednessReport:
    is_koenigs: bool
    max_residual: float
    n_cycles: int
    failures: list  # (description, residual)


def _slice2(arr, i, j, lo_i, hi_i, lo_j, hi_j):
    """arr[..., lo_i:hi_i along axis i, lo_j:hi_j along axis j, ...]."""
    sl = [slice(None)] * arr.ndim
    sl[i] = slice(lo_i, hi_i)
    sl[j] = slice(lo_j, hi_j)
    return arr[tuple(sl)]


def check_closedness(net: QNet, tol: Tolerances = DEFAULT_TOL, form: DiagonalForm | None = None) -> ClosednessReport:
    """Closedness of the diagonal one-form on the black and white graphs.

    For every axis pair, the product of q over the 4-cycle of diagonals
    around each slice-interior vertex must be 1; for m >= 3 additionally the
    triangle products at every hexahedron corner.  The net is Koenigs iff
    every |product - 1| <= tol.product.
    """
    if form is None:
        form = build_q_form(net, tol)
    failures = []
    max_res = 0.0
    n_cycles = 0
    # 4-cycles around slice-interior vertices, one per axis pair
    for i, j in combinations(range(net.m), 2):
        qm = form.q_main[(i, j)]
        qc = form.q_cross[(i, j)]
        hi = net.extents[i] - 1
        hj = net.extents[j] - 1
        if hi < 2 or hj < 2:
            continue
        prod = (
            _slice2(qc, i, j, 1, None, 1, None)
            * _slice2(qm, i, j, 1, None, 0, -1)
            / _slice2(qm, i, j, 0, -1, 1, None)
            / _slice2(qc, i, j, 0, -1, 0, -1)
        )
        res = np.abs(prod - 1.0)
        n_cycles += res.size
        max_res = max(max_res, float(res.max()))
        for idx in zip(*np.nonzero(res > tol.product)):
            failures.append((f"vertex cycle axes ({i},{j}) at base {idx}", float(res[idx])))
    # triangle cycles at hexahedron corners
    if net.m >= 3:
        for desc, res in _corner_triangle_products(net, form):
            n_cycles += 1
            max_res = max(max_res, res)
            if res > tol.product:
                failures.append((desc, res))
    return ClosednessReport(
        is_koenigs=max_res <= tol.product,
        max_residual=max_res,
        n_cycles=n_cycles,
        failures=failures,
    )


def _corner_triangle_products(net: QNet, form: DiagonalForm):
    """Yield (description, |product - 1|) for every hexahedron corner."""
    for axes in combinations(range(net.m), 3):
        ranges = [
            range(e - 1) if ax in axes else range(e)
            for ax, e in enumerate(net.extents)
        ]
        for w in product(*ranges):
            for bits in product((0, 1), repeat=3):
                corner = list(w)
                for ax, bval in zip(axes, bits):
                    corner[ax] += bval
                corner = tuple(corner)
                # neighbours of the corner inside the cube
                nb = {}
                for ax in axes:
                    n = list(corner)
                    n[ax] = w[ax] + (1 - (corner[ax] - w[ax]))
                    nb[ax] = tuple(n)
                i, j, k = axes
                prod = 1.0
                for (p, q), (frm, to) in (((i, j), (nb[i], nb[j])),
                                          ((j, k), (nb[j], nb[k])),
                                          ((i, k), (nb[k], nb[i]))):
                    r = next(ax for ax in axes if ax not in (p, q))
                    base = list(w)
                    if corner[r] != w[r]:
                        base[r] += 1
                    prod *= form.directed(tuple(base), p, q, frm, to)
                yield (f"corner {corner} of cube {w} axes {axes}", abs(prod - 1.0))


@dataclass
class KoenigsData:
    """Vertex function nu together with the closedness diagnostic."""

    nu: VertexScalar
    closedness_residual: float


def integrate_nu(
    net: QNet,
    base_black=None,
    base_white=None,
    tol: Tolerances = DEFAULT_TOL,
    form: DiagonalForm | None = None,
    check: bool = True,
) -> KoenigsData:
    """Propagate nu along diagonals from one black and one white base value.

    Uses breadth-first traversal with nu_ij/nu = q(f -> f_ij) and
    nu_j/nu_i = q(f_i -> f_j), then re-verifies every diagonal relation.
    Raises NotKoenigs if the residual exceeds tol.product (unless ``check``
    is disabled, in which case the residual is reported in the result).
    """
    if form is None:
        form = build_q_form(net, tol)
    if base_black is None:
        base_black = (tuple(0 for _ in range(net.m)), 1.0)
    if base_white is None:
        base_white = (tuple(1 if ax == 0 else 0 for ax in range(net.m)), 1.0)
    nu = np.full(net.extents, np.nan)
    for (u, value), color in ((base_black, 0), (base_white, 1)):
        u = tuple(u)
        if sum(u) % 2 != color:
            raise ValueError(f"base vertex {u} has the wrong parity")
        if value == 0.0:
            raise ZeroNu("base value of nu must be nonzero")
        nu[u] = value
        queue = deque([u])
        while queue:
            v = queue.popleft()
            for w, factor in _diagonal_neighbours(net, form, v):
                if np.isnan(nu[w]):
                    nu[w] = nu[v] * factor
                    queue.append(w)
    if np.any(np.isnan(nu)):
        raise NotKoenigs("diagonal graph does not reach every vertex")
    residual = _nu_residual(net, form, nu)
    if check and residual > tol.product:
        raise NotKoenigs(f"nu propagation inconsistent: residual {residual:.3e}")
    return KoenigsData(nu=VertexScalar(nu), closedness_residual=residual)


def _diagonal_neighbours(net: QNet, form: DiagonalForm, v):
    """(neighbour, multiplicative factor) over all diagonals through v."""
    for i, j in combinations(range(net.m), 2):
        qm = form.q_main[(i, j)]
        qc = form.q_cross[(i, j)]
        # v as the base corner f: partner f_ij
        if v[i] + 1 < net.extents[i] and v[j] + 1 < net.extents[j]:
            yield _shift(v, i, j), qm[v]
        # v as f_ij: partner f
        if v[i] >= 1 and v[j] >= 1:
            b = _unshift(v, i, j)
            yield b, 1.0 / qm[b]
        # v as f_i: partner f_j
        if v[i] >= 1 and v[j] + 1 < net.extents[j]:
            b = _unshift(v, i)
            yield _shift(b, j), qc[b]
        # v as f_j: partner f_i
        if v[j] >= 1 and v[i] + 1 < net.extents[i]:
            b = _unshift(v, j)
            yield _shift(b, i), 1.0 / qc[b]


def _unshift(u, *axes):
    v = list(u)
    for ax in axes:
        v[ax] -= 1
    return tuple(v)


def _nu_residual(net: QNet, form: DiagonalForm, nu: np.ndarray) -> float:
    """Max relative violation of the two diagonal relations over all quads."""
    worst = 0.0
    for i, j in combinations(range(net.m), 2):
        qm = form.q_main[(i, j)]
        qc = form.q_cross[(i, j)]
        n00 = _crop(nu, i, j, 0, 0)
        n10 = _crop(nu, i, j, 1, 0)
        n01 = _crop(nu, i, j, 0, 1)
        n11 = _crop(nu, i, j, 1, 1)
        r1 = np.abs(n11 / n00 - qm) / np.abs(qm)
        r2 = np.abs(n01 / n10 - qc) / np.abs(qc)
        worst = max(worst, float(r1.max()), float(r2.max()))
    return worst


def _crop(arr, i, j, oi, oj):
    """Array of vertex values at the (oi, oj) corner of every (i, j) quad."""
    sl = [slice(None)] * arr.ndim
    sl[i] = slice(1, None) if oi else slice(0, -1)
    sl[j] = slice(1, None) if oj else slice(0, -1)
    return arr[tuple(sl)]


# --- dual quadrilaterals and dual nets ---------------------------------------


def dualize_quad(q: PlanarQuad, tol: Tolerances = DEFAULT_TOL) -> PlanarQuad:
    """One representative of the dual quadrilateral, with the diagonal
    intersection of the dual placed at the origin.

    Corresponding sides of the result are parallel to those of ``q`` and its
    diagonals are parallel to the non-corresponding diagonals of ``q``.
    """
    m, _, _ = intersect_diagonals(q, tol)
    e1 = q.c - q.a
    e1 = e1 / np.linalg.norm(e1)
    e2 = q.d - q.b
    e2 = e2 / np.linalg.norm(e2)
    alpha = float(np.dot(q.a - m, e1))
    beta = float(np.dot(q.b - m, e2))
    gamma = float(np.dot(q.c - m, e1))
    delta = float(np.dot(q.d - m, e2))
    lo = tol.incidence * q.diameter
    if min(abs(alpha), abs(beta), abs(gamma), abs(delta)) <= lo:
        raise VertexOnDiagonal("diagonal intersection coincides with a vertex")
    return PlanarQuad(
        -e2 / alpha, -e1 / beta, -e2 / gamma, -e1 / delta,
        plane_tolerance=q.plane_tolerance,
    )


def _angular_residual(u: np.ndarray, v: np.ndarray) -> float:
    """Sine of the angle between u and v (0 for parallel vectors).

    Computed as the norm of the orthogonal rejection, which stays accurate
    to machine precision for nearly parallel vectors where the Gram
    determinant cancels.
    """
    uh = u / np.linalg.norm(u)
    vh = v / np.linalg.norm(v)
    return float(np.linalg.norm(vh - np.dot(vh, uh) * uh))


def dual_quad_residual(q: PlanarQuad, qd: PlanarQuad) -> float:
    """Max angular residual over the six parallelism predicates of duality:
    four corresponding sides and the two crossed diagonals."""
    a, b, c, d = q.a, q.b, q.c, q.d
    aa, bb, cc, dd = qd.a, qd.b, qd.c, qd.d
    pairs = [
        (b - a, bb - aa), (c - b, cc - bb), (d - c, dd - cc), (a - d, aa - dd),
        (cc - aa, d - b), (dd - bb, c - a),
    ]
    return max(_angular_residual(u, v) for u, v in pairs)


def dualize_net(
    net: QNet,
    kd: KoenigsData,
    base=None,
    tol: Tolerances = DEFAULT_TOL,
    check: bool = True,
):
    """Integrate the edge one-form delta_i f* = delta_i f / (nu nu_i).

    Returns the dual net; raises NotKoenigs when the form fails to close
    (unless ``check`` is disabled).  The path-independence residual is
    available via :func:`dual_form_residual`.
    """
    nu = kd.nu.values
    if np.any(nu == 0.0):
        raise ZeroNu("nu vanishes at a vertex")
    forms = _dual_edge_forms(net, nu)
    residual = _one_form_closure_residual(net, forms)
    if check and residual > tol.product:
        raise NotKoenigs(f"dual one-form not closed: residual {residual:.3e}")
    if base is None:
        base = (tuple(0 for _ in range(net.m)), np.zeros(net.ambient_dim))
    return _integrate_one_form(net, forms, base)


def dual_form_residual(net: QNet, kd: KoenigsData) -> float:
    """Path-independence residual of the dual one-form (0 for Koenigs nets)."""
    return _one_form_closure_residual(net, _dual_edge_forms(net, kd.nu.values))


def _dual_edge_forms(net: QNet, nu: np.ndarray):
    """Edge arrays G_i = delta_i f / (nu nu_i)."""
    forms = {}
    for i in range(net.m):
        lo = [slice(None)] * net.m
        hi = [slice(None)] * net.m
        lo[i] = slice(0, -1)
        hi[i] = slice(1, None)
        df = net.vertices[tuple(hi)] - net.vertices[tuple(lo)]
        denom = nu[tuple(lo)] * nu[tuple(hi)]
        forms[i] = df / denom[..., None]
    return forms


def _one_form_closure_residual(net: QNet, forms) -> float:
    """Max relative closure defect of an R^N-valued edge one-form over quads."""
    worst = 0.0
    for i, j in combinations(range(net.m), 2):
        gi = forms[i]
        gj = forms[j]
        gi_lo = _edge_crop(gi, j, 0)
        gi_hi = _edge_crop(gi, j, 1)
        gj_lo = _edge_crop(gj, i, 0)
        gj_hi = _edge_crop(gj, i, 1)
        defect = gi_lo + gj_hi - gj_lo - gi_hi
        scale = np.maximum.reduce([
            np.linalg.norm(gi_lo, axis=-1),
            np.linalg.norm(gi_hi, axis=-1),
            np.linalg.norm(gj_lo, axis=-1),
            np.linalg.norm(gj_hi, axis=-1),
        ])
        rel = np.linalg.norm(defect, axis=-1) / np.maximum(scale, 1e-300)
        worst = max(worst, float(rel.max()))
    return worst


def _edge_crop(g: np.ndarray, axis: int, offset: int) -> np.ndarray:
    """Drop the last (offset=0) or first (offset=1) layer along ``axis``."""
    sl = [slice(None)] * (g.ndim - 1)
    sl[axis] = slice(0, -1) if offset == 0 else slice(1, None)
    return g[tuple(sl)]


def _integrate_one_form(net: QNet, forms, base) -> QNet:
    """Sum an edge one-form along lexicographic paths, then translate so the
    base vertex lands on its prescribed value."""
    u0, f0 = base
    u0 = tuple(u0)
    out = np.empty(net.extents + (net.ambient_dim,))
    out[tuple(0 for _ in range(net.m))] = 0.0
    for u in product(*(range(e) for e in net.extents)):
        for ax in range(net.m):
            if u[ax] > 0:
                prev = _unshift(u, ax)
                out[u] = out[prev] + forms[ax][prev]
                break
    out += np.asarray(f0, dtype=float) - out[u0]
    return QNet(out)


# --- discrete Laplace equation ------------------------------------------------


@dataclass
class LaplaceReport:
    max_residual: float
    singular_quads: list  # (u, i, j) with nu_i == nu_j

    def __float__(self):
        return self.max_residual


def laplace_residual(net: QNet, kd: KoenigsData, tol: Tolerances = DEFAULT_TOL) -> LaplaceReport:
    """Residual of the discrete Laplace equation induced by nu.

    Quads with nu_i == nu_j have a singular coefficient; they are reported
    and excluded rather than failing the whole net.
    """
    nu = kd.nu.values
    worst = 0.0
    singular = []
    diam = net.diameter()
    for i, j in combinations(range(net.m), 2):
        n = _crop(nu, i, j, 0, 0)
        ni = _crop(nu, i, j, 1, 0)
        nj = _crop(nu, i, j, 0, 1)
        nij = _crop(nu, i, j, 1, 1)
        f = _crop(net.vertices, i, j, 0, 0)
        fi = _crop(net.vertices, i, j, 1, 0)
        fj = _crop(net.vertices, i, j, 0, 1)
        fij = _crop(net.vertices, i, j, 1, 1)
        sing = np.abs(ni - nj) <= tol.incidence * (np.abs(ni) + np.abs(nj))
        denom = np.where(sing, 1.0, n * (ni - nj))
        c1 = (nj * nij - n * ni) / denom
        c2 = -(ni * nij - n * nj) / denom
        lhs = fij - fi - fj + f
        rhs = c1[..., None] * (fi - f) + c2[..., None] * (fj - f)
        res = np.linalg.norm(lhs - rhs, axis=-1) / diam
        if np.any(sing):
            for idx in zip(*np.nonzero(sing)):
                singular.append((idx, i, j))
            res = np.where(sing, 0.0, res)
        worst = max(worst, float(res.max()))
    return LaplaceReport(max_residual=worst, singular_quads=singular)


# --- Moutard nets --------------------------------------------------------------


@dataclass
class MoutardNet:
    """Lattice map into R^{N+1} (homogeneous chart) or R^{N+1,1} (flat
    light-cone layout [spatial..., e0, einf]) with per-quad Moutard
    coefficients satisfying tau_i tau_j y - y = a_ij (tau_j y - tau_i y)."""

    points: np.ndarray
    coeffs: dict
    lightcone: bool = False

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)

    @property
    def m(self) -> int:
        return self.points.ndim - 1

    @property
    def extents(self):
        return self.points.shape[:-1]

    def moutard_residual(self) -> float:
        """Max relative defect of the minus-sign Moutard equation over all
        quads (for m >= 3 this includes the cross-face consistency)."""
        worst = 0.0
        for (i, j), a in self.coeffs.items():
            y = _crop(self.points, i, j, 0, 0)
            yi = _crop(self.points, i, j, 1, 0)
            yj = _crop(self.points, i, j, 0, 1)
            yij = _crop(self.points, i, j, 1, 1)
            lhs = yij - y
            rhs = a[..., None] * (yj - yi)
            scale = np.maximum(
                np.linalg.norm(lhs, axis=-1),
                np.maximum(np.linalg.norm(rhs, axis=-1), np.linalg.norm(y, axis=-1)),
            )
            rel = np.linalg.norm(lhs - rhs, axis=-1) / np.maximum(scale, 1e-300)
            worst = max(worst, float(rel.max()))
        return worst

    def project_homogeneous(self, tol: Tolerances = DEFAULT_TOL):
        """Inverse of the homogeneous lift: f from the first N components
        over the last one, nu as the reciprocal last component."""
        last = self.points[..., -1]
        scale = np.abs(self.points).max()
        if np.any(np.abs(last) <= tol.incidence * scale):
            u = np.unravel_index(int(np.argmin(np.abs(last))), last.shape)
            raise VanishingLastComponent(f"projected point at infinity at {u}")
        f = self.points[..., :-1] / last[..., None]
        return QNet(f), VertexScalar(1.0 / last)


def moutard_lift(net: QNet, kd: KoenigsData, tol: Tolerances = DEFAULT_TOL, check: bool = True) -> MoutardNet:
    """Moutard representative y = (f, 1) / nu with coefficients
    a_ij = (1/nu_ij - 1/nu) / (1/nu_j - 1/nu_i)."""
    nu = kd.nu.values
    if np.any(nu == 0.0):
        raise ZeroNu("nu vanishes at a vertex")
    y = np.concatenate([net.vertices, np.ones(net.extents + (1,))], axis=-1) / nu[..., None]
    coeffs = {}
    for i, j in combinations(range(net.m), 2):
        w = 1.0 / nu
        winv = _crop(w, i, j, 0, 0)
        wi = _crop(w, i, j, 1, 0)
        wj = _crop(w, i, j, 0, 1)
        wij = _crop(w, i, j, 1, 1)
        denom = wj - wi
        if np.any(np.abs(denom) <= tol.incidence * (np.abs(wi) + np.abs(wj))):
            raise EqualNuOnWhiteDiagonal("nu_i == nu_j on a quad; Moutard coefficient singular")
        coeffs[(i, j)] = (wij - winv) / denom
    mn = MoutardNet(points=y, coeffs=coeffs)
    if check:
        res = mn.moutard_residual()
        if res > tol.product:
            raise NotKoenigs(f"Moutard residual {res:.3e} exceeds tolerance")
    return mn


def moutard_evolve(axes_data, coeffs, lightcone: bool = False) -> MoutardNet:
    """Solve the minus-sign Moutard equation as an initial value problem.

    For m = 2, ``axes_data`` is a pair of arrays (y on the axis u_2 = 0 and
    on u_1 = 0, consistent at the origin) and ``coeffs`` maps (0, 1) to the
    per-quad coefficient array.  For m = 3, ``axes_data`` is a dict
    {(0,1): plane u_3 = 0, (0,2): plane u_2 = 0, (1,2): plane u_1 = 0} and
    the interior is filled through the (0, 1) faces; cross-face consistency
    is the caller's responsibility and is reported by
    :meth:`MoutardNet.moutard_residual`.
    """
    if isinstance(axes_data, dict):
        return _moutard_evolve_3d(axes_data, coeffs, lightcone)
    y1, y2 = (np.asarray(a, dtype=float) for a in axes_data)
    if not np.allclose(y1[0], y2[0]):
        raise ValueError("axis data disagree at the origin")
    a01 = np.asarray(coeffs[(0, 1)], dtype=float)
    n1, n2 = y1.shape[0], y2.shape[0]
    d = y1.shape[1]
    y = np.empty((n1, n2, d))
    y[:, 0] = y1
    y[0, :] = y2
    for u1 in range(1, n1):
        for u2 in range(1, n2):
            y[u1, u2] = y[u1 - 1, u2 - 1] + a01[u1 - 1, u2 - 1] * (y[u1 - 1, u2] - y[u1, u2 - 1])
    if not np.all(np.isfinite(y)):
        raise ValueError("Moutard evolution produced non-finite values")
    return MoutardNet(points=y, coeffs={(0, 1): a01}, lightcone=lightcone)


def _moutard_evolve_3d(planes, coeffs, lightcone: bool) -> MoutardNet:
    p01 = np.asarray(planes[(0, 1)], dtype=float)
    p02 = np.asarray(planes[(0, 2)], dtype=float)
    p12 = np.asarray(planes[(1, 2)], dtype=float)
    n1, n2, d = p01.shape
    n3 = p02.shape[1]
    y = np.empty((n1, n2, n3, d))
    y[:, :, 0] = p01
    y[:, 0, :] = p02
    y[0, :, :] = p12
    a01 = np.asarray(coeffs[(0, 1)], dtype=float)  # shape (n1-1, n2-1, n3)
    for u3 in range(1, n3):
        for u1 in range(1, n1):
            for u2 in range(1, n2):
                y[u1, u2, u3] = y[u1 - 1, u2 - 1, u3] + a01[u1 - 1, u2 - 1, u3] * (
                    y[u1 - 1, u2, u3] - y[u1, u2 - 1, u3]
                )
    full = {(0, 1): a01}
    for key in ((0, 2), (1, 2)):
        if key in coeffs:
            full[key] = np.asarray(coeffs[key], dtype=float)
    return MoutardNet(points=y, coeffs=full, lightcone=lightcone)


# --- geometric characterizations ----------------------------------------------


@dataclass
class Vertex2DRecord:
    u: tuple
    excluded: bool  # planar vertex, precondition violated
    rank_m_points: float | None  # criterion (a) residual
    rank_vertices: float | None  # criterion (b) residual, N >= 4
    common_line: float | None  # criterion (c) residual, N = 3


@dataclass
class Geometric2DReport:
    passed: bool
    records: list
    max_residual: float


def _rank_residual(points: np.ndarray, rank: int) -> float:
    """Relative size of the first singular value beyond the target affine rank."""
    pts = np.asarray(points, dtype=float)
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if len(sv) <= rank or sv[0] == 0.0:
        return 0.0
    return float(sv[rank] / sv[0])


def check_koenigs_2d_geometric(
    net: QNet,
    tol: Tolerances = DEFAULT_TOL,
    form: DiagonalForm | None = None,
) -> Geometric2DReport:
    """Geometric Koenigs tests at every interior vertex of a 2d net.

    (a) the four diagonal intersection points of the adjacent quads are
    coplanar; (b) for N >= 4, the five points f, f_{+-1,+-2} lie in a
    3-space; (c) for N = 3, the three planes through f spanned by opposite
    corner points and by the axis-1 neighbours share a line.  Vertices that
    are planar together with their four neighbours violate the precondition
    and are excluded from the verdict.
    """
    if net.m != 2:
        raise DimensionTooLow("2d characterization needs m == 2")
    if net.ambient_dim < 3:
        raise DimensionTooLow("vertex characterizations need N >= 3")
    if form is None:
        form = build_q_form(net, tol)
    mpts = form.m_points[(0, 1)]
    v = net.vertices
    records = []
    max_res = 0.0
    passed = True
    for u1, u2 in net.interior_indices():
        f = v[u1, u2]
        neighbours = [v[u1 + 1, u2], v[u1 - 1, u2], v[u1, u2 + 1], v[u1, u2 - 1]]
        if affine_rank([f] + neighbours, tol.incidence) <= 2:
            records.append(Vertex2DRecord((u1, u2), True, None, None, None))
            continue
        ms = [mpts[u1 - 1, u2 - 1], mpts[u1, u2 - 1], mpts[u1 - 1, u2], mpts[u1, u2]]
        res_a = _rank_residual(np.stack(ms), 2)
        res_b = None
        res_c = None
        corners = [v[u1 + 1, u2 + 1], v[u1 + 1, u2 - 1], v[u1 - 1, u2 + 1], v[u1 - 1, u2 - 1]]
        if net.ambient_dim >= 4:
            res_b = _rank_residual(np.stack([f] + corners), 3)
        if net.ambient_dim == 3:
            n_up = np.cross(v[u1 + 1, u2 + 1] - f, v[u1 - 1, u2 + 1] - f)
            n_down = np.cross(v[u1 + 1, u2 - 1] - f, v[u1 - 1, u2 - 1] - f)
            n_1 = np.cross(v[u1 + 1, u2] - f, v[u1 - 1, u2] - f)
            normals = np.stack([
                n_up / np.linalg.norm(n_up),
                n_down / np.linalg.norm(n_down),
                n_1 / np.linalg.norm(n_1),
            ])
            res_c = float(abs(np.linalg.det(normals)))
        records.append(Vertex2DRecord((u1, u2), False, res_a, res_b, res_c))
        max_res = max(max_res, res_a)
        if res_a > tol.product:
            passed = False
    return Geometric2DReport(passed=passed, records=records, max_residual=max_res)


@dataclass
class Hexahedron3DRecord:
    u: tuple
    axes: tuple
    black_residual: float
    white_residual: float
    corner_residuals: list


@dataclass
class Geometric3DReport:
    passed: bool
    records: list
    max_residual: float


def check_koenigs_3d_geometric(
    net: QNet,
    tol: Tolerances = DEFAULT_TOL,
    form: DiagonalForm | None = None,
) -> Geometric3DReport:
    """Per-hexahedron Koenigs tests for m >= 3: coplanarity of the four black
    and the four white vertices, and collinearity of the three adjacent-face
    diagonal intersection points at every corner."""
    if net.m < 3:
        raise DimensionTooLow("3d characterization needs m >= 3")
    if form is None:
        form = build_q_form(net, tol)
    records = []
    max_res = 0.0
    passed = True
    for axes in combinations(range(net.m), 3):
        i, j, k = axes
        ranges = [
            range(e - 1) if ax in axes else range(e)
            for ax, e in enumerate(net.extents)
        ]
        for w in product(*ranges):
            black = [net.vertex(w), net.vertex(_shift(w, i, j)),
                     net.vertex(_shift(w, i, k)), net.vertex(_shift(w, j, k))]
            white = [net.vertex(_shift(w, i)), net.vertex(_shift(w, j)),
                     net.vertex(_shift(w, k)), net.vertex(_shift(w, i, j, k))]
            res_black = _rank_residual(np.stack(black), 2)
            res_white = _rank_residual(np.stack(white), 2)
            corner_res = []
            for bits in product((0, 1), repeat=3):
                ms = []
                for p, q in combinations(axes, 2):
                    r = next(ax for ax in axes if ax not in (p, q))
                    base = list(w)
                    base[r] += bits[axes.index(r)]
                    ms.append(form.m_points[(p, q)][tuple(base)])
                corner_res.append(_rank_residual(np.stack(ms), 1))
            rec = Hexahedron3DRecord(w, axes, res_black, res_white, corner_res)
            records.append(rec)
            worst = max(res_black, res_white, max(corner_res))
            max_res = max(max_res, worst)
            if worst > tol.product:
                passed = False
    return Geometric3DReport(passed=passed, records=records, max_residual=max_res)


def normalize_nu_for_limit(kd: KoenigsData, axis: int, tol: Tolerances = DEFAULT_TOL) -> VertexScalar:
    """Remove the alternating sign of nu on an all-convex 2d net.

    Returns nu'(u) = (-1)^(u_axis) nu(u), flipped globally to be positive.
    Raises NotAlternating when the sign pattern of nu is inconsistent with
    the convexity assumption.
    """
    nu = kd.nu.values
    if nu.ndim != 2:
        raise DimensionTooLow("sign normalization is defined for m == 2")
    if axis not in (0, 1):
        raise ValueError("axis must be 0 or 1")
    idx = np.indices(nu.shape)[axis]
    switched = np.where(idx % 2 == 0, nu, -nu)
    if np.all(switched > 0):
        return VertexScalar(switched)
    if np.all(switched < 0):
        return VertexScalar(-switched)
    raise NotAlternating("sign of nu does not alternate along the chosen axis")


def switched_laplace_residual(net: QNet, nu_prime: VertexScalar) -> float:
    """Residual of the discrete Laplace equation in the sign-switched
    convention, where the coefficient denominator is nu'(nu'_1 + nu'_2)."""
    if net.m != 2:
        raise DimensionTooLow("the switched convention is defined for m == 2")
    nu = nu_prime.values
    n = nu[:-1, :-1]
    n1 = nu[1:, :-1]
    n2 = nu[:-1, 1:]
    n12 = nu[1:, 1:]
    f = net.vertices[:-1, :-1]
    f1 = net.vertices[1:, :-1]
    f2 = net.vertices[:-1, 1:]
    f12 = net.vertices[1:, 1:]
    denom = n * (n1 + n2)
    if np.any(denom == 0.0):
        raise ZeroNu("nu' vanishes or nu'_1 + nu'_2 == 0")
    c1 = (n2 * n12 - n * n1) / denom
    c2 = (n1 * n12 - n * n2) / denom
    lhs = f12 - f1 - f2 + f
    rhs = c1[..., None] * (f1 - f) + c2[..., None] * (f2 - f)
    return float(np.linalg.norm(lhs - rhs, axis=-1).max() / net.diameter())


def switched_moutard_residual(mn: MoutardNet, axis: int) -> float:
    """Max relative defect of the plus-sign Moutard equation
    tau_1 tau_2 y' + y' = a'(tau_1 y' + tau_2 y') for the switched lift
    y'(u) = (-1)^(u_axis) y(u); a' = -a for axis 0 and +a for axis 1."""
    if mn.m != 2:
        raise DimensionTooLow("the switched convention is defined for m == 2")
    idx = np.indices(mn.extents)[axis]
    y = np.where((idx % 2 == 0)[..., None], mn.points, -mn.points)
    a = -mn.coeffs[(0, 1)] if axis == 0 else mn.coeffs[(0, 1)]
    lhs = y[1:, 1:] + y[:-1, :-1]
    rhs = a[..., None] * (y[1:, :-1] + y[:-1, 1:])
    scale = np.abs(y).max()
    return float(np.linalg.norm(lhs - rhs, axis=-1).max() / scale)
