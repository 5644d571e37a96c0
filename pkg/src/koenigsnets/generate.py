"""Generators for test and demo nets.

All randomness goes through a caller-supplied ``numpy.random.Generator`` so
every construction is reproducible from a seed.
"""
from __future__ import annotations

from itertools import combinations, product

import numpy as np

from .errors import DegenerateQuad, VanishingLastComponent
from .geom import DEFAULT_TOL, Tolerances, lift_to_lightcone
from .isothermic import IsothermicNet, lightcone_evolve, three_leg_evolve
from .koenigs import MoutardNet, moutard_evolve
from .qnet import EdgeLabelling, QNet, VertexScalar, quad_points

__all__ = [
    "grid",
    "random_koenigs_2d",
    "random_koenigs_3d",
    "random_qnet_3d",
    "random_isothermic_2d",
    "random_isothermic_lightcone",
    "perturb_in_plane",
    "apply_projective",
    "random_projective",
    "apply_moebius",
    "flip_corner_cross_ratio",
]


def grid(extents, ambient_dim: int = 3, spacing: float = 1.0) -> QNet:
    """Regular coordinate grid embedded in the first m coordinate planes."""
    m = len(extents)
    if ambient_dim < m:
        raise ValueError("ambient dimension below lattice dimension")
    coords = np.meshgrid(*(spacing * np.arange(e) for e in extents), indexing="ij")
    verts = np.zeros(tuple(extents) + (ambient_dim,))
    for ax in range(m):
        verts[..., ax] = coords[ax]
    return QNet(verts)


def _random_axis_curve(n: int, axis: int, ambient_dim: int, rng, noise: float) -> np.ndarray:
    """Near-straight polyline along a coordinate axis with bounded noise."""
    pts = np.zeros((n, ambient_dim))
    pts[:, axis % ambient_dim] = np.arange(n)
    pts += noise * rng.standard_normal((n, ambient_dim))
    pts[0] = 0.0  # shared origin across axes
    return pts


# per-axis growth factors of w = 1 / nu; the Moutard coefficient matching
# a_ij = (A_i A_j - 1) / (A_j - A_i) is then well away from 0 and infinity,
# and the diagonal ratio q_ij = 1 / (A_i A_j) stays away from 1.
_W_FACTORS = (-1.0, 2.0, -1.0 / 3.0, 3.0)


def _base_coeff(i: int, j: int) -> float:
    ai, aj = _W_FACTORS[i], _W_FACTORS[j]
    return (ai * aj - 1.0) / (aj - ai)


def random_koenigs_2d(extents, ambient_dim: int = 3, rng=None, noise: float = 0.05) -> QNet:
    """Random 2d Koenigs net from a Moutard evolution in homogeneous
    coordinates, projected back to R^N."""
    rng = np.random.default_rng(rng)
    n1, n2 = extents
    y1 = _homogeneous_axis(n1, 0, ambient_dim, rng, noise)
    y2 = _homogeneous_axis(n2, 1, ambient_dim, rng, noise)
    y2[0] = y1[0]
    a = _base_coeff(0, 1) + noise * rng.standard_normal((n1 - 1, n2 - 1))
    mn = moutard_evolve((y1, y2), {(0, 1): a})
    net, _ = mn.project_homogeneous()
    return net


def _homogeneous_axis(n: int, axis: int, ambient_dim: int, rng, noise: float) -> np.ndarray:
    f = _random_axis_curve(n, axis, ambient_dim, rng, noise)
    w = _W_FACTORS[axis] ** np.arange(n) * (1.0 + noise * rng.standard_normal(n))
    return np.concatenate([f, np.ones((n, 1))], axis=-1) * w[:, None]


def random_koenigs_3d(extents, ambient_dim: int = 3, rng=None, noise: float = 0.04):
    """Random 3d Koenigs net; see :func:`random_koenigs_nd`."""
    return random_koenigs_nd(extents, ambient_dim, rng, noise)


def random_koenigs_nd(extents, ambient_dim: int = 3, rng=None, noise: float = 0.04):
    """Random Koenigs net for lattice dimension m >= 3 (m <= 4 supported).

    The coordinate planes are evolved independently; every other point is
    the common intersection of the face lines of a hexahedron below it (the
    Moutard evolution closes around cubes, so the lines meet).  Returns
    ``(net, nu, moutard_net)``.
    """
    rng = np.random.default_rng(rng)
    m = len(extents)
    if not 3 <= m <= len(_W_FACTORS):
        raise ValueError(f"lattice dimension must be 3..{len(_W_FACTORS)}")
    axes = [_homogeneous_axis(n, ax, ambient_dim, rng, noise) for ax, n in enumerate(extents)]
    for ax in range(1, m):
        axes[ax][0] = axes[0][0]
    dim = ambient_dim + 1
    y = np.full(tuple(extents) + (dim,), np.nan)
    # coordinate planes by independent 2d evolutions
    planes = list(combinations(range(m), 2))
    for i, j in planes:
        ni, nj = y.shape[i], y.shape[j]
        a = _base_coeff(i, j) + noise * rng.standard_normal((ni - 1, nj - 1))
        mn2 = moutard_evolve((axes[i], axes[j]), {(0, 1): a})
        sl = [0] * m + [slice(None)]
        sl[i] = slice(None)
        sl[j] = slice(None)
        y[tuple(sl)] = mn2.points
    # remaining points in order of |u|, each from the hexahedron spanned by
    # its first three positive axes
    order = sorted(product(*(range(n) for n in extents)), key=sum)
    for u in order:
        if not np.any(np.isnan(y[u])):
            continue
        i, j, k = [ax for ax in range(m) if u[ax] > 0][:3]
        b = list(u)
        b[i] -= 1
        b[j] -= 1
        b[k] -= 1
        b = tuple(b)

        def at(*shift, b=b):
            v = list(b)
            for ax in shift:
                v[ax] += 1
            return y[tuple(v)]

        # y_ijk - y_k || y_jk - y_ik and y_ijk - y_i || y_ik - y_ij
        y[u] = _intersect_lines(at(k), at(j, k) - at(i, k), at(i), at(i, k) - at(i, j))
    coeffs = {pair: _fit_moutard_coeffs(y, *pair) for pair in planes}
    mn = MoutardNet(points=y, coeffs=coeffs, lightcone=False)
    net, nu = mn.project_homogeneous()
    return net, nu, mn


def _intersect_lines(p, d1, q, d2) -> np.ndarray:
    """Least-squares intersection of p + t d1 and q + s d2 in R^n."""
    A = np.stack([d1, -d2], axis=1)
    sol, _, rank, _ = np.linalg.lstsq(A, q - p, rcond=None)
    if rank < 2:
        raise DegenerateQuad("parallel Moutard lines in hexahedron fill")
    return p + sol[0] * d1


def _fit_moutard_coeffs(y: np.ndarray, i: int, j: int) -> np.ndarray:
    """Per-quad least-squares coefficient of y_ij - y = a (y_j - y_i)."""
    sl0 = [slice(0, -1) if ax in (i, j) else slice(None) for ax in range(y.ndim - 1)]

    def crop(oi, oj):
        sl = list(sl0)
        sl[i] = slice(1, None) if oi else slice(0, -1)
        sl[j] = slice(1, None) if oj else slice(0, -1)
        return y[tuple(sl)]

    d = crop(0, 1) - crop(1, 0)
    lhs = crop(1, 1) - crop(0, 0)
    return (lhs * d).sum(axis=-1) / (d * d).sum(axis=-1)


def random_qnet_3d(extents, rng=None, noise: float = 0.08) -> QNet:
    """Random 3d Q-net that is generically not Koenigs.

    Coordinate planes carry independent random planar-quad nets; interior
    vertices are the intersection of the three face planes of their
    hexahedron (Q-nets propagate this way in R^3).
    """
    rng = np.random.default_rng(rng)
    n1, n2, n3 = extents
    f = np.full((n1, n2, n3, 3), np.nan)
    axis_curves = [_random_axis_curve(n, ax, 3, rng, noise) for ax, n in enumerate(extents)]
    # coordinate planes: random fourth vertices inside each quad plane
    for i, j in ((0, 1), (0, 2), (1, 2)):
        ni, nj = f.shape[i], f.shape[j]
        plane = np.zeros((ni, nj, 3))
        plane[:, 0] = axis_curves[i]
        plane[0, :] = axis_curves[j]
        for a in range(1, ni):
            for b in range(1, nj):
                p, pi, pj = plane[a - 1, b - 1], plane[a, b - 1], plane[a - 1, b]
                lam = 1.0 + noise * rng.standard_normal()
                mu = 1.0 + noise * rng.standard_normal()
                plane[a, b] = p + lam * (pi - p) + mu * (pj - p)
        sl = [0, 0, 0, slice(None)]
        sl[i] = slice(None)
        sl[j] = slice(None)
        f[tuple(sl)] = plane
    for u in product(range(1, n1), range(1, n2), range(1, n3)):
        u1, u2, u3 = u
        corners = {
            (1, 1, 0): f[u1, u2, u3 - 1],
            (1, 0, 1): f[u1, u2 - 1, u3],
            (0, 1, 1): f[u1 - 1, u2, u3],
            (1, 0, 0): f[u1, u2 - 1, u3 - 1],
            (0, 1, 0): f[u1 - 1, u2, u3 - 1],
            (0, 0, 1): f[u1 - 1, u2 - 1, u3],
        }
        # face planes through (f_i, f_ij, f_ik) for each axis i of the cube top
        normals, offsets = [], []
        for triple in (
            ((1, 0, 0), (1, 1, 0), (1, 0, 1)),
            ((0, 1, 0), (1, 1, 0), (0, 1, 1)),
            ((0, 0, 1), (1, 0, 1), (0, 1, 1)),
        ):
            p0, p1, p2 = (corners[t] for t in triple)
            n = np.cross(p1 - p0, p2 - p0)
            normals.append(n)
            offsets.append(np.dot(n, p0))
        f[u] = np.linalg.solve(np.stack(normals), np.array(offsets))
    return QNet(f)


def random_isothermic_2d(extents, ambient_dim: int = 3, rng=None, noise: float = 0.05) -> IsothermicNet:
    """Random 2d isothermic net from the three-leg evolution with labels
    alpha_1 near 1 and alpha_2 near -1 (embedded quads)."""
    rng = np.random.default_rng(rng)
    n1, n2 = extents
    f1 = _random_axis_curve(n1, 0, ambient_dim, rng, noise)
    f2 = _random_axis_curve(n2, 1, ambient_dim, rng, noise)
    f2[0] = f1[0]
    labels = EdgeLabelling((
        1.0 + noise * rng.standard_normal(n1 - 1),
        -1.0 + noise * rng.standard_normal(n2 - 1),
    ))
    return three_leg_evolve((f1, f2), labels)


def random_isothermic_lightcone(extents, ambient_dim: int = 3, rng=None, noise: float = 0.05):
    """Random isothermic net (m = 2 or 3) from isotropic Moutard data.

    Axis data are light-cone lifts y = (f + e_0 + |f|^2 e_inf) / s of random
    axis curves with random metric values s.  Returns ``(MoutardNet,
    IsothermicNet)``.
    """
    rng = np.random.default_rng(rng)
    m = len(extents)
    axes = []
    for ax, n in enumerate(extents):
        f = _random_axis_curve(n, ax, ambient_dim, rng, noise)
        sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0) if ax == 1 else np.ones(n)
        s = sign * (1.0 + noise * rng.standard_normal(n))
        y = np.stack([lift_to_lightcone(p).as_array() for p in f]) / s[:, None]
        axes.append(y)
    for ax in range(1, m):
        axes[ax][0] = axes[0][0]
    return lightcone_evolve(axes)


def perturb_in_plane(net: QNet, rng=None, magnitude: float = 1e-2) -> QNet:
    """Move one window-corner vertex inside the plane of its only quad.

    Planarity of every elementary quad is preserved, so the result is still
    a Q-net, but diagonal products and duality generically break.
    """
    rng = np.random.default_rng(rng)
    corner = tuple(e - 1 for e in net.extents)
    base = tuple(c - 1 for c in corner[:2]) + corner[2:]
    pts = quad_points(net, base, 0, 1)
    e1 = pts[1] - pts[0]
    e2 = pts[3] - pts[0]
    step = rng.standard_normal() * e1 + rng.standard_normal() * e2
    step *= magnitude * net.diameter() / np.linalg.norm(step)
    verts = net.vertices.copy()
    verts[corner] = verts[corner] + step
    return QNet(verts)


def random_projective(ambient_dim: int, rng=None, spread: float = 0.1) -> np.ndarray:
    """Random projective transformation near the identity, as an
    (N+1) x (N+1) matrix acting on homogeneous coordinates."""
    rng = np.random.default_rng(rng)
    return np.eye(ambient_dim + 1) + spread * rng.standard_normal((ambient_dim + 1,) * 2)


def apply_projective(net: QNet, matrix: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> QNet:
    """Apply a projective map in homogeneous coordinates."""
    homog = np.concatenate([net.vertices, np.ones(net.extents + (1,))], axis=-1)
    image = homog @ np.asarray(matrix, dtype=float).T
    last = image[..., -1]
    if np.any(np.abs(last) <= tol.incidence * np.abs(image).max()):
        raise VanishingLastComponent("projective image passes through infinity")
    return QNet(image[..., :-1] / last[..., None])


def apply_moebius(net: QNet, center=None, radius: float = 1.0, shift=None, scale: float = 1.0) -> QNet:
    """Similarity followed by an inversion f -> c + r^2 (f - c) / |f - c|^2.

    The center must lie off the net; circles map to circles, so circularity
    and isothermicity are preserved.
    """
    f = scale * net.vertices
    if shift is not None:
        f = f + np.asarray(shift, dtype=float)
    if center is None:
        lo = f.reshape(-1, net.ambient_dim).min(axis=0)
        center = lo - 1.5 * np.ones(net.ambient_dim)  # safely outside the window
    center = np.asarray(center, dtype=float)
    d = f - center
    norm2 = (d * d).sum(axis=-1, keepdims=True)
    if np.any(norm2 == 0.0):
        raise ValueError("inversion center lies on the net")
    return QNet(center + radius**2 * d / norm2)


def flip_corner_cross_ratio(iso: IsothermicNet, tol: Tolerances = DEFAULT_TOL):
    """Break isothermicity while keeping the discrete-metric factorization.

    In the last quad of a 2d net, the corner vertex f_12 is replaced by the
    second intersection of the quad's circumcircle with the circle of points
    at a fixed distance ratio from f_1 and f_2.  Both edge lengths into the
    corner rescale by the same factor, so |f_i - f|^2 = alpha_i s s_i still
    holds with one adjusted value of s, but the quad stops being embedded
    and its cross-ratio changes sign.  Returns ``(QNet, VertexScalar)``.
    """
    net = iso.net
    if net.m != 2:
        raise ValueError("corner construction is for m == 2")
    corner = tuple(e - 1 for e in net.extents)
    base = tuple(c - 1 for c in corner)
    pts = quad_points(net, base, 0, 1)  # (f, f_1, f_12, f_2)
    from .geom import plane_frame, to_plane_coords

    frame = plane_frame(pts)
    z, zi, zij, zj = (complex(p[0], p[1]) for p in to_plane_coords(pts, frame))
    c_circ, r_circ = _circumcircle(z, zi, zj)
    k = abs(zij - zi) / abs(zij - zj)
    if abs(k - 1.0) < 1e-12:
        c_apo, r_apo = None, None  # ratio 1: the locus is the perpendicular bisector
        new = _reflect_across_line(zij, zi, zj, c_circ, r_circ)
    else:
        c_apo = (zi - k**2 * zj) / (1.0 - k**2)
        r_apo = np.sqrt(abs(c_apo - zi) * abs(c_apo - zj))
        new = _second_circle_intersection(c_circ, r_circ, c_apo, r_apo, zij)
    origin, u, v = frame
    new_pt = origin + new.real * u + new.imag * v
    verts = net.vertices.copy()
    verts[corner] = new_pt
    s = iso.metric.values.copy()
    # both edge lengths into the corner scale by the same factor, so one
    # rescaled metric value repairs both factorizations (gauge-free)
    d_new = new_pt - pts[1]
    d_old = pts[2] - pts[1]
    s[corner] *= float((d_new * d_new).sum() / (d_old * d_old).sum())
    return QNet(verts), VertexScalar(s)


def _plus(u, axis):
    v = list(u)
    v[axis] += 1
    return tuple(v)


def _circumcircle(z1: complex, z2: complex, z3: complex):
    """Center and radius of the circle through three complex points."""
    ax, ay = z1.real, z1.imag
    bx, by = z2.real, z2.imag
    cx, cy = z3.real, z3.imag
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        raise DegenerateQuad("collinear points have no circumcircle")
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    center = complex(ux, uy)
    return center, abs(z1 - center)


def _second_circle_intersection(c1: complex, r1: float, c2: complex, r2: float, known: complex) -> complex:
    """The intersection point of two circles that is not ``known``."""
    d = abs(c2 - c1)
    if d == 0.0:
        raise DegenerateQuad("concentric circles")
    a = (r1**2 - r2**2 + d**2) / (2.0 * d)
    h2 = r1**2 - a**2
    h = np.sqrt(max(h2, 0.0))
    axis = (c2 - c1) / d
    mid = c1 + a * axis
    p1 = mid + 1j * h * axis
    p2 = mid - 1j * h * axis
    return p1 if abs(p1 - known) > abs(p2 - known) else p2


def _reflect_across_line(z: complex, zi: complex, zj: complex, c: complex, r: float) -> complex:
    """Reflect z across the perpendicular bisector of (zi, zj); stays on the
    circumcircle (c, r) because the bisector passes through its center."""
    mid = 0.5 * (zi + zj)
    direction = 1j * (zj - zi) / abs(zj - zi)
    return mid + direction * ((z - mid) / direction).conjugate()
