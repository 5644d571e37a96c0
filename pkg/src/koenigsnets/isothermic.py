"""Discrete isothermic nets: circular Koenigs nets.

Circularity and cross-ratio checks, edge labels, the discrete metric s,
Christoffel transforms, the three-leg evolution, and Moutard representatives
in the Minkowski light cone.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .errors import (
    DimensionTooLow,
    EqualLabels,
    FormNotClosed,
    InconsistentCrossRatios,
    NotCircular,
    NullDiagonalDifference,
    ZeroEdge,
    ZeroLeg,
    ZeroMetric,
)
from .geom import (
    DEFAULT_TOL,
    Tolerances,
    circularity_residual,
    cross_ratio,
    minkowski_dot_arrays,
    plane_frame,
    to_plane_coords,
)
from .koenigs import (
    MoutardNet,
    _crop,
    _integrate_one_form,
    _one_form_closure_residual,
    _shift,
    integrate_nu,
)
from .qnet import EdgeLabelling, QNet, VertexScalar, quad_points

__all__ = [
    "IsothermicNet",
    "CircularityReport",
    "IsothermicReport",
    "check_circular",
    "quad_cross_ratios",
    "check_isothermic",
    "recover_labels",
    "recover_metric",
    "christoffel",
    "christoffel_form_residual",
    "three_leg_evolve",
    "lightcone_lift",
    "lightcone_evolve",
    "check_moebius_characterizations",
    "central_sphere",
]


@dataclass
class IsothermicNet:
    """Circular Koenigs net together with its labels and discrete metric."""

    net: QNet
    labels: EdgeLabelling
    metric: VertexScalar


@dataclass
class CircularityReport:
    passed: bool
    max_residual: float
    offenders: list


def check_circular(net: QNet, tol: Tolerances = DEFAULT_TOL) -> CircularityReport:
    """Per-quad concircularity residuals; passes iff all <= tol.incidence."""
    max_res = 0.0
    offenders = []
    for i, j in combinations(range(net.m), 2):
        for u in net.base_indices(i, j):
            pts = quad_points(net, u, i, j)
            res = circularity_residual(*pts, tol=tol)
            max_res = max(max_res, res)
            if res > tol.incidence:
                offenders.append((u, i, j, res))
    return CircularityReport(passed=max_res <= tol.incidence, max_residual=max_res, offenders=offenders)


def quad_cross_ratios(net: QNet, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Cross-ratio q(f, f_i, f_ij, f_j) of every elementary quad, keyed by
    axis pair, as arrays over the quad base grid."""
    out = {}
    for i, j in combinations(range(net.m), 2):
        shape = tuple(e - 1 if ax in (i, j) else e for ax, e in enumerate(net.extents))
        arr = np.empty(shape)
        for u in net.base_indices(i, j):
            pts = quad_points(net, u, i, j)
            arr[u] = cross_ratio(*pts, tol=tol)
        out[(i, j)] = arr
    return out


@dataclass
class IsothermicReport:
    passed: bool
    max_residual: float
    failures: list
    cross_ratios: dict


def check_isothermic(net: QNet, tol: Tolerances = DEFAULT_TOL, cross_ratios: dict | None = None) -> IsothermicReport:
    """Cross-ratio products of adjacent quadrilaterals.

    For m = 2 the condition q * q_{-1,-2} = q_{-1} * q_{-2} at every interior
    vertex; for m >= 3 the triple product over the three forward faces at
    every vertex equals 1.  Requires a circular net.
    """
    circ = check_circular(net, tol)
    if not circ.passed:
        raise NotCircular(f"net is not circular (max residual {circ.max_residual:.3e})")
    if cross_ratios is None:
        cross_ratios = quad_cross_ratios(net, tol)
    failures = []
    max_res = 0.0
    if net.m == 2:
        cr = cross_ratios[(0, 1)]
        lhs = cr[1:, 1:] * cr[:-1, :-1]
        rhs = cr[:-1, 1:] * cr[1:, :-1]
        res = np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs))
        max_res = float(res.max())
        for idx in zip(*np.nonzero(res > tol.product)):
            failures.append((f"interior vertex {tuple(x + 1 for x in idx)}", float(res[idx])))
    else:
        for i, j, k in combinations(range(net.m), 3):
            qij = cross_ratios[(i, j)]
            qjk = cross_ratios[(j, k)]
            qik = cross_ratios[(i, k)]
            ranges = [
                range(e - 1) if ax in (i, j, k) else range(e)
                for ax, e in enumerate(net.extents)
            ]
            for u in product(*ranges):
                prod = qij[u] * qjk[u] / qik[u]
                res = abs(prod - 1.0)
                max_res = max(max_res, res)
                if res > tol.product:
                    failures.append((f"corner {u} axes ({i},{j},{k})", res))
    return IsothermicReport(
        passed=max_res <= tol.product,
        max_residual=max_res,
        failures=failures,
        cross_ratios=cross_ratios,
    )


def recover_labels(net: QNet, tol: Tolerances = DEFAULT_TOL, cross_ratios: dict | None = None) -> EdgeLabelling:
    """Solve q(f, f_i, f_ij, f_j) = alpha_i / alpha_j for the edge labels.

    Gauge alpha_1(0) = 1; labels are unique up to one global scale.  Raises
    InconsistentCrossRatios if the factorization does not reproduce every
    quad's cross-ratio.
    """
    if net.m not in (2, 3):
        raise DimensionTooLow("label recovery supports m = 2 or 3")
    if cross_ratios is None:
        cross_ratios = quad_cross_ratios(net, tol)
    per_axis = [np.empty(e - 1) for e in net.extents]
    per_axis[0][0] = 1.0
    origin = tuple(0 for _ in range(net.m))
    # alpha_j(0) from the first quad in each (0, j) plane
    for j in range(1, net.m):
        per_axis[j][0] = per_axis[0][0] / cross_ratios[(0, j)][origin]
    # layers along axis 0 from the (0, 1) plane, transverse axes at 0
    for u0 in range(1, net.extents[0] - 1):
        u = (u0,) + origin[1:]
        per_axis[0][u0] = cross_ratios[(0, 1)][u] * per_axis[1][0]
    for j in range(1, net.m):
        for uj in range(1, net.extents[j] - 1):
            u = tuple(uj if ax == j else 0 for ax in range(net.m))
            per_axis[j][uj] = per_axis[0][0] / cross_ratios[(0, j)][u]
    labels = EdgeLabelling(tuple(per_axis))
    # consistency: every quad's cross-ratio must factor as alpha_i / alpha_j
    for (i, j), cr in cross_ratios.items():
        for u in net.base_indices(i, j):
            expected = labels.label(i, u[i]) / labels.label(j, u[j])
            if abs(cr[u] - expected) > tol.product * max(abs(cr[u]), abs(expected)):
                raise InconsistentCrossRatios(
                    f"quad {u} axes ({i},{j}): cross-ratio {cr[u]:.6g} != {expected:.6g}"
                )
    return labels


def recover_metric(
    net: QNet,
    base_black=None,
    base_white=None,
    tol: Tolerances = DEFAULT_TOL,
    check: bool = True,
) -> VertexScalar:
    """Discrete metric s from the diagonal-ratio propagation.

    Same integration as nu for general Koenigs nets; additionally asserts the
    labelling property of alpha_i = |f_i - f|^2 / (s s_i).
    """
    kd = integrate_nu(net, base_black, base_white, tol, check=check)
    s = kd.nu.values
    if check:
        for i in range(net.m):
            alpha = _edge_alpha(net, s, i)
            # constant across every transverse axis
            for ax in range(net.m):
                if ax == i:
                    continue
                spread = np.abs(alpha - alpha.take([0], axis=ax)).max()
                if spread > tol.product * np.abs(alpha).max():
                    raise InconsistentCrossRatios(
                        f"alpha_{i} is not constant along axis {ax} (spread {spread:.3e})"
                    )
    return VertexScalar(s)


def _edge_alpha(net: QNet, s: np.ndarray, i: int) -> np.ndarray:
    """alpha_i = |f_i - f|^2 / (s s_i) on every axis-i edge."""
    lo = [slice(None)] * net.m
    hi = [slice(None)] * net.m
    lo[i] = slice(0, -1)
    hi[i] = slice(1, None)
    df = net.vertices[tuple(hi)] - net.vertices[tuple(lo)]
    return (df * df).sum(axis=-1) / (s[tuple(lo)] * s[tuple(hi)])


def metric_labels(net: QNet, s: VertexScalar, tol: Tolerances = DEFAULT_TOL) -> EdgeLabelling:
    """Edge labelling alpha_i = |f_i - f|^2 / (s s_i), averaged per layer."""
    per_axis = []
    for i in range(net.m):
        alpha = _edge_alpha(net, s.values, i)
        other = tuple(ax for ax in range(net.m) if ax != i)
        per_axis.append(alpha.mean(axis=other) if other else alpha)
    return EdgeLabelling(tuple(per_axis))


def christoffel(
    iso: IsothermicNet,
    base=None,
    limit_signs: bool = False,
    tol: Tolerances = DEFAULT_TOL,
    check: bool = True,
) -> IsothermicNet:
    """Christoffel transform: integrate delta_i f* = alpha_i delta_i f / |delta_i f|^2.

    The result carries the same cross-ratios and the metric s* = 1/s.  With
    ``limit_signs`` the continuous-limit convention is applied to the returned
    decorations (s* made positive along axis 2, alpha_2 negated); the dual
    surface itself is the same.
    """
    net = iso.net
    forms = _christoffel_forms(net, iso.labels)
    residual = _one_form_closure_residual(net, forms)
    if check and residual > tol.product:
        raise FormNotClosed(f"Christoffel one-form not closed: residual {residual:.3e}")
    if base is None:
        base = (tuple(0 for _ in range(net.m)), np.zeros(net.ambient_dim))
    dual = _integrate_one_form(net, forms, base)
    s_star = 1.0 / iso.metric.values
    labels = iso.labels
    if limit_signs:
        if net.m != 2:
            raise DimensionTooLow("limit-sign convention is defined for m == 2")
        idx = np.indices(s_star.shape)[1]
        switched = np.where(idx % 2 == 0, s_star, -s_star)
        if np.all(switched < 0):
            switched = -switched
        s_star = switched
        labels = EdgeLabelling((labels.per_axis[0], -labels.per_axis[1]))
    return IsothermicNet(net=dual, labels=labels, metric=VertexScalar(s_star))


def christoffel_form_residual(iso: IsothermicNet) -> float:
    """Closure residual of the Christoffel one-form (0 iff isothermic)."""
    return _one_form_closure_residual(iso.net, _christoffel_forms(iso.net, iso.labels))


def _christoffel_forms(net: QNet, labels: EdgeLabelling):
    forms = {}
    for i in range(net.m):
        lo = [slice(None)] * net.m
        hi = [slice(None)] * net.m
        lo[i] = slice(0, -1)
        hi[i] = slice(1, None)
        df = net.vertices[tuple(hi)] - net.vertices[tuple(lo)]
        norm2 = (df * df).sum(axis=-1)
        if np.any(norm2 == 0.0):
            raise ZeroEdge("zero-length edge in Christoffel one-form")
        alpha = labels.per_axis[i]
        shape = [1] * net.m
        shape[i] = len(alpha)
        forms[i] = alpha.reshape(shape)[..., None] * df / norm2[..., None]
    return forms


def three_leg_evolve(axes_data, labels: EdgeLabelling, tol: Tolerances = DEFAULT_TOL) -> IsothermicNet:
    """Fill a 2d window from axis data by the three-leg relation
    (alpha_i - alpha_j)(f_ij - f)^{-1} = alpha_i (f_i - f)^{-1} - alpha_j (f_j - f)^{-1}.

    Each new quad is solved in the plane of its three known points with
    complex arithmetic; every produced quad is concircular with cross-ratio
    alpha_i / alpha_j.
    """
    f1, f2 = (np.asarray(a, dtype=float) for a in axes_data)
    if not np.allclose(f1[0], f2[0]):
        raise ValueError("axis data disagree at the origin")
    a1, a2 = labels.per_axis
    n1, n2, dim = f1.shape[0], f2.shape[0], f1.shape[1]
    f = np.empty((n1, n2, dim))
    f[:, 0] = f1
    f[0, :] = f2
    for u1 in range(1, n1):
        for u2 in range(1, n2):
            f[u1, u2] = _three_leg_point(
                f[u1 - 1, u2 - 1], f[u1, u2 - 1], f[u1 - 1, u2],
                a1[u1 - 1], a2[u2 - 1],
            )
    net = QNet(f)
    metric = recover_metric(net, tol=tol)
    return IsothermicNet(net=net, labels=labels, metric=metric)


def _three_leg_point(f, fi, fj, alpha_i, alpha_j):
    """Fourth vertex of the quad (f, f_i, f_ij, f_j) from the three-leg form."""
    if alpha_i == alpha_j:
        raise EqualLabels(f"alpha_i == alpha_j == {alpha_i}: fourth vertex at infinity")
    frame = plane_frame(np.stack([f, fi, fj]))
    zi, zj = (complex(p[0], p[1]) for p in to_plane_coords(np.stack([fi, fj]), frame))
    if zi == 0 or zj == 0:
        raise ZeroLeg("coincident points in three-leg step")
    w = alpha_i / zi - alpha_j / zj
    if w == 0:
        raise ZeroLeg("degenerate three-leg step: fourth vertex at infinity")
    zij = (alpha_i - alpha_j) / w
    origin, u, v = frame
    return origin + zij.real * u + zij.imag * v


# --- light-cone Moutard representatives ---------------------------------------


def lightcone_lift(iso: IsothermicNet, tol: Tolerances = DEFAULT_TOL, check: bool = True) -> MoutardNet:
    """Light-cone Moutard representative y = (f + e_0 + |f|^2 e_inf) / s.

    Flat layout [spatial..., e0, einf].  Also verifies the label identity
    alpha_i = -2 <y, tau_i y> when ``check`` is on.
    """
    f = iso.net.vertices
    s = iso.metric.values
    if np.any(s == 0.0):
        raise ZeroMetric("metric vanishes at a vertex")
    y = _lift_array(f) / s[..., None]
    coeffs = {}
    for i, j in combinations(range(iso.net.m), 2):
        w = 1.0 / s
        denom = _crop(w, i, j, 0, 1) - _crop(w, i, j, 1, 0)
        coeffs[(i, j)] = (_crop(w, i, j, 1, 1) - _crop(w, i, j, 0, 0)) / denom
    mn = MoutardNet(points=y, coeffs=coeffs, lightcone=True)
    if check:
        res = mn.moutard_residual()
        if res > tol.product:
            raise FormNotClosed(f"light-cone Moutard residual {res:.3e}")
        for i in range(iso.net.m):
            alpha = lift_labels(mn, i)
            layered = np.moveaxis(alpha, i, 0).reshape(alpha.shape[i], -1)
            spread = np.abs(layered - layered[:, :1]).max()
            if spread > tol.product * np.abs(alpha).max():
                raise InconsistentCrossRatios(f"-2<y, tau_{i} y> not constant across layers")
    return mn


def _lift_array(f: np.ndarray) -> np.ndarray:
    """Bulk light-cone lift [f, 1, |f|^2]."""
    e0 = np.ones(f.shape[:-1] + (1,))
    einf = (f * f).sum(axis=-1, keepdims=True)
    return np.concatenate([f, e0, einf], axis=-1)


def lift_labels(mn: MoutardNet, axis: int) -> np.ndarray:
    """alpha_axis = -2 <y, tau_axis y> on every axis edge of a light-cone net."""
    lo = [slice(None)] * mn.m
    hi = [slice(None)] * mn.m
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    return -2.0 * minkowski_dot_arrays(mn.points[tuple(lo)], mn.points[tuple(hi)])


def lightcone_evolve(axes_data, tol: Tolerances = DEFAULT_TOL) -> tuple:
    """Evolve isotropic axis data by the unique light-cone Moutard step
    a_ij = -2 <y, y_j - y_i> / <y_j - y_i, y_j - y_i>.

    Accepts two (m = 2) or three (m = 3) axis arrays in flat Minkowski
    layout.  Returns ``(MoutardNet, IsothermicNet)``; for m = 3 the
    cross-face residual is available via ``MoutardNet.moutard_residual``.
    """
    axes_data = [np.asarray(a, dtype=float) for a in axes_data]
    for arr in axes_data:
        iso_res = np.abs(minkowski_dot_arrays(arr, arr))
        scale = (arr * arr).sum(axis=-1)
        if np.any(iso_res > tol.incidence * np.maximum(scale, 1e-300)):
            raise ValueError("axis data must be isotropic")
    if len(axes_data) == 2:
        mn = _lightcone_fill_2d(axes_data[0], axes_data[1], tol)
    elif len(axes_data) == 3:
        mn = _lightcone_fill_3d(axes_data, tol)
    else:
        raise DimensionTooLow("lightcone_evolve supports m = 2 or 3")
    iso = project_lightcone_net(mn, tol)
    return mn, iso


def _lightcone_step(y, yi, yj):
    d = yj - yi
    dd = minkowski_dot_arrays(d, d)
    if abs(dd) <= 1e-300:
        raise NullDiagonalDifference("diagonal difference is isotropic")
    a = -2.0 * minkowski_dot_arrays(y, d) / dd
    return y + a * d, float(a)


def _lightcone_fill_2d(y1, y2, tol: Tolerances) -> MoutardNet:
    if not np.allclose(y1[0], y2[0]):
        raise ValueError("axis data disagree at the origin")
    n1, n2, d = y1.shape[0], y2.shape[0], y1.shape[1]
    y = np.empty((n1, n2, d))
    y[:, 0] = y1
    y[0, :] = y2
    a = np.empty((n1 - 1, n2 - 1))
    for u1 in range(1, n1):
        for u2 in range(1, n2):
            y[u1, u2], a[u1 - 1, u2 - 1] = _lightcone_step(
                y[u1 - 1, u2 - 1], y[u1, u2 - 1], y[u1 - 1, u2]
            )
    return MoutardNet(points=y, coeffs={(0, 1): a}, lightcone=True)


def _lightcone_fill_3d(axes, tol: Tolerances) -> MoutardNet:
    y1, y2, y3 = axes
    n1, n2, n3 = y1.shape[0], y2.shape[0], y3.shape[0]
    d = y1.shape[1]
    y = np.full((n1, n2, n3, d), np.nan)
    y[:, 0, 0] = y1
    y[0, :, 0] = y2
    y[0, 0, :] = y3
    coeffs = {
        (0, 1): np.empty((n1 - 1, n2 - 1, n3)),
        (0, 2): np.empty((n1 - 1, n2, n3 - 1)),
        (1, 2): np.empty((n1, n2 - 1, n3 - 1)),
    }
    for u in product(range(n1), range(n2), range(n3)):
        if not np.any(np.isnan(y[u])):
            continue
        positive = [ax for ax in range(3) if u[ax] > 0]
        i, j = positive[0], positive[1] if len(positive) > 1 else None
        if j is None:
            raise ValueError("axis data missing")
        base = list(u)
        base[i] -= 1
        base[j] -= 1
        base = tuple(base)
        yb = y[base]
        ybi = y[_shift(base, i)]
        ybj = y[_shift(base, j)]
        y[u], a = _lightcone_step(yb, ybi, ybj)
        coeffs[(i, j)][base] = a
    # record the remaining face coefficients for the consistency report
    for (i, j), arr in coeffs.items():
        it = np.nditer(arr, flags=["multi_index"], op_flags=["writeonly"])
        for val in it:
            base = it.multi_index
            yb = y[base]
            dvec = y[_shift(base, j)] - y[_shift(base, i)]
            dd = minkowski_dot_arrays(dvec, dvec)
            if abs(dd) <= 1e-300:
                raise NullDiagonalDifference("diagonal difference is isotropic")
            val[...] = -2.0 * minkowski_dot_arrays(yb, dvec) / dd
    return MoutardNet(points=y, coeffs=coeffs, lightcone=True)


def project_lightcone_net(mn: MoutardNet, tol: Tolerances = DEFAULT_TOL) -> IsothermicNet:
    """Project a light-cone Moutard net to (f, s, labels) in R^N."""
    e0 = mn.points[..., -2]
    scale = np.abs(mn.points).max()
    if np.any(np.abs(e0) <= tol.incidence * scale):
        from .errors import ZeroE0Component

        raise ZeroE0Component("net passes through the point at infinity")
    s = 1.0 / e0
    f = mn.points[..., :-2] * s[..., None]
    net = QNet(f)
    per_axis = []
    for i in range(mn.m):
        alpha = lift_labels(mn, i)
        other = tuple(ax for ax in range(mn.m) if ax != i)
        per_axis.append(alpha.mean(axis=other) if other else alpha)
    return IsothermicNet(net=net, labels=EdgeLabelling(tuple(per_axis)), metric=VertexScalar(s))


# --- Moebius-geometric characterizations ---------------------------------------


@dataclass
class MoebiusReport:
    passed: bool
    max_residual: float
    mode: str  # "sphere" (part 1), "in_sphere" (part 2), or "hexahedra"
    records: list


def _linear_rank_residual(vectors: np.ndarray, rank: int) -> float:
    sv = np.linalg.svd(np.asarray(vectors), compute_uv=False)
    if len(sv) <= rank or sv[0] == 0.0:
        return 0.0
    return float(sv[rank] / sv[0])


def check_moebius_characterizations(net: QNet, tol: Tolerances = DEFAULT_TOL) -> MoebiusReport:
    """Moebius-geometric isothermic tests through light-cone lifts.

    m = 2, net not contained in a 2-sphere: at every interior vertex the five
    lifts of f and f_{+-1,+-2} span at most a 4-dimensional linear space (a
    common 2-sphere) that contains none of the four neighbours.  m = 2, net
    in a 2-sphere or plane: the three circles through f share a second point.
    m = 3: per hexahedron, the four white lifts are concircular iff the four
    black ones are.
    """
    lifted = _lift_array(net.vertices)
    if net.m >= 3:
        return _moebius_hexahedra(net, lifted, tol)
    if net.m != 2:
        raise DimensionTooLow("Moebius characterizations need m >= 2")
    flat = lifted.reshape(-1, lifted.shape[-1])
    in_sphere = _linear_rank_residual(flat, net.ambient_dim + 1) <= tol.incidence
    records = []
    max_res = 0.0
    if not in_sphere:
        for u1, u2 in net.interior_indices():
            five = np.stack([
                lifted[u1, u2],
                lifted[u1 + 1, u2 + 1], lifted[u1 + 1, u2 - 1],
                lifted[u1 - 1, u2 + 1], lifted[u1 - 1, u2 - 1],
            ])
            res = _linear_rank_residual(five, 4)
            # the sphere must not contain the four neighbours
            contained = []
            for nb in ((u1 + 1, u2), (u1 - 1, u2), (u1, u2 + 1), (u1, u2 - 1)):
                with_nb = np.vstack([five, lifted[nb][None]])
                contained.append(_linear_rank_residual(with_nb, 4) <= tol.incidence)
            records.append(((u1, u2), res, contained))
            max_res = max(max_res, res)
        passed = all(r <= tol.product and not any(c) for _, r, c in records)
        return MoebiusReport(passed=passed, max_residual=max_res, mode="sphere", records=records)
    # part 2: three circles through f have a second common point
    for u1, u2 in net.interior_indices():
        f = lifted[u1, u2]
        circles = [
            np.stack([f, lifted[u1 + 1, u2 + 1], lifted[u1 - 1, u2 + 1]]),
            np.stack([f, lifted[u1 + 1, u2 - 1], lifted[u1 - 1, u2 - 1]]),
            np.stack([f, lifted[u1 + 1, u2], lifted[u1 - 1, u2]]),
        ]
        # intersection of the three circle 3-spaces has dimension >= 2
        complements = []
        for c in circles:
            _, _, vt = np.linalg.svd(c)
            complements.append(vt[3:])
        stacked = np.vstack(complements)
        sv = np.linalg.svd(stacked, compute_uv=False)
        dim = lifted.shape[-1]
        n_keep = dim - 2  # rank must be at most dim - 2 for a pencil of solutions
        res = float(sv[n_keep] / sv[0]) if len(sv) > n_keep else 0.0
        records.append(((u1, u2), res, None))
        max_res = max(max_res, res)
    passed = all(r <= tol.product for _, r, _ in records)
    return MoebiusReport(passed=passed, max_residual=max_res, mode="in_sphere", records=records)


def _moebius_hexahedra(net: QNet, lifted: np.ndarray, tol: Tolerances) -> MoebiusReport:
    from .qnet import hexahedra

    records = []
    max_res = 0.0
    for w, axes, _ in hexahedra(net):
        i, j, k = axes
        black = np.stack([
            lifted[w], lifted[_shift(w, i, j)], lifted[_shift(w, i, k)], lifted[_shift(w, j, k)],
        ])
        white = np.stack([
            lifted[_shift(w, i)], lifted[_shift(w, j)], lifted[_shift(w, k)],
            lifted[_shift(w, i, j, k)],
        ])
        res_b = _linear_rank_residual(black, 3)
        res_w = _linear_rank_residual(white, 3)
        records.append((w, axes, res_b, res_w))
        max_res = max(max_res, res_b, res_w)
    passed = max_res <= tol.product
    return MoebiusReport(passed=passed, max_residual=max_res, mode="hexahedra", records=records)


def central_sphere(net: QNet, u, tol: Tolerances = DEFAULT_TOL):
    """Center and radius of the sphere through f and f_{+-1,+-2} at an
    interior vertex (a by-product of the rank test; no properties claimed)."""
    u1, u2 = u
    lifted = _lift_array(net.vertices)
    five = np.stack([
        lifted[u1, u2],
        lifted[u1 + 1, u2 + 1], lifted[u1 + 1, u2 - 1],
        lifted[u1 - 1, u2 + 1], lifted[u1 - 1, u2 - 1],
    ])
    _, _, vt = np.linalg.svd(five)
    n = vt[-1]  # Euclidean normal of the span
    # x . n = <x, S> with S = (n_spatial, -2 n_einf, -2 n_e0); the sphere
    # vector S is proportional to c + e_0 + (|c|^2 - r^2) e_inf
    sphere = np.concatenate([n[:-2], [-2.0 * n[-1], -2.0 * n[-2]]])
    e0 = sphere[-2]
    if abs(e0) <= tol.incidence * np.linalg.norm(sphere):
        raise ZeroMetric("five-point sphere degenerates to a plane")
    rep = sphere / e0
    center = rep[:-2]
    r2 = float(np.dot(center, center) - rep[-1])
    return center, float(np.sqrt(max(r2, 0.0)))
