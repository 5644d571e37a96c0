import numpy as np
import pytest

from koenigsnets import generate
from koenigsnets.errors import (
    DimensionTooLow,
    EqualLabels,
    FormNotClosed,
    InconsistentCrossRatios,
    NotCircular,
    NullDiagonalDifference,
)
from koenigsnets.isothermic import (
    IsothermicNet,
    central_sphere,
    check_circular,
    check_isothermic,
    check_moebius_characterizations,
    christoffel,
    christoffel_form_residual,
    lift_labels,
    lightcone_evolve,
    lightcone_lift,
    metric_labels,
    project_lightcone_net,
    quad_cross_ratios,
    recover_labels,
    recover_metric,
    three_leg_evolve,
)
from koenigsnets.koenigs import check_closedness
from koenigsnets.qnet import EdgeLabelling, QNet, VertexScalar


def grid_metric(extents):
    """s = (-1)^(u_2): the discrete metric of the unit grid."""
    return np.where(np.indices(extents)[1] % 2 == 0, 1.0, -1.0)


def grid_isothermic(extents):
    net = generate.grid(extents)
    labels = EdgeLabelling((np.ones(extents[0] - 1), -np.ones(extents[1] - 1)))
    return IsothermicNet(net=net, labels=labels, metric=VertexScalar(grid_metric(extents)))


@pytest.fixture(scope="module")
def flipped(iso_net):
    net, s = generate.flip_corner_cross_ratio(iso_net)
    return net, s


class TestCircularity:
    def test_grid_passes(self):
        rep = check_circular(generate.grid((4, 4)))
        assert rep.passed and rep.max_residual <= 1e-12

    def test_three_leg_net_passes(self, iso_net):
        assert check_circular(iso_net.net).passed

    def test_generic_koenigs_net_fails(self, koenigs_net_2d):
        rep = check_circular(koenigs_net_2d)
        assert not rep.passed and len(rep.offenders) > 0

    def test_similarity_invariance(self, iso_net, rng):
        rot, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        moved = QNet(3.0 * iso_net.net.vertices @ rot.T + 1.0)
        assert check_circular(moved).passed


class TestCrossRatios:
    def test_grid_minus_one(self):
        cr = quad_cross_ratios(generate.grid((4, 4)))[(0, 1)]
        assert np.allclose(cr, -1.0)

    def test_factorization(self, iso_net):
        # q = alpha_i / alpha_j on every quad
        cr = quad_cross_ratios(iso_net.net)[(0, 1)]
        a1, a2 = iso_net.labels.per_axis
        expected = a1[:, None] / a2[None, :]
        assert np.abs(cr - expected).max() <= 1e-8 * np.abs(cr).max()

    def test_sign_flips_for_crossed_quad(self, iso_net, flipped):
        net, _ = flipped
        corner = tuple(e - 2 for e in net.extents)
        before = quad_cross_ratios(iso_net.net)[(0, 1)][corner]
        after = quad_cross_ratios(net)[(0, 1)][corner]
        assert before < 0 < after


class TestCheckIsothermic:
    def test_three_leg_net(self, iso_net):
        rep = check_isothermic(iso_net.net)
        assert rep.passed and rep.max_residual <= 1e-9

    def test_grid(self):
        assert check_isothermic(generate.grid((5, 5))).passed

    def test_lightcone_3d(self, iso_lightcone_3d):
        _, iso = iso_lightcone_3d
        rep = check_isothermic(iso.net)
        assert rep.passed and rep.max_residual <= 1e-9

    def test_rejects_non_circular(self, koenigs_net_2d):
        with pytest.raises(NotCircular):
            check_isothermic(koenigs_net_2d)

    def test_flipped_corner_fails(self, flipped):
        net, _ = flipped
        rep = check_isothermic(net)
        assert not rep.passed and len(rep.failures) > 0

    def test_isothermic_nets_are_koenigs(self, iso_net):
        assert check_closedness(iso_net.net).is_koenigs


class TestRecoverLabels:
    def test_reproduces_generator_labels(self, iso_net):
        rec = recover_labels(iso_net.net)
        a1, a2 = iso_net.labels.per_axis
        r1, r2 = rec.per_axis
        scale = a1[0] / r1[0]
        assert np.abs(r1 * scale - a1).max() <= 1e-8
        assert np.abs(r2 * scale - a2).max() <= 1e-8

    def test_gauge(self, iso_net):
        rec = recover_labels(iso_net.net)
        assert rec.label(0, 0) == 1.0

    def test_inconsistent_net_rejected(self, flipped):
        net, _ = flipped
        with pytest.raises(InconsistentCrossRatios):
            recover_labels(net)


class TestRecoverMetric:
    def test_matches_generator(self, iso_net):
        s = recover_metric(iso_net.net)
        ratio = s.values / iso_net.metric.values
        parity = np.indices(s.values.shape).sum(axis=0) % 2
        for p in (0, 1):
            vals = ratio[parity == p]
            assert np.abs(vals / vals.flat[0] - 1.0).max() <= 1e-9

    def test_metric_labels_match(self, iso_net):
        # equal to the generator labels up to the single gauge factor of s
        lab = metric_labels(iso_net.net, iso_net.metric)
        a1, a2 = iso_net.labels.per_axis
        scale = a1[0] / lab.per_axis[0][0]
        assert np.abs(lab.per_axis[0] * scale - a1).max() <= 1e-8
        assert np.abs(lab.per_axis[1] * scale - a2).max() <= 1e-8

    def test_gauge_law(self, iso_net):
        # rescaling s by (lambda, mu) on the two colors divides alpha by
        # lambda * mu
        net = iso_net.net
        s1 = recover_metric(net)
        s2 = recover_metric(net, ((0, 0), 2.0), ((1, 0), 3.0))
        l1 = metric_labels(net, s1)
        l2 = metric_labels(net, s2)
        for ax in (0, 1):
            assert np.allclose(l2.per_axis[ax] * 6.0, l1.per_axis[ax])


class TestChristoffel:
    def test_dual_is_isothermic(self, iso_net):
        dual = christoffel(iso_net)
        assert check_isothermic(dual.net).passed

    def test_same_cross_ratios(self, iso_net):
        dual = christoffel(iso_net)
        cr = quad_cross_ratios(iso_net.net)[(0, 1)]
        cr_dual = quad_cross_ratios(dual.net)[(0, 1)]
        assert np.abs(cr - cr_dual).max() <= 1e-8 * np.abs(cr).max()

    def test_metric_inverts(self, iso_net):
        dual = christoffel(iso_net)
        assert np.allclose(dual.metric.values * iso_net.metric.values, 1.0)

    def test_involution(self, iso_net):
        back = christoffel(christoffel(iso_net))
        diff = back.net.vertices - iso_net.net.vertices
        assert np.abs(diff - diff[0, 0]).max() <= 1e-8 * iso_net.net.diameter()

    def test_three_leg_identity(self):
        # unit quad 0, 1, 1+i, i: 2 (1+i)^{-1} = 1/1 - (-1)/i
        f1 = np.array([[0.0, 0.0], [1.0, 0.0]])
        f2 = np.array([[0.0, 0.0], [0.0, 1.0]])
        labels = EdgeLabelling((np.array([1.0]), np.array([-1.0])))
        iso = three_leg_evolve((f1, f2), labels)
        assert np.allclose(iso.net.vertices[1, 1], [1.0, 1.0])

    def test_equal_labels_rejected(self):
        f1 = np.array([[0.0, 0.0], [1.0, 0.0]])
        f2 = np.array([[0.0, 0.0], [0.0, 1.0]])
        labels = EdgeLabelling((np.array([1.0]), np.array([1.0])))
        with pytest.raises(EqualLabels):
            three_leg_evolve((f1, f2), labels)

    def test_wrong_labels_not_closed(self, iso_net):
        a1, a2 = iso_net.labels.per_axis
        wrong = IsothermicNet(
            net=iso_net.net,
            labels=EdgeLabelling((a1 + 0.5, a2)),
            metric=iso_net.metric,
        )
        assert christoffel_form_residual(wrong) > 1e-3
        with pytest.raises(FormNotClosed):
            christoffel(wrong)

    def test_limit_signs(self, iso_net):
        dual = christoffel(iso_net, limit_signs=True)
        assert np.all(dual.metric.values > 0)
        assert np.allclose(dual.labels.per_axis[0], iso_net.labels.per_axis[0])
        assert np.allclose(dual.labels.per_axis[1], -iso_net.labels.per_axis[1])

    def test_limit_signs_need_2d(self, iso_lightcone_3d):
        _, iso = iso_lightcone_3d
        with pytest.raises(DimensionTooLow):
            christoffel(iso, limit_signs=True)


class TestLightconeLift:
    def test_grid_lift(self):
        iso = grid_isothermic((4, 4))
        mn = lightcone_lift(iso)
        assert mn.moutard_residual() <= 1e-14
        assert np.allclose(mn.coeffs[(0, 1)], 1.0)

    def test_isotropy(self, iso_net):
        from koenigsnets.geom import minkowski_dot_arrays

        mn = lightcone_lift(iso_net)
        norms = minkowski_dot_arrays(mn.points, mn.points)
        assert np.abs(norms).max() <= 1e-10 * (mn.points**2).sum(axis=-1).max()

    def test_moutard_residual(self, iso_net):
        assert lightcone_lift(iso_net).moutard_residual() <= 1e-9

    def test_label_identity(self, iso_net):
        # -2<y, tau_i y> reproduces the labels up to the gauge factor of s
        mn = lightcone_lift(iso_net)
        a1, a2 = iso_net.labels.per_axis
        l1 = lift_labels(mn, 0)
        l2 = lift_labels(mn, 1)
        assert np.abs(l1 - l1[:, :1]).max() <= 1e-9 * np.abs(l1).max()
        assert np.abs(l2 - l2[:1, :]).max() <= 1e-9 * np.abs(l2).max()
        scale = a1[0] / l1[0, 0]
        assert np.abs(l1[:, 0] * scale - a1).max() <= 1e-8
        assert np.abs(l2[0, :] * scale - a2).max() <= 1e-8

    def test_round_trip(self, iso_net):
        mn = lightcone_lift(iso_net)
        back = project_lightcone_net(mn)
        assert np.allclose(back.net.vertices, iso_net.net.vertices)
        assert np.allclose(back.metric.values, iso_net.metric.values)

    def test_non_isothermic_rejected(self, flipped):
        net, s = flipped
        bad = IsothermicNet(net=net, labels=EdgeLabelling((np.ones(5), -np.ones(5))), metric=s)
        with pytest.raises(FormNotClosed):
            lightcone_lift(bad)


class TestLightconeEvolve:
    def test_2d(self):
        mn, iso = generate.random_isothermic_lightcone((5, 6), rng=np.random.default_rng(201))
        assert mn.moutard_residual() <= 1e-12
        assert check_isothermic(iso.net).passed

    def test_3d_fixture(self, iso_lightcone_3d):
        mn, iso = iso_lightcone_3d
        assert mn.moutard_residual() <= 1e-9
        assert check_circular(iso.net).passed

    def test_round_trip_through_lift(self):
        mn, iso = generate.random_isothermic_lightcone((5, 5), rng=np.random.default_rng(202))
        mn2 = lightcone_lift(iso)
        assert np.allclose(mn2.points, mn.points)

    def test_null_diagonal_rejected(self):
        from koenigsnets.isothermic import _lift_array

        # both diagonal endpoints lift the same point with different metric
        # values, so their difference is isotropic
        f0 = np.array([0.0, 0.0, 0.0])
        f1 = np.array([1.0, 0.0, 0.0])
        y0 = _lift_array(f0)
        y1 = _lift_array(f1) / 2.0
        y2 = _lift_array(f1) / 3.0
        with pytest.raises(NullDiagonalDifference):
            lightcone_evolve((np.stack([y0, y1]), np.stack([y0, y2])))

    def test_non_isotropic_rejected(self, rng):
        with pytest.raises(ValueError):
            lightcone_evolve((rng.standard_normal((3, 5)), rng.standard_normal((3, 5))))


class TestMoebiusCharacterizations:
    def test_generic_2d_sphere_mode(self, iso_net):
        rep = check_moebius_characterizations(iso_net.net)
        assert rep.mode == "sphere"
        assert rep.passed and rep.max_residual <= 1e-9

    def test_planar_net_in_sphere_mode(self):
        rep = check_moebius_characterizations(generate.grid((5, 5)))
        assert rep.mode == "in_sphere"
        assert rep.passed

    def test_3d_hexahedra_mode(self, iso_lightcone_3d):
        _, iso = iso_lightcone_3d
        rep = check_moebius_characterizations(iso.net)
        assert rep.mode == "hexahedra"
        assert rep.passed
        for _, _, res_b, res_w in rep.records:
            assert res_b <= 1e-8 and res_w <= 1e-8

    def test_flipped_corner_fails(self, flipped):
        net, _ = flipped
        rep = check_moebius_characterizations(net)
        assert not rep.passed

    def test_agreement_with_cross_ratio_check(self, iso_net, flipped):
        assert check_moebius_characterizations(iso_net.net).passed
        assert check_isothermic(iso_net.net).passed
        net, _ = flipped
        assert not check_moebius_characterizations(net).passed
        assert not check_isothermic(net).passed

    def test_central_sphere(self, iso_net):
        v = iso_net.net.vertices
        center, radius = central_sphere(iso_net.net, (2, 2))
        pts = [v[2, 2], v[3, 3], v[3, 1], v[1, 3], v[1, 1]]
        for p in pts:
            assert np.linalg.norm(p - center) == pytest.approx(radius, rel=1e-8)


class TestMoebiusInvariance:
    def test_inversion_preserves_verdict(self, iso_net):
        img = QNet(generate.apply_moebius(iso_net.net).vertices)
        rep = check_isothermic(img)
        assert rep.passed

    def test_inversion_preserves_cross_ratios(self, iso_net):
        img = generate.apply_moebius(iso_net.net, scale=1.3, shift=(0.2, -0.1, 0.4))
        cr = quad_cross_ratios(iso_net.net)[(0, 1)]
        cr_img = quad_cross_ratios(img)[(0, 1)]
        assert np.abs(cr - cr_img).max() <= 1e-8 * np.abs(cr).max()

    def test_negative_verdict_preserved(self, flipped):
        net, _ = flipped
        img = generate.apply_moebius(net)
        assert not check_isothermic(img).passed


class TestMetricCaveat:
    def test_flipped_net_keeps_metric_property(self, flipped):
        # the counterexample still satisfies |f_i - f|^2 = alpha_i s s_i ...
        from koenigsnets.isothermic import _edge_alpha

        net, s = flipped
        for i in (0, 1):
            alpha = _edge_alpha(net, s.values, i)
            layered = np.moveaxis(alpha, i, 0).reshape(alpha.shape[i], -1)
            spread = np.abs(layered - layered[:, :1]).max()
            assert spread <= 1e-9 * np.abs(alpha).max()

    def test_flipped_net_is_circular_but_not_isothermic(self, flipped):
        # ... and stays circular, yet fails the cross-ratio test
        net, _ = flipped
        assert check_circular(net).passed
        assert not check_isothermic(net).passed

    def test_embedded_sufficiency(self, iso_net):
        # with all quads embedded, the metric property implies isothermic
        from koenigsnets.geom import is_convex
        from koenigsnets.qnet import quads

        assert all(is_convex(q) for _, _, _, q in quads(iso_net.net))
        assert check_isothermic(iso_net.net).passed
