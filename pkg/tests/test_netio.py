import numpy as np
import pytest

from koenigsnets import generate, netio
from koenigsnets.errors import ParseError, SchemaMismatch, UnsupportedDimension
from koenigsnets.koenigs import integrate_nu


class TestRoundTrip:
    def test_byte_identical(self, koenigs_net_2d, tmp_path):
        kd = integrate_nu(koenigs_net_2d)
        doc = netio.NetDocument.from_net(koenigs_net_2d, nu=kd.nu.values)
        path = tmp_path / "net.json"
        netio.save(doc, path)
        first = path.read_bytes()
        netio.save(netio.load(path), path)
        assert path.read_bytes() == first

    def test_net_reconstruction(self, koenigs_net_2d):
        doc = netio.loads(netio.saves(netio.NetDocument.from_net(koenigs_net_2d)))
        assert np.array_equal(doc.to_net().vertices, koenigs_net_2d.vertices)

    def test_decorations_survive(self, iso_net):
        doc = netio.NetDocument.from_net(
            iso_net.net, s=iso_net.metric.values, labels=iso_net.labels.per_axis
        )
        back = netio.loads(netio.saves(doc))
        assert np.array_equal(back.s_grid(), iso_net.metric.values)
        for a, b in zip(back.labels, iso_net.labels.per_axis):
            assert np.array_equal(a, b)

    def test_moutard_block(self, koenigs_net_3d):
        net, nu, mn = koenigs_net_3d
        doc = netio.NetDocument.from_net(
            net,
            nu=nu.values,
            moutard={
                "dim": mn.points.shape[-1],
                "points": mn.points.reshape(-1),
                "coeffs": {k: v.reshape(-1) for k, v in mn.coeffs.items()},
            },
        )
        back = netio.loads(netio.saves(doc))
        assert back.moutard["dim"] == mn.points.shape[-1]
        assert np.array_equal(back.moutard["points"], mn.points.reshape(-1))
        assert set(back.moutard["coeffs"]) == set(mn.coeffs)

    def test_nonfinite_rejected(self):
        doc = netio.NetDocument(m=2, extents=(2, 2), ambient_dim=2,
                                vertices=np.array([0.0, np.inf] + [0.0] * 6))
        with pytest.raises(ValueError):
            netio.saves(doc)


class TestLoadErrors:
    def test_truncated_file(self, koenigs_net_2d):
        text = netio.saves(netio.NetDocument.from_net(koenigs_net_2d))
        with pytest.raises(ParseError) as exc:
            netio.loads(text[: len(text) // 2])
        assert "line" in str(exc.value)

    def test_missing_field(self):
        with pytest.raises(ParseError):
            netio.loads('{"schema_version": 1, "m": 2}')

    def test_wrong_schema_version(self):
        with pytest.raises(SchemaMismatch):
            netio.loads(
                '{"schema_version": 99, "m": 2, "extents": [2, 2], '
                '"ambient_dim": 2, "vertices": []}'
            )

    def test_extent_count_mismatch(self):
        with pytest.raises(SchemaMismatch):
            netio.loads(
                '{"schema_version": 1, "m": 3, "extents": [2, 2], '
                '"ambient_dim": 2, "vertices": []}'
            )

    def test_vertex_count_mismatch(self):
        with pytest.raises(SchemaMismatch):
            netio.loads(
                '{"schema_version": 1, "m": 2, "extents": [2, 2], '
                '"ambient_dim": 2, "vertices": [0.0, 1.0]}'
            )

    def test_bad_label_lengths(self, koenigs_net_2d):
        doc = netio.NetDocument.from_net(koenigs_net_2d)
        doc.labels = (np.ones(2), np.ones(2))
        with pytest.raises(SchemaMismatch):
            netio.loads(netio.saves(doc))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            netio.load(tmp_path / "nope.json")


class TestObjExport:
    def test_2x2(self, tmp_path):
        doc = netio.NetDocument.from_net(generate.grid((2, 2)))
        path = tmp_path / "net.obj"
        netio.export_obj(doc, path)
        lines = path.read_text().splitlines()
        assert sum(1 for ln in lines if ln.startswith("v ")) == 4
        assert [ln for ln in lines if ln.startswith("f ")] == ["f 1 3 4 2"]

    def test_3x3(self, tmp_path):
        doc = netio.NetDocument.from_net(generate.grid((3, 3)))
        path = tmp_path / "net.obj"
        netio.export_obj(doc, path)
        lines = path.read_text().splitlines()
        assert sum(1 for ln in lines if ln.startswith("v ")) == 9
        assert sum(1 for ln in lines if ln.startswith("f ")) == 4

    def test_2d_ambient_padded(self, tmp_path):
        doc = netio.NetDocument.from_net(generate.grid((2, 2), ambient_dim=2))
        path = tmp_path / "net.obj"
        netio.export_obj(doc, path)
        for ln in path.read_text().splitlines():
            if ln.startswith("v "):
                assert ln.split()[-1] == "0"

    def test_3d_lattice_rejected(self, tmp_path):
        doc = netio.NetDocument.from_net(generate.grid((2, 2, 2)))
        with pytest.raises(UnsupportedDimension):
            netio.export_obj(doc, tmp_path / "net.obj")

    def test_high_ambient_rejected(self, tmp_path, rng):
        net = generate.random_koenigs_2d((3, 3), ambient_dim=4, rng=rng)
        doc = netio.NetDocument.from_net(net)
        with pytest.raises(UnsupportedDimension):
            netio.export_obj(doc, tmp_path / "net.obj")
