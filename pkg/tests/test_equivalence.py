"""Cluster equivalence and the cluster-counting function."""
import numpy as np
import pytest

import delone_local as dl
from delone_local.delone_core import Cluster
from delone_local.equivalence import cluster_classes, cluster_isometry
from delone_local.errors import NoUsableCenters, RadiusMismatch
from delone_local.geometry import Isometry, classify_element, rotation_matrix

SQRT3 = np.sqrt(3.0)


def transported(c: Cluster, iso: Isometry) -> Cluster:
    return Cluster(center=iso.apply(c.center), radius=c.radius,
                   members=iso.apply(c.members))


def random_isometry(rng) -> Isometry:
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    return Isometry(q, rng.normal(size=3) * 3.0)


class TestClusterIsometry:
    def test_z3_translation(self, z3_patch):
        a = dl.cluster(z3_patch, [0, 0, 0], 1.0)
        b = dl.cluster(z3_patch, [1, 0, 0], 1.0)
        g = cluster_isometry(a, b)
        assert g is not None
        assert np.abs(g.apply(a.center) - b.center).max() < 1e-9

    def test_z3_vs_hex_not_equivalent(self, z3_patch, hex_patch):
        a = dl.cluster(z3_patch, [0, 0, 0], 1.0)
        b = dl.cluster(hex_patch, [0, 0, 0], 1.0)
        assert len(a) == 7 and len(b) == 9  # cardinality already differs
        assert cluster_isometry(a, b) is None

    def test_c4v_mirror_layers(self, c4v_patch):
        rho = np.sqrt(1.5)
        a = dl.cluster(c4v_patch, [0, 0, 1], rho)
        b = dl.cluster(c4v_patch, [0, 0, 2], rho)
        g = cluster_isometry(a, b)
        assert g is not None
        kind = classify_element(g.q)
        det = float(np.linalg.det(g.q))
        # layers are mirror-related: improper map or a horizontal half-turn
        horizontal_half_turn = (kind.kind == "rotation" and kind.order == 2
                                and abs(kind.axis[2]) < 1e-6)
        assert det < 0 or horizontal_half_turn

    def test_radius_mismatch(self, z3_patch):
        a = dl.cluster(z3_patch, [0, 0, 0], 1.0)
        b = dl.cluster(z3_patch, [0, 0, 0], 1.4)
        with pytest.raises(RadiusMismatch):
            cluster_isometry(a, b)

    def test_reproduction_error_bound(self, z3_patch):
        rng = np.random.default_rng(11)
        a = dl.cluster(z3_patch, [0, 0, 0], 2.0)
        iso = random_isometry(rng)
        b = transported(a, iso)
        g = cluster_isometry(a, b)
        assert g is not None
        moved = g.apply(a.members)
        from scipy.spatial import cKDTree
        d, _ = cKDTree(b.members).query(moved)
        assert float(d.max()) <= 10 * 1e-9 * 100  # well within matching tol

    def test_single_point_clusters(self, z3_patch):
        a = dl.cluster(z3_patch, [0, 0, 0], 0.5)
        b = dl.cluster(z3_patch, [2, 1, 0], 0.5)
        g = cluster_isometry(a, b)
        assert g is not None
        assert np.allclose(g.t, [2, 1, 0])

    def test_collinear_clusters(self):
        # points on a line: equivalence decided with reduced frames
        pts = [[0, 0, z] for z in range(-3, 4)]
        p = dl.PointPatch(pts, [-4, -4, -4], [4, 4, 4])
        a = dl.cluster(p, [0, 0, 0], 1.0)
        b = dl.cluster(p, [0, 0, 1], 1.0)
        g = cluster_isometry(a, b)
        assert g is not None

    def test_collinear_not_equivalent(self):
        pts = [[0, 0, -1.0], [0, 0, 0], [0, 0, 1.5], [0, 0, 3.0]]
        p = dl.PointPatch(pts, [-2, -2, -1.5], [2, 2, 3.5])
        a = dl.cluster(p, [0, 0, 0], 1.1)   # neighbors at -1 only
        b = dl.cluster(p, [0, 0, 1.5], 1.6)
        with pytest.raises(RadiusMismatch):
            cluster_isometry(a, b)
        b = dl.cluster(p, [0, 0, 1.5], 1.1)  # no neighbors within 1.1
        assert cluster_isometry(a, b) is None

    def test_planar_clusters(self):
        pts = [[x, y, 0] for x in range(-3, 4) for y in range(-3, 4)]
        p = dl.PointPatch(pts, [-3.5, -3.5, -1.5], [3.5, 3.5, 1.5])
        a = dl.cluster(p, [0, 0, 0], 1.0)
        b = dl.cluster(p, [1, 1, 0], 1.0)
        g = cluster_isometry(a, b)
        assert g is not None


class TestClusterClasses:
    def test_z3_single_class_at_2R(self, z3_patch):
        dec = cluster_classes(z3_patch, SQRT3)
        assert dec.N == 1
        # representative is the lexicographically smallest usable center
        rep = dec.class_representatives[0]
        usable = z3_patch.usable_centers(SQRT3)
        assert np.allclose(rep.center, usable[0])

    def test_c4v_single_class_at_2R(self, c4v_patch):
        dec = cluster_classes(c4v_patch, 2 * np.sqrt(1.5))
        assert dec.N == 1

    def test_z3_with_hole_two_classes(self):
        pts = [[x, y, z] for x in range(-4, 5) for y in range(-4, 5)
               for z in range(-4, 5) if (x, y, z) != (0, 0, 0)]
        p = dl.PointPatch(pts, [-4, -4, -4], [4, 4, 4])
        dec = cluster_classes(p, 1.0)
        assert dec.N == 2
        sizes = sorted(len(rep) for rep in dec.class_representatives)
        assert sizes == [6, 7]  # hole neighbors lost one member

    def test_no_usable_centers(self, z3_patch):
        with pytest.raises(NoUsableCenters):
            cluster_classes(z3_patch, 10.0)

    def test_N_one_below_unit_distance(self, z3_patch):
        for rho in (0.3, 0.6, 0.95):
            assert cluster_classes(z3_patch, rho).N == 1

    def test_assignment_covers_all_usable_centers(self, z3_patch):
        dec = cluster_classes(z3_patch, 1.5)
        assert len(dec.assignment) == len(z3_patch.usable_centers(1.5))
        assert set(dec.assignment.values()) == set(range(dec.N))
