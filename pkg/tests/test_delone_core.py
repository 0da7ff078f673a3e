"""Patch parameters, clusters, shells, and the point-set file format."""
import numpy as np
import pytest

import delone_local as dl
from delone_local.delone_core import load_patch, save_patch
from delone_local.errors import (
    CenterNotInPatch,
    MarginViolation,
    ParseError,
    TooFewPoints,
)

SQRT3 = np.sqrt(3.0)


def brute_force_ball(points, center, rho, tol=1e-9):
    d = np.linalg.norm(points - np.asarray(center, float), axis=1)
    return points[d <= rho + tol]


def covering_oracle(patch, h=0.02):
    """Independent oracle: coarse grid scan over the box interior followed
    by local Nelder-Mead refinement of the distance-to-set function."""
    from scipy.optimize import minimize
    from scipy.spatial import cKDTree

    tree = cKDTree(patch.points)
    axes = [np.arange(lo, hi + h / 2, h) for lo, hi in
            zip(patch.box_lo, patch.box_hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    d, _ = tree.query(grid)
    inside = (np.all(grid - d[:, None] >= patch.box_lo - 1e-9, axis=1)
              & np.all(grid + d[:, None] <= patch.box_hi + 1e-9, axis=1))
    best = float(d[inside].max())
    seeds = grid[inside][np.argsort(-d[inside])[:8]]
    for s in seeds:
        res = minimize(lambda c: -tree.query(c)[0], s, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12})
        c = res.x
        r = float(tree.query(c)[0])
        ok = (np.all(c - r >= patch.box_lo - 1e-9)
              and np.all(c + r <= patch.box_hi + 1e-9))
        if ok:
            best = max(best, r)
    return best


class TestPacking:
    def test_z3(self):
        p = dl.cubic_lattice([-2, -2, -2], [2, 2, 2])
        assert dl.packing_diameter(p) == pytest.approx(1.0, abs=1e-12)

    def test_hex(self, hex_patch):
        assert dl.packing_diameter(hex_patch) == pytest.approx(1.0, abs=1e-12)

    def test_violation_reported(self):
        p = dl.PointPatch([[0, 0, 0], [0.9, 0, 0]], [-1, -1, -1], [2, 2, 2])
        assert dl.packing_diameter(p) == pytest.approx(0.9, abs=1e-12)
        assert not p.packing_ok
        assert p.packing_violations == [(0, 1)]

    def test_too_few(self):
        p = dl.PointPatch([[0, 0, 0]], [-1, -1, -1], [1, 1, 1])
        with pytest.raises(TooFewPoints):
            dl.packing_diameter(p)


class TestCoveringRadius:
    def test_z3(self):
        p = dl.cubic_lattice([-3, -3, -3], [3, 3, 3])
        assert dl.covering_radius(p) == pytest.approx(SQRT3 / 2, abs=1e-6)

    def test_hex_unit(self, hex_patch):
        # deep hole above a triangle center, halfway between layers
        expected = covering_oracle(hex_patch, h=0.05)
        assert expected == pytest.approx(np.sqrt(7.0 / 12.0), abs=1e-6)
        assert dl.covering_radius(hex_patch) == pytest.approx(expected, abs=1e-6)

    def test_hex_tall_mu4(self):
        # layer spacing sqrt(mu) = 2: deep hole at sqrt(1/3 + 1)
        p = dl.hex_lattice(dl.HexLatticeSpec(1.0, 4.0), [-5, -5, -6], [5, 5, 6])
        expected = covering_oracle(p, h=0.08)
        assert expected == pytest.approx(np.sqrt(1.0 / 3.0 + 1.0), abs=1e-6)
        assert dl.covering_radius(p) == pytest.approx(expected, abs=1e-6)

    def test_hex_tall_mu16(self):
        # layer spacing 4: deep hole at sqrt(1/3 + 4)
        p = dl.hex_lattice(dl.HexLatticeSpec(1.0, 16.0), [-6, -6, -10], [6, 6, 10])
        assert dl.covering_radius(p) == pytest.approx(
            np.sqrt(1.0 / 3.0 + 4.0), abs=1e-6)

    def test_box_enlargement_invariance(self):
        small = dl.cubic_lattice([-3, -3, -3], [3, 3, 3])
        large = dl.cubic_lattice([-5, -5, -5], [5, 5, 5])
        assert dl.covering_radius(small) == pytest.approx(
            dl.covering_radius(large), abs=1e-6)


class TestCluster:
    def test_z3_rho1(self, z3_patch):
        c = dl.cluster(z3_patch, [0, 0, 0], 1.0)
        assert len(c) == 7
        oracle = brute_force_ball(z3_patch.points, [0, 0, 0], 1.0)
        assert len(oracle) == 7

    def test_z3_rho_half(self, z3_patch):
        # below the minimal distance every cluster is just its center
        c = dl.cluster(z3_patch, [0, 0, 0], 0.5)
        assert len(c) == 1

    def test_z3_rho_sqrt2(self, z3_patch):
        c = dl.cluster(z3_patch, [0, 0, 0], np.sqrt(2))
        assert len(c) == 19
        assert len(brute_force_ball(z3_patch.points, [0, 0, 0], np.sqrt(2))) == 19

    def test_center_not_in_patch(self, z3_patch):
        with pytest.raises(CenterNotInPatch):
            dl.cluster(z3_patch, [0.5, 0, 0], 1.0)

    def test_margin_violation(self, z3_patch):
        with pytest.raises(MarginViolation):
            dl.cluster(z3_patch, [4, 0, 0], 1.0)

    def test_monotone_in_rho(self, z3_patch):
        rng = np.random.default_rng(0)
        for _ in range(50):
            r1, r2 = sorted(rng.uniform(0.2, 2.5, size=2))
            a = dl.cluster(z3_patch, [0, 0, 0], r1)
            b = dl.cluster(z3_patch, [0, 0, 0], r2)
            keys_b = {tuple(p) for p in np.round(b.members, 9)}
            assert all(tuple(p) in keys_b for p in np.round(a.members, 9))

    def test_cluster_equals_union_of_shells(self, z3_patch):
        c = dl.cluster(z3_patch, [0, 0, 0], 2.0)
        dists = np.unique(np.round(c.center_distances, 9))
        total = 0
        for r in dists:
            total += len(dl.shell(z3_patch, [0, 0, 0], float(r)))
        assert total == len(c)

    def test_full_dimensional_at_2R(self, z3_patch):
        c = dl.cluster(z3_patch, [1, 0, 0], SQRT3)
        assert c.affine_dimension() == 3


class TestShell:
    def test_z3_rho1(self, z3_patch):
        assert len(dl.shell(z3_patch, [0, 0, 0], 1.0)) == 6

    def test_empty_shell(self, z3_patch):
        assert len(dl.shell(z3_patch, [0, 0, 0], 1.2)) == 0

    def test_zero_shell_is_center(self, z3_patch):
        s = dl.shell(z3_patch, [0, 0, 0], 0.0)
        assert s.shape == (1, 3)
        assert np.allclose(s[0], 0)


class TestFileFormat:
    def test_roundtrip(self, tmp_path, c4v_patch):
        path = tmp_path / "set.xyz"
        save_patch(c4v_patch, path)
        back = load_patch(path)
        assert np.allclose(back.points, c4v_patch.points)
        assert np.allclose(back.box_lo, c4v_patch.box_lo)
        assert np.allclose(back.box_hi, c4v_patch.box_hi)
        assert back.declared_R == pytest.approx(c4v_patch.declared_R)

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "pts.xyz"
        path.write_text("# a comment\n\n0 0 0\n1 0 0\n# trailing\n")
        p = load_patch(path)
        assert len(p) == 2

    def test_bad_line(self, tmp_path):
        path = tmp_path / "bad.xyz"
        path.write_text("0 0 0\n1 0\n")
        with pytest.raises(ParseError, match="line 2"):
            load_patch(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.xyz"
        path.write_text("# nothing\n")
        with pytest.raises(ParseError, match="no points"):
            load_patch(path)
