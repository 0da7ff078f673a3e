"""Finite patches of Delone sets: clusters, shells, and set parameters.

An infinite Delone set is represented by a finite :class:`PointPatch`
together with an explicit axis-aligned ``trusted_box``: the caller asserts
that the patch points are exactly the intersection of the intended
infinite set with the box.  Every cluster/shell operation enforces a
margin discipline — a ball that exits the trusted box raises
:class:`MarginViolation` rather than silently truncating the cluster.

The packing convention is the unit-distance scaling: pairwise distances
of a valid patch are >= 1 (packing radius 1/2).  ``R`` denotes the
covering radius, i.e. the radius of the largest ball empty of set points.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import QhullError, Voronoi, cKDTree

from .errors import (
    BoxTooSmall,
    CenterNotInPatch,
    MarginViolation,
    ParseError,
    TooFewPoints,
)
from .geometry import GEOM_TOL, as_point, as_points

__all__ = [
    "PointPatch",
    "Cluster",
    "packing_diameter",
    "covering_radius",
    "cluster",
    "shell",
    "load_patch",
    "save_patch",
    "lex_sort",
]


def lex_sort(points: np.ndarray) -> np.ndarray:
    """Sort points lexicographically by (x, y, z)."""
    points = as_points(points)
    order = np.lexsort((points[:, 2], points[:, 1], points[:, 0]))
    return points[order]


class PointPatch:
    """Finite point set plus the axis-aligned box it is trusted on.

    Attributes:
        points: (n, 3) array of patch points.
        box_lo, box_hi: corners of the trusted box.
        declared_R: covering radius declared by the producer of the patch,
            if any; overrides the patch-restricted estimate on request.
        packing_violations: list of index pairs closer than 1 - geom_tol.
            A nonempty list means the patch is not a valid unit-distance
            Delone patch; operations still run, but consumers (e.g. the
            CLI) surface the violation.
    """

    def __init__(self, points, box_lo, box_hi, declared_R: Optional[float] = None,
                 geom_tol: float = GEOM_TOL):
        self.points = as_points(points)
        self.box_lo = as_point(box_lo)
        self.box_hi = as_point(box_hi)
        if np.any(self.box_hi <= self.box_lo):
            raise BoxTooSmall("trusted box is degenerate (hi <= lo on some axis)")
        self.declared_R = None if declared_R is None else float(declared_R)
        self.geom_tol = float(geom_tol)
        self._tree = cKDTree(self.points) if len(self.points) else None
        if self._tree is not None:
            pairs = self._tree.query_pairs(1.0 - self.geom_tol)
            self.packing_violations = sorted(pairs)
        else:
            self.packing_violations = []

    def __len__(self) -> int:
        return len(self.points)

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            raise TooFewPoints("patch has no points")
        return self._tree

    @property
    def packing_ok(self) -> bool:
        return not self.packing_violations

    def index_of(self, center) -> int:
        """Index of the patch point equal to ``center`` within geom_tol."""
        c = as_point(center)
        dist, idx = self.tree.query(c)
        if dist > self.geom_tol:
            raise CenterNotInPatch(
                f"no patch point within {self.geom_tol:g} of {c.tolist()}")
        return int(idx)

    def ball_inside_box(self, center, rho: float) -> bool:
        """True iff the closed ball B(center, rho) lies in the trusted box."""
        c = as_point(center)
        tol = self.geom_tol
        return bool(np.all(c - rho >= self.box_lo - tol)
                    and np.all(c + rho <= self.box_hi + tol))

    def usable_centers(self, rho: float) -> np.ndarray:
        """Patch points whose rho-ball stays inside the trusted box,
        sorted lexicographically."""
        tol = self.geom_tol
        mask = (np.all(self.points - rho >= self.box_lo - tol, axis=1)
                & np.all(self.points + rho <= self.box_hi + tol, axis=1))
        return lex_sort(self.points[mask])


@dataclass(frozen=True)
class Cluster:
    """The cluster C_x(rho): all set points within the closed rho-ball at x."""

    center: np.ndarray
    radius: float
    members: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "members", lex_sort(self.members))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def offsets(self) -> np.ndarray:
        """Members relative to the center (center's own offset included)."""
        return self.members - self.center

    @property
    def center_distances(self) -> np.ndarray:
        """Sorted distances of members from the center."""
        return np.sort(np.linalg.norm(self.offsets, axis=1))

    def affine_dimension(self, tol: float = 1e-9) -> int:
        """Dimension of the affine hull of the members."""
        if len(self.members) <= 1:
            return 0
        diffs = self.members - self.members[0]
        s = np.linalg.svd(diffs, compute_uv=False)
        return int(np.sum(s > tol * max(1.0, float(s[0]))))


def packing_diameter(patch: PointPatch) -> float:
    """Minimal pairwise distance of the patch (equals 2r of the patch)."""
    if len(patch) < 2:
        raise TooFewPoints("packing_diameter needs at least two points")
    d, _ = patch.tree.query(patch.points, k=2)
    return float(d[:, 1].min())


def covering_radius(patch: PointPatch, grid_h: float = 0.05) -> float:
    """Radius of the largest empty ball centered well inside the box.

    The maximizing center is sought among Voronoi vertices of the patch
    (the only local maxima of the distance-to-set function away from the
    boundary), restricted to centers whose empty ball lies inside the
    trusted box.  Falls back to a uniform grid scan at resolution
    ``grid_h`` if the Voronoi construction degenerates; the fallback is
    accurate to ``grid_h * sqrt(3)``.
    """
    if len(patch) < 2:
        raise TooFewPoints("covering_radius needs at least two points")
    try:
        vor = Voronoi(patch.points)
        verts = vor.vertices
    except (QhullError, ValueError):
        verts = None

    best = _covering_from_candidates(patch, verts) if verts is not None else None
    if best is None:
        best = _covering_from_candidates(patch, _grid_candidates(patch, grid_h))
    if best is None:
        raise BoxTooSmall("no empty-ball center fits inside the trusted box")
    return best


def _grid_candidates(patch: PointPatch, h: float) -> np.ndarray:
    axes = [np.arange(lo, hi + h / 2, h)
            for lo, hi in zip(patch.box_lo, patch.box_hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    return grid

def _covering_from_candidates(patch: PointPatch, cands: np.ndarray) -> Optional[float]:
    if cands is None or len(cands) == 0:
        return None
    d, _ = patch.tree.query(cands)
    tol = patch.geom_tol
    inside = (np.all(cands - d[:, None] >= patch.box_lo - tol, axis=1)
              & np.all(cands + d[:, None] <= patch.box_hi + tol, axis=1))
    if not np.any(inside):
        return None
    return float(d[inside].max())


def cluster(patch: PointPatch, center, rho: float) -> Cluster:
    """The cluster C_center(rho) of the patch (closed ball membership)."""
    idx = patch.index_of(center)
    c = patch.points[idx]
    if rho < 0:
        raise ValueError("cluster radius must be non-negative")
    if not patch.ball_inside_box(c, rho):
        raise MarginViolation(
            f"ball of radius {rho:g} at {c.tolist()} exits the trusted box")
    members_idx = patch.tree.query_ball_point(c, rho + patch.geom_tol)
    members = patch.points[sorted(members_idx)]
    return Cluster(center=c, radius=float(rho), members=members)


def shell(patch: PointPatch, center, rho: float) -> np.ndarray:
    """The rho-shell: points at distance exactly rho (within geom_tol).

    Excludes the center unless rho = 0, in which case the shell is the
    center alone.
    """
    idx = patch.index_of(center)
    c = patch.points[idx]
    if rho < 0:
        raise ValueError("shell radius must be non-negative")
    if not patch.ball_inside_box(c, rho):
        raise MarginViolation(
            f"ball of radius {rho:g} at {c.tolist()} exits the trusted box")
    if rho <= patch.geom_tol:
        return c[None, :].copy()
    cand_idx = patch.tree.query_ball_point(c, rho + patch.geom_tol)
    cand = patch.points[sorted(cand_idx)]
    dists = np.linalg.norm(cand - c, axis=1)
    on_shell = np.abs(dists - rho) <= patch.geom_tol
    return lex_sort(cand[on_shell])


# --- point-set file I/O -----------------------------------------------------
#
# Format: UTF-8 text, LF newlines; one point per line "x y z"
# (whitespace-separated decimals); '#' starts a comment.  Recognized header
# comments: "# box lo_x lo_y lo_z hi_x hi_y hi_z" and "# R <value>".

def save_patch(patch: PointPatch, path) -> None:
    """Write a patch in the point-set file format."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        lo, hi = patch.box_lo, patch.box_hi
        f.write("# box %.10g %.10g %.10g %.10g %.10g %.10g\n"
                % (lo[0], lo[1], lo[2], hi[0], hi[1], hi[2]))
        if patch.declared_R is not None:
            f.write("# R %.10g\n" % patch.declared_R)
        if len(patch) >= 2:
            f.write("# min_dist %.10g\n" % packing_diameter(patch))
        for p in patch.points:
            f.write("%.10g %.10g %.10g\n" % (p[0], p[1], p[2]))


def load_patch(path) -> PointPatch:
    """Read a patch from the point-set file format.

    If no "# box" header is present, the bounding box of the points
    (padded by nothing) is used as the trusted box.
    """
    pts = []
    box = None
    declared_R = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if fields[:1] == ["box"]:
                    if len(fields) != 7:
                        raise ParseError(f"line {lineno}: box header needs 6 numbers")
                    try:
                        vals = [float(v) for v in fields[1:]]
                    except ValueError:
                        raise ParseError(f"line {lineno}: bad box header") from None
                    box = (vals[:3], vals[3:])
                elif fields[:1] == ["R"]:
                    if len(fields) != 2:
                        raise ParseError(f"line {lineno}: R header needs 1 number")
                    try:
                        declared_R = float(fields[1])
                    except ValueError:
                        raise ParseError(f"line {lineno}: bad R header") from None
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ParseError(f"line {lineno}: expected 3 coordinates, got {len(fields)}")
            try:
                pts.append([float(v) for v in fields])
            except ValueError:
                raise ParseError(f"line {lineno}: bad coordinate") from None
    if not pts:
        raise ParseError("no points in file")
    points = np.array(pts, dtype=float)
    if box is None:
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        # guard against a degenerate box for planar/collinear files
        span = hi - lo
        pad = np.where(span <= 0, 0.5, 0.0)
        box = (lo - pad, hi + pad)
    return PointPatch(points, box[0], box[1], declared_R=declared_R)
