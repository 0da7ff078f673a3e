"""Constructors for the concrete point sets used throughout the package.

All generators return a :class:`~delone_local.delone_core.PointPatch`
whose points are exactly the intersection of the intended infinite set
with the requested closed box (boundary points included), ordered
lexicographically by (z, y, x).  Regenerating with a larger box and
clipping therefore reproduces the smaller patch bit-exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import ceil, floor
from typing import Tuple

import numpy as np

from .delone_core import PointPatch
from .errors import BoxTooSmall, DegenerateAntiprism, InvalidShift
from .geometry import as_point

__all__ = [
    "HexLatticeSpec",
    "BiLatticeSpec",
    "cubic_lattice",
    "hex_lattice",
    "hex_bilattice",
    "c4v_example",
    "antiprism_points",
    "antiprism_patch",
]

_CLIP_TOL = 1e-9


@dataclass(frozen=True)
class HexLatticeSpec:
    """Hexagonal layer lattice with Gram matrix
    [[lam, lam/2, 0], [lam/2, lam, 0], [0, 0, mu]].

    The realized basis is one Cholesky-style factorization of that Gram
    matrix: a1 = (sqrt(lam), 0, 0), a2 = (sqrt(lam)/2, sqrt(3 lam)/2, 0),
    a3 = (0, 0, sqrt(mu)).
    """

    lam: float = 1.0
    mu: float = 1.0

    def __post_init__(self) -> None:
        if not (self.lam > 0 and self.mu > 0):
            raise ValueError("lam and mu must be positive")

    @property
    def basis(self) -> np.ndarray:
        """Rows are the three basis vectors."""
        sl = np.sqrt(self.lam)
        return np.array([
            [sl, 0.0, 0.0],
            [sl / 2.0, np.sqrt(3.0 * self.lam) / 2.0, 0.0],
            [0.0, 0.0, np.sqrt(self.mu)],
        ])

    @property
    def gram(self) -> np.ndarray:
        b = self.basis
        return b @ b.T

    @property
    def min_distance(self) -> float:
        """Minimal interpoint distance of the infinite lattice."""
        return float(np.sqrt(min(self.lam, self.mu)))


@dataclass(frozen=True)
class BiLatticeSpec:
    """Union of a hexagonal lattice and one vertical translate of it.

    The shift t must be orthogonal to the layer plane (so t = (0, 0, t_z))
    with 0 < |t_z| < sqrt(mu) (in particular t is not a lattice vector).
    """

    hex: HexLatticeSpec
    t: Tuple[float, float, float]

    def __post_init__(self) -> None:
        t = as_point(self.t)
        object.__setattr__(self, "t", (float(t[0]), float(t[1]), float(t[2])))
        if abs(t[0]) > _CLIP_TOL or abs(t[1]) > _CLIP_TOL:
            raise InvalidShift("shift must be orthogonal to the layer plane")
        step = np.sqrt(self.hex.mu)
        if not (_CLIP_TOL < abs(t[2]) < step - _CLIP_TOL):
            raise InvalidShift(
                f"|t_z| must lie strictly between 0 and sqrt(mu) = {step:g}")

    @property
    def t_vec(self) -> np.ndarray:
        return np.array(self.t, dtype=float)


def _order_zyx(points: np.ndarray) -> np.ndarray:
    order = np.lexsort((points[:, 0], points[:, 1], points[:, 2]))
    return points[order]


def _validate_box(box_lo, box_hi) -> Tuple[np.ndarray, np.ndarray]:
    lo = as_point(box_lo)
    hi = as_point(box_hi)
    if np.any(hi <= lo):
        raise BoxTooSmall("box is degenerate (hi <= lo on some axis)")
    return lo, hi


def cubic_lattice(box_lo, box_hi) -> PointPatch:
    """All integer points in the closed box."""
    lo, hi = _validate_box(box_lo, box_hi)
    axes = [np.arange(ceil(l - _CLIP_TOL), floor(h + _CLIP_TOL) + 1)
            for l, h in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    return PointPatch(_order_zyx(pts.astype(float)), lo, hi)


def _lattice_points(basis: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                    shift: np.ndarray | None = None) -> np.ndarray:
    """Integer combinations of the basis rows (plus optional shift) that
    land in the closed box."""
    shift = np.zeros(3) if shift is None else shift
    corners = np.array(list(product(*zip(lo, hi)))) - shift
    frac = corners @ np.linalg.inv(basis)  # solves n @ basis = corner
    n_lo = np.floor(frac.min(axis=0)).astype(int) - 1
    n_hi = np.ceil(frac.max(axis=0)).astype(int) + 1
    ranges = [np.arange(a, b + 1) for a, b in zip(n_lo, n_hi)]
    idx = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, 3)
    pts = idx.astype(float) @ basis + shift
    inside = (np.all(pts >= lo - _CLIP_TOL, axis=1)
              & np.all(pts <= hi + _CLIP_TOL, axis=1))
    return pts[inside]


def hex_lattice(spec: HexLatticeSpec, box_lo, box_hi) -> PointPatch:
    """Hexagonal lattice patch for the given Gram parameters."""
    lo, hi = _validate_box(box_lo, box_hi)
    pts = _lattice_points(spec.basis, lo, hi)
    return PointPatch(_order_zyx(pts), lo, hi)


def hex_bilattice(spec: BiLatticeSpec, box_lo, box_hi) -> PointPatch:
    """Bi-lattice patch: the hexagonal lattice union its shift by t."""
    lo, hi = _validate_box(box_lo, box_hi)
    base = _lattice_points(spec.hex.basis, lo, hi)
    shifted = _lattice_points(spec.hex.basis, lo, hi, shift=spec.t_vec)
    pts = np.vstack([base, shifted])
    return PointPatch(_order_zyx(pts), lo, hi)


def c4v_example(box_lo, box_hi) -> PointPatch:
    """The layered cubic example {(x, y, z) in Z^3 : z % 3 != 0}.

    A regular system whose 2R-cluster group is C4v; its covering radius
    is sqrt(3/2) (deep hole at half-integer x, y on a removed layer).
    """
    lo, hi = _validate_box(box_lo, box_hi)
    axes = [np.arange(ceil(l - _CLIP_TOL), floor(h + _CLIP_TOL) + 1)
            for l, h in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    pts = pts[pts[:, 2] % 3 != 0]
    return PointPatch(_order_zyx(pts.astype(float)), lo, hi,
                      declared_R=float(np.sqrt(1.5)))


def antiprism_points(a: float, b: float) -> np.ndarray:
    """The 8 vertices of the square antiprism used in the exclusion
    argument for 8-fold rotoreflection symmetry:

        (+-a, 0, b), (0, +-a, b), (+-a/sqrt2, +-a/sqrt2, -b).

    All vertices lie at distance sqrt(a^2 + b^2) from the origin.
    """
    a = float(a)
    b = float(b)
    if a <= 0:
        raise ValueError("antiprism needs a > 0")
    if b == 0:
        raise DegenerateAntiprism("b = 0 collapses the two bases into a plane")
    s = a / np.sqrt(2.0)
    return np.array([
        [a, 0.0, b], [-a, 0.0, b], [0.0, a, b], [0.0, -a, b],
        [s, s, -b], [s, -s, -b], [-s, s, -b], [-s, -s, -b],
    ])


def antiprism_patch(a: float, b: float) -> PointPatch:
    """Patch holding the origin plus the 8 antiprism vertices.

    Note: this is a bounded configuration, not a Delone patch; it exists
    so the CLI can write the configuration to a point-set file.
    """
    verts = antiprism_points(a, b)
    pts = np.vstack([np.zeros(3), verts])
    lo = pts.min(axis=0) - 0.5
    hi = pts.max(axis=0) + 0.5
    return PointPatch(_order_zyx(pts), lo, hi)
