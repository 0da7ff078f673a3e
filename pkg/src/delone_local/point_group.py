"""Cluster stabilizers, Schoenflies classification, and tower heights.

The stabilizer S_x(rho) of a cluster is the finite group of orthogonal
maps about the center that map the member set onto itself.  Elements are
found with the same frame-matching candidate machinery used for cluster
equivalence, then completed by closure (a no-op when enumeration is
complete, kept as a safety net) and classified into a Schoenflies label.

Order-theoretic helpers: ``omega`` (prime factors with multiplicity) and
``tower_height`` (longest chain of strictly nested subgroups), computed
exactly by enumerating the subgroup lattice through an integer
multiplication table.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .delone_core import Cluster
from .equivalence import _candidate_maps, _frame_offsets, _sets_match, match_tolerance
from .errors import (
    GroupTooLarge,
    LowerDimensionalCluster,
    NotAGroup,
    UnrecognizedGroup,
)
from .geometry import (
    DEFAULT_CTX,
    ElementKind,
    ToleranceContext,
    canonical_axis,
    classify_element,
    nearest_orthogonal,
)

__all__ = [
    "SchoenfliesLabel",
    "PointGroup",
    "stabilizer",
    "schoenflies",
    "schoenflies_from_matrices",
    "group_from_generators",
    "omega",
    "tower_height",
    "tower_height_from_matrices",
    "max_rotation_order",
]

#: Two orthogonal maps are the same group element iff their max-norm
#: difference is below this (far below the minimal separation of distinct
#: elements in groups of order <= 120).
ELEMENT_TOL = 1e-6

#: Largest group order supported by exact subgroup-lattice computations
#: (the largest finite subgroup of O(3), Ih, has order 120).
MAX_GROUP_ORDER = 120


@dataclass(frozen=True)
class SchoenfliesLabel:
    """Schoenflies label: axial families carry the axis order n."""

    family: str  # one of C, S, Ch, Cv, D, Dh, Dd, T, Td, Th, O, Oh, I, Ih
    n: Optional[int] = None

    _AXIAL = {"C", "S", "Ch", "Cv", "D", "Dh", "Dd"}
    _POLYHEDRAL_ORDERS = {"T": 12, "Td": 24, "Th": 24, "O": 24, "Oh": 48,
                          "I": 60, "Ih": 120}

    def __post_init__(self) -> None:
        if self.family in self._AXIAL:
            if self.n is None or self.n < 1:
                raise ValueError(f"family {self.family} needs n >= 1")
        elif self.family in self._POLYHEDRAL_ORDERS:
            if self.n is not None:
                raise ValueError(f"family {self.family} takes no n")
        else:
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def order(self) -> int:
        """Group order implied by the label."""
        if self.family in self._POLYHEDRAL_ORDERS:
            return self._POLYHEDRAL_ORDERS[self.family]
        n = self.n
        if self.family == "C":
            return n
        if self.family == "S":
            return n if n % 2 == 0 else 2 * n
        if self.family in ("Ch", "Cv", "D"):
            return 2 * n
        return 4 * n  # Dh, Dd

    def __str__(self) -> str:
        if self.family in self._POLYHEDRAL_ORDERS:
            return self.family
        if self.family in ("C", "S", "D"):
            return f"{self.family}{self.n}"
        return f"{self.family[0]}{self.n}{self.family[1].lower()}"


@dataclass(frozen=True)
class PointGroup:
    """Finite group of orthogonal maps acting about a center point."""

    center: np.ndarray
    elements: Tuple[np.ndarray, ...]
    label: SchoenfliesLabel

    @property
    def order(self) -> int:
        return len(self.elements)


def _element_key(q: np.ndarray) -> tuple:
    r = np.round(np.asarray(q, dtype=float), 6) + 0.0
    return tuple(r.ravel())


def _dedupe(mats: Sequence[np.ndarray]) -> List[np.ndarray]:
    seen = {}
    for m in mats:
        k = _element_key(m)
        if k not in seen:
            seen[k] = m
    return list(seen.values())


def _closure_matrices(mats: Sequence[np.ndarray],
                      limit: int = 2 * MAX_GROUP_ORDER) -> List[np.ndarray]:
    """Close a set of orthogonal maps under products (finite-group closure)."""
    elems: Dict[tuple, np.ndarray] = {_element_key(np.eye(3)): np.eye(3)}
    frontier = []
    for m in _dedupe(mats):
        k = _element_key(m)
        if k not in elems:
            elems[k] = m
            frontier.append(m)
    while frontier:
        new = []
        current = list(elems.values())
        for f in frontier:
            for g in current:
                for prod in (f @ g, g @ f):
                    prod = nearest_orthogonal(prod)
                    k = _element_key(prod)
                    if k not in elems:
                        elems[k] = prod
                        new.append(prod)
                        if len(elems) > limit:
                            raise GroupTooLarge(
                                f"closure exceeded {limit} elements")
        frontier = new
    return list(elems.values())


def group_from_generators(generators: Sequence[np.ndarray],
                          center=(0.0, 0.0, 0.0),
                          ctx: ToleranceContext = DEFAULT_CTX) -> PointGroup:
    """Build a PointGroup as the closure of generator matrices."""
    elements = _closure_matrices(generators)
    label = schoenflies_from_matrices(elements, ctx)
    return PointGroup(center=np.asarray(center, dtype=float),
                      elements=tuple(elements), label=label)


def _check_group(mats: Sequence[np.ndarray]) -> None:
    keys = {_element_key(m) for m in mats}
    if len(keys) != len(mats):
        raise NotAGroup("duplicate elements")
    if _element_key(np.eye(3)) not in keys:
        raise NotAGroup("identity missing")
    for m in mats:
        if _element_key(nearest_orthogonal(m.T)) not in keys:
            raise NotAGroup("not closed under inverses")
    for a in mats:
        for b in mats:
            if _element_key(nearest_orthogonal(a @ b)) not in keys:
                raise NotAGroup("not closed under products")


def stabilizer(c: Cluster, ctx: ToleranceContext = DEFAULT_CTX) -> PointGroup:
    """The cluster group S_x(rho): all orthogonal maps about the center
    mapping the member set to itself.

    Raises :class:`LowerDimensionalCluster` for clusters whose affine
    hull has dimension < 3 (their stabilizer is infinite).
    """
    if c.affine_dimension() < 3:
        raise LowerDimensionalCluster(
            "cluster is not full-dimensional; its stabilizer is infinite")
    offsets = c.offsets
    dists = np.linalg.norm(offsets, axis=1)
    mtol = match_tolerance(c.radius)
    tree = cKDTree(offsets)
    frame = _frame_offsets(offsets, dists, want=3)
    nz = offsets[dists > 1e-12]
    found = [np.eye(3)]
    for q in _candidate_maps(frame, nz, c.radius):
        if _sets_match(offsets @ q.T, offsets, tree, mtol):
            found.append(q)
    elements = _dedupe(found)
    # Frame enumeration is complete, so closure is a no-op; run it anyway
    # and re-verify any (unexpected) new elements.
    closed = _closure_matrices(elements)
    if len(closed) != len(elements):
        elements = [q for q in closed
                    if _sets_match(offsets @ q.T, offsets, tree, mtol)]
    label = schoenflies_from_matrices(elements, ctx)
    return PointGroup(center=c.center.copy(), elements=tuple(elements),
                      label=label)


# --- Schoenflies classification --------------------------------------------

def _axis_key(axis: np.ndarray) -> tuple:
    return tuple(np.round(canonical_axis(axis), 6) + 0.0)


def schoenflies(g: PointGroup, ctx: ToleranceContext = DEFAULT_CTX) -> SchoenfliesLabel:
    """Classify a verified point group; see :func:`schoenflies_from_matrices`."""
    _check_group(list(g.elements))
    return schoenflies_from_matrices(g.elements, ctx)


def schoenflies_from_matrices(elements: Sequence[np.ndarray],
                              ctx: ToleranceContext = DEFAULT_CTX) -> SchoenfliesLabel:
    """Schoenflies label of a finite subgroup of O(3) given its elements.

    Decision tree: two or more rotation axes of order >= 3 send us to the
    polyhedral branch (T/Td/Th/O/Oh/I/Ih by order, inversion, and
    mirrors); otherwise each axis of maximal rotation order is tried as
    the principal axis and the first axial label whose order formula
    matches the group order wins (this resolves the principal-axis
    ambiguity of D2-like groups).  Aliased labels are canonicalized:
    Cs = C1h -> S1, Ci -> S2, Cnh with odd n -> Sn.
    """
    kinds: List[ElementKind] = [classify_element(q, ctx) for q in elements]
    order = len(elements)

    has_inversion = any(k.kind == "inversion" for k in kinds)
    reflections = [k for k in kinds if k.kind == "reflection"]
    rotations = [k for k in kinds if k.kind == "rotation"]
    rotoreflections = [k for k in kinds if k.kind == "rotoreflection"]

    # distinct rotation axes with their maximal order
    axis_orders: Dict[tuple, int] = {}
    axis_vecs: Dict[tuple, np.ndarray] = {}
    for k in rotations:
        ak = _axis_key(k.axis)
        axis_orders[ak] = max(axis_orders.get(ak, 0), k.order)
        axis_vecs[ak] = canonical_axis(k.axis)

    n_max = max(axis_orders.values(), default=1)
    high_axes = [ak for ak, n in axis_orders.items() if n >= 3]

    if len(high_axes) >= 2:
        return _polyhedral_label(order, has_inversion, bool(reflections))

    if n_max == 1:
        if order == 1:
            return SchoenfliesLabel("C", 1)
        if order == 2 and has_inversion:
            return SchoenfliesLabel("S", 2)  # Ci
        if order == 2 and reflections:
            return SchoenfliesLabel("S", 1)  # Cs = C1h
        raise UnrecognizedGroup(f"no rotation axis, order {order}")

    principal_candidates = sorted(
        (ak for ak, n in axis_orders.items() if n == n_max),
        key=lambda ak: ak)
    for ak in principal_candidates:
        label = _axial_label(ak, axis_vecs[ak], n_max, axis_orders, axis_vecs,
                             reflections, rotoreflections, ctx)
        if label is not None and label.order == order:
            return label
    raise UnrecognizedGroup(
        f"axial decision tree exhausted at order {order}, n_max {n_max}")


def _polyhedral_label(order: int, has_inversion: bool,
                      has_reflections: bool) -> SchoenfliesLabel:
    if order == 12:
        return SchoenfliesLabel("T")
    if order == 24:
        if has_inversion:
            return SchoenfliesLabel("Th")
        if has_reflections:
            return SchoenfliesLabel("Td")
        return SchoenfliesLabel("O")
    if order == 48:
        return SchoenfliesLabel("Oh")
    if order == 60:
        return SchoenfliesLabel("I")
    if order == 120:
        return SchoenfliesLabel("Ih")
    raise UnrecognizedGroup(f"polyhedral branch with order {order}")


def _axial_label(axis_key: tuple, axis: np.ndarray, n: int,
                 axis_orders: Dict[tuple, int], axis_vecs: Dict[tuple, np.ndarray],
                 reflections: List[ElementKind],
                 rotoreflections: List[ElementKind],
                 ctx: ToleranceContext) -> Optional[SchoenfliesLabel]:
    ang_tol = 1e-6

    def parallel(v):
        return abs(abs(float(np.dot(v, axis))) - 1.0) <= ang_tol

    def perpendicular(v):
        return abs(float(np.dot(v, axis))) <= ang_tol

    perp_c2 = sum(1 for ak, o in axis_orders.items()
                  if o == 2 and ak != axis_key and perpendicular(axis_vecs[ak]))
    sigma_h = any(parallel(r.axis) for r in reflections)
    sigma_v = sum(1 for r in reflections if perpendicular(r.axis))
    s2n = any(parallel(s.axis) and s.order == 2 * n for s in rotoreflections)

    if perp_c2 >= n and n >= 2:
        if sigma_h:
            return SchoenfliesLabel("Dh", n)
        if sigma_v >= n:
            return SchoenfliesLabel("Dd", n)
        return SchoenfliesLabel("D", n)
    if sigma_h:
        # Cnh and Sn coincide for odd n; canonicalize to the S spelling
        # (the spelling the bounds table keys on).
        if n % 2 == 1:
            return SchoenfliesLabel("S", n)
        return SchoenfliesLabel("Ch", n)
    if sigma_v >= n:
        return SchoenfliesLabel("Cv", n)
    if s2n:
        return SchoenfliesLabel("S", 2 * n)
    return SchoenfliesLabel("C", n)


# --- order arithmetic -------------------------------------------------------

def omega(n: int) -> int:
    """Number of prime factors of n counted with multiplicity; omega(1) = 0."""
    n = int(n)
    if n < 1:
        raise ValueError("omega requires n >= 1")
    count = 0
    d = 2
    while d * d <= n:
        while n % d == 0:
            n //= d
            count += 1
        d += 1
    if n > 1:
        count += 1
    return count


def _mult_table(mats: Sequence[np.ndarray]) -> List[List[int]]:
    keys = {_element_key(m): i for i, m in enumerate(mats)}
    n = len(mats)
    M = np.stack([np.asarray(m, dtype=float) for m in mats])
    prods = np.einsum("iab,jbc->ijac", M, M)
    table = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            k = _element_key(prods[i, j])
            if k not in keys:
                raise NotAGroup("element set not closed under products")
            table[i][j] = keys[k]
    return table


def _close_indices(gens: FrozenSet[int], table: List[List[int]]) -> FrozenSet[int]:
    s = set(gens)
    s.add(0)  # identity index by construction below
    frontier = list(s)
    while frontier:
        new = []
        members = list(s)
        for f in frontier:
            row_f = table[f]
            for g in members:
                for k in (row_f[g], table[g][f]):
                    if k not in s:
                        s.add(k)
                        new.append(k)
        frontier = new
    return frozenset(s)


def _subgroup_lattice(table: List[List[int]]) -> List[FrozenSet[int]]:
    n = len(table)
    whole = frozenset(range(n))
    cyclics = {_close_indices(frozenset({i}), table) for i in range(n)}
    subs = {frozenset({0})} | cyclics | {whole}
    changed = True
    while changed:
        changed = False
        for h in list(subs):
            for c in cyclics:
                if c <= h:
                    continue
                j = _close_indices(h | c, table)
                if j not in subs:
                    subs.add(j)
                    changed = True
    return sorted(subs, key=lambda s: (len(s), sorted(s)))


def tower_height_from_matrices(elements: Sequence[np.ndarray]) -> int:
    """Maximal length of a chain of strictly nested subgroups from the
    group down to the trivial group, both ends included."""
    elements = list(elements)
    if len(elements) > MAX_GROUP_ORDER:
        raise GroupTooLarge(
            f"order {len(elements)} exceeds the ceiling {MAX_GROUP_ORDER}")
    # put the identity at index 0 for _close_indices
    elements = sorted(elements, key=lambda m: float(np.abs(m - np.eye(3)).max()))
    table = _mult_table(elements)
    subs = _subgroup_lattice(table)
    height: Dict[FrozenSet[int], int] = {}
    for s in subs:  # sorted by size, so proper subgroups come first
        best = 0
        for t in subs:
            if len(t) >= len(s):
                break
            if t < s:
                best = max(best, height[t])
        height[s] = best + 1
    return height[subs[-1]]


def tower_height(g: PointGroup) -> int:
    """Tower height m(G) of a point group; see tower_height_from_matrices."""
    return tower_height_from_matrices(list(g.elements))


def max_rotation_order(c: Cluster, ctx: ToleranceContext = DEFAULT_CTX) -> int:
    """Maximal order of a (proper) rotation in the cluster's stabilizer;
    1 if the stabilizer contains no nontrivial rotation."""
    g = stabilizer(c, ctx)
    best = 1
    for q in g.elements:
        k = classify_element(q, ctx)
        if k.kind == "rotation":
            best = max(best, k.order)
    return best
