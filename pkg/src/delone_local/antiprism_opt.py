"""Constrained optimizations over pairs of unit-circumradius square
antiprisms.

Two optimization problems arise in the proof that 8-fold rotoreflection
symmetry cannot occur in a 2R-cluster group:

* Problem 1 ("lemma1"): place a second antiprism P_y so that it shares the
  vertex x = (0,0,0) with the first antiprism's center configuration, and
  maximize the minimal distance between vertices of P_x and P_y that are
  at least ``pair_filter`` (default 0.01) apart.
* Problem 2 ("lemma2"): maximize |z u1| + |z u2| - 1 - sqrt(a^2 + b^2)
  over the admissible positions of a base-vertex pair u1, u2 relative to
  the off-axis point z = (a, 0, b).

Both feasible sets are low-dimensional manifolds; the optimizers seed a
deterministic uniform grid over an explicit parameterization of the
manifold and refine the best seeds with Nelder-Mead (parameters clamped
onto the feasible region, strict inequalities shrunk by ``eps``).
Everything is deterministic: identical reports across runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .errors import BudgetExhausted, InfeasibleParams
from .generators import antiprism_points

__all__ = [
    "Lemma1Params",
    "Lemma2Params",
    "OptBudget",
    "OptimizationReport",
    "p_y_vertices",
    "lemma1_objective",
    "lemma2_objective",
    "optimize_lemma1",
    "optimize_lemma2",
    "PHI_MIN",
    "PHI_MAX",
    "LEMMA2_B_MIN",
]

_SQRT2 = np.sqrt(2.0)
#: Default feasibility tolerance for the equality/inequality constraints.
FEAS_TOL = 1e-9

# Feasible (a, b) = (cos phi, sin phi) with a, b > 0: a^2 >= b^2 gives
# phi <= pi/4, and a^2 (1 - sqrt2) + 3 b^2 >= 0 gives
# tan^2 phi >= (sqrt2 - 1) / 3.
PHI_MIN = float(np.arctan(np.sqrt((_SQRT2 - 1.0) / 3.0)))
PHI_MAX = float(np.pi / 4.0)

#: Smallest feasible b in problem 2: a^2 + b^2 > 1 with
#: a^2 <= 3 (sqrt2 + 1) b^2 forces b^2 (3 sqrt2 + 4) > 1.
LEMMA2_B_MIN = float(1.0 / np.sqrt(3.0 * _SQRT2 + 4.0))


@dataclass(frozen=True)
class Lemma1Params:
    """Parameters of problem 1: y = (a, 0, b) and the unit vector
    (x, y, z) from y to the opposite in-base vertex z of P_y."""

    a: float
    b: float
    x: float
    y: float
    z: float

    def feasibility_residual(self) -> float:
        a, b, x, y, z = self.a, self.b, self.x, self.y, self.z
        res = [
            abs(a * a + b * b - 1.0),
            abs(x * x + y * y + z * z - 1.0),
            abs(a * x + b * z - (a * a - b * b)),
            max(0.0, b * b - a * a),
            max(0.0, -(a * a * (1.0 - _SQRT2) + 3.0 * b * b)),
        ]
        return max(res)

    def feasible(self, feas_tol: float = FEAS_TOL) -> bool:
        return self.feasibility_residual() <= feas_tol and self.b != 0.0

    @staticmethod
    def from_angles(phi: float, psi: float) -> "Lemma1Params":
        """Exact parameterization of the feasible manifold.

        (a, b) = (cos phi, sin phi); (x, y, z) runs over the circle cut
        out of the unit sphere by the plane a x + b z = a^2 - b^2, with
        angle psi measured from the in-plane direction (-b, 0, a).
        """
        a = float(np.cos(phi))
        b = float(np.sin(phi))
        c = a * a - b * b
        rad = max(0.0, 1.0 - c * c)
        r = np.sqrt(rad)
        x = c * a - r * np.cos(psi) * b
        y = r * np.sin(psi)
        z = c * b + r * np.cos(psi) * a
        return Lemma1Params(a, b, float(x), float(y), float(z))


@dataclass(frozen=True)
class Lemma2Params:
    """Parameters of problem 2: z = (a, 0, b), u1 = (x, y, 1 - b)."""

    a: float
    b: float
    x: float
    y: float

    def feasibility_residual(self) -> float:
        a, b, x, y = self.a, self.b, self.x, self.y
        res = [
            max(0.0, 1.0 - (a * a + b * b)),   # strict: a^2 + b^2 > 1
            max(0.0, -a),
            max(0.0, -b),                      # strict: b > 0
            max(0.0, b - 0.5),                 # strict: b < 1/2
            max(0.0, b * b - a * a),
            max(0.0, -(a * a * (1.0 - _SQRT2) + 3.0 * b * b)),
            abs(x * x + y * y - a * a),
            max(0.0, -x),
            max(0.0, -y),
        ]
        return max(res)

    def feasible(self, feas_tol: float = FEAS_TOL) -> bool:
        if self.feasibility_residual() > feas_tol:
            return False
        # the three strict inequalities must hold strictly
        return (self.a * self.a + self.b * self.b > 1.0
                and 0.0 < self.b < 0.5)


@dataclass(frozen=True)
class OptBudget:
    """Deterministic search budget for the antiprism optimizers."""

    grid_phi: int = 200
    grid_psi: int = 200
    grid_lemma2: int = 48
    refine_top: int = 24
    nm_maxiter: int = 400
    eps: float = 1e-6
    pair_filter: float = 0.01
    phi_range: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        if min(self.grid_phi, self.grid_psi, self.grid_lemma2,
               self.refine_top, self.nm_maxiter) < 1:
            raise ValueError("budget counts must be positive")
        if not (self.eps > 0 and self.pair_filter > 0):
            raise ValueError("eps and pair_filter must be positive")


@dataclass(frozen=True)
class OptimizationReport:
    """Result of a deterministic multi-start maximization."""

    best_value: float
    argmax: object
    starts: int
    converged_starts: int
    constraint_residual: float


def _py_vertices_arrays(a, b, x, y, z) -> np.ndarray:
    """Vertices of P_y for broadcastable parameter arrays; returns an
    array of shape broadcast(...) + (8, 3)."""
    a, b, x, y, z = np.broadcast_arrays(*map(np.asarray, (a, b, x, y, z)))
    shape = a.shape + (8, 3)
    out = np.empty(shape, dtype=float)
    zero = np.zeros_like(a)
    vz = np.stack([a + x, y, b + z], axis=-1)
    t = vz / 2.0
    cross = np.stack([b * y, a * z - b * x, -a * y], axis=-1)
    half = cross / (2.0 * b)[..., None]
    out[..., 0, :] = np.stack([zero, zero, zero], axis=-1)  # x itself
    out[..., 1, :] = vz
    out[..., 2, :] = t + half
    out[..., 3, :] = t - half
    other = np.stack([(3.0 * a - x) / 2.0, -y / 2.0, (3.0 * b - z) / 2.0],
                     axis=-1)
    e1 = vz / (2.0 * _SQRT2)
    e2 = half / _SQRT2
    out[..., 4, :] = other + e1 + e2
    out[..., 5, :] = other + e1 - e2
    out[..., 6, :] = other - e1 + e2
    out[..., 7, :] = other - e1 - e2
    return out


def p_y_vertices(p: Lemma1Params, feas_tol: float = FEAS_TOL) -> np.ndarray:
    """The 8 vertices of the antiprism P_y determined by feasible
    problem-1 parameters.

    The base through x = (0,0,0) consists of x, the opposite vertex
    z = (a+x, y, b+z), and the two endpoints of +-(yx cross yz)/(2b)
    placed at the base center t; the other base is obtained from the
    quoted closed-form expression.  Raises InfeasibleParams for
    infeasible p and ZeroDivisionError when b = 0.
    """
    if p.b == 0.0:
        raise ZeroDivisionError("b = 0: antiprism bases coincide")
    if p.feasibility_residual() > feas_tol:
        raise InfeasibleParams(
            f"constraint residual {p.feasibility_residual():.3e} > {feas_tol:g}")
    return _py_vertices_arrays(p.a, p.b, p.x, p.y, p.z)


def _min_filtered_distance(px: np.ndarray, py: np.ndarray,
                           pair_filter: float) -> np.ndarray:
    """Minimal distance between vertex pairs at least pair_filter apart.

    px, py have shape (..., 8, 3); result has shape (...).
    """
    diff = px[..., :, None, :] - py[..., None, :, :]
    d = np.sqrt(np.einsum("...k,...k->...", diff, diff))
    d = np.where(d >= pair_filter, d, np.inf)
    return d.min(axis=(-1, -2))


def lemma1_objective(p: Lemma1Params, pair_filter: float = 0.01,
                     feas_tol: float = FEAS_TOL) -> float:
    """Minimal distance between vertices of P_x and P_y at least
    ``pair_filter`` apart (the problem-1 objective)."""
    py = p_y_vertices(p, feas_tol=feas_tol)
    px = antiprism_points(p.a, p.b)
    return float(_min_filtered_distance(px, py, pair_filter))


def _lemma1_value_from_angles(phi, psi, pair_filter: float) -> np.ndarray:
    """Vectorized objective over angle arrays (same math as the scalar
    path, evaluated in bulk for grid seeding)."""
    phi, psi = np.broadcast_arrays(np.asarray(phi, float), np.asarray(psi, float))
    a = np.cos(phi)
    b = np.sin(phi)
    c = a * a - b * b
    r = np.sqrt(np.maximum(0.0, 1.0 - c * c))
    x = c * a - r * np.cos(psi) * b
    y = r * np.sin(psi)
    z = c * b + r * np.cos(psi) * a
    py = _py_vertices_arrays(a, b, x, y, z)
    s = a / _SQRT2
    zero = np.zeros_like(a)
    px = np.stack([
        np.stack([a, zero, b], axis=-1),
        np.stack([-a, zero, b], axis=-1),
        np.stack([zero, a, b], axis=-1),
        np.stack([zero, -a, b], axis=-1),
        np.stack([s, s, -b], axis=-1),
        np.stack([s, -s, -b], axis=-1),
        np.stack([-s, s, -b], axis=-1),
        np.stack([-s, -s, -b], axis=-1),
    ], axis=-2)
    return _min_filtered_distance(px, py, pair_filter)


def optimize_lemma1(budget: OptBudget = OptBudget()) -> OptimizationReport:
    """Deterministic multi-start maximization of the problem-1 objective.

    Seeds a grid over (phi, psi) — phi parameterizing (a, b) on the unit
    circle inside its inequality window, psi the feasible circle of
    (x, y, z) — then refines the top seeds with Nelder-Mead.
    """
    lo, hi = PHI_MIN, PHI_MAX
    if budget.phi_range is not None:
        lo = max(lo, float(budget.phi_range[0]))
        hi = min(hi, float(budget.phi_range[1]))
        if lo > hi:
            raise InfeasibleParams(
                f"phi range [{budget.phi_range[0]:g}, {budget.phi_range[1]:g}] "
                "misses the feasible interval; zero starts")
    phis = np.linspace(lo, hi, budget.grid_phi)
    psis = np.linspace(0.0, 2.0 * np.pi, budget.grid_psi, endpoint=False)
    P, S = np.meshgrid(phis, psis, indexing="ij")
    vals = _lemma1_value_from_angles(P, S, budget.pair_filter)

    flat = vals.ravel()
    top = np.argsort(-flat, kind="stable")[:budget.refine_top]
    best_val = float(flat[top[0]])
    best_angles = (float(P.ravel()[top[0]]), float(S.ravel()[top[0]]))

    def neg(v):
        phi = min(max(v[0], lo), hi)
        return -float(_lemma1_value_from_angles(phi, v[1], budget.pair_filter))

    converged = 0
    for idx in top:
        x0 = np.array([P.ravel()[idx], S.ravel()[idx]])
        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"maxiter": budget.nm_maxiter,
                                "xatol": 1e-10, "fatol": 1e-12})
        if res.success:
            converged += 1
        val = -float(res.fun)
        if val > best_val + 1e-15:
            best_val = val
            best_angles = (min(max(float(res.x[0]), lo), hi), float(res.x[1]))
    if converged == 0:
        raise BudgetExhausted("no Nelder-Mead start converged")
    argmax = Lemma1Params.from_angles(*best_angles)
    return OptimizationReport(
        best_value=best_val,
        argmax=argmax,
        starts=int(len(top)),
        converged_starts=converged,
        constraint_residual=argmax.feasibility_residual(),
    )


def lemma2_objective(p: Lemma2Params, feas_tol: float = FEAS_TOL) -> float:
    """The problem-2 objective |z u1| + |z u2| - 1 - sqrt(a^2 + b^2)."""
    if p.feasibility_residual() > feas_tol:
        raise InfeasibleParams(
            f"constraint residual {p.feasibility_residual():.3e} > {feas_tol:g}")
    return float(_lemma2_value(p.a, p.b, p.x, p.y))


def _lemma2_value(a, b, x, y) -> np.ndarray:
    a, b, x, y = map(np.asarray, (a, b, x, y))
    h = 1.0 - 2.0 * b  # z-offset from z=(a,0,b) to the base plane z = 1-b
    d1 = np.sqrt((a - x) ** 2 + y ** 2 + h ** 2)
    d2 = np.sqrt((a - y) ** 2 + x ** 2 + h ** 2)
    return d1 + d2 - 1.0 - np.sqrt(a * a + b * b)


def _lemma2_clamp(v: np.ndarray, eps: float) -> Tuple[float, float, float]:
    """Project raw optimizer coordinates (a, b, u) onto the eps-shrunk
    feasible region (u parameterizes x = a cos u, y = a sin u)."""
    b = min(max(float(v[1]), LEMMA2_B_MIN + eps), 0.5 - eps)
    a_lo = float(np.sqrt(max(1.0 - b * b, b * b))) + eps
    a_hi = float(np.sqrt(3.0 * (_SQRT2 + 1.0)) * b)
    if a_lo > a_hi:
        a_lo = a_hi
    a = min(max(float(v[0]), a_lo), a_hi)
    u = min(max(float(v[2]), 0.0), np.pi / 2.0)
    return a, b, u


def optimize_lemma2(budget: OptBudget = OptBudget()) -> OptimizationReport:
    """Deterministic multi-start maximization of the problem-2 objective.

    Grid over (b, a, u) with x = a cos u, y = a sin u; the strict
    inequalities (a^2 + b^2 > 1, 0 < b < 1/2) are shrunk by ``eps`` so the
    seeds stay interior; Nelder-Mead refinement clamps onto the shrunk
    region.  The supremum sits on the boundary corner (a^2 + b^2 -> 1,
    b at its lower limit, u = 0), which the report's argmax makes visible.
    """
    eps = budget.eps
    n = budget.grid_lemma2
    bs = np.linspace(LEMMA2_B_MIN + eps, 0.5 - eps, n)
    fracs = np.linspace(0.0, 1.0, n)
    us = np.linspace(0.0, np.pi / 2.0, n)

    a_lo = np.sqrt(np.maximum(1.0 - bs ** 2, bs ** 2)) + eps
    a_hi = np.sqrt(3.0 * (_SQRT2 + 1.0)) * bs
    a_hi = np.maximum(a_hi, a_lo)
    A = a_lo[:, None] + (a_hi - a_lo)[:, None] * fracs[None, :]  # (nb, na)

    Bg = np.broadcast_to(bs[:, None, None], (n, n, n))
    Ag = np.broadcast_to(A[:, :, None], (n, n, n))
    Ug = np.broadcast_to(us[None, None, :], (n, n, n))
    X = Ag * np.cos(Ug)
    Y = Ag * np.sin(Ug)
    vals = _lemma2_value(Ag, Bg, X, Y)

    flat = vals.ravel()
    top = np.argsort(-flat, kind="stable")[:budget.refine_top]
    best_val = float(flat[top[0]])
    best_abu = (float(Ag.ravel()[top[0]]), float(Bg.ravel()[top[0]]),
                float(Ug.ravel()[top[0]]))

    def neg(v):
        a, b, u = _lemma2_clamp(v, eps)
        return -float(_lemma2_value(a, b, a * np.cos(u), a * np.sin(u)))

    converged = 0
    for idx in top:
        x0 = np.array([Ag.ravel()[idx], Bg.ravel()[idx], Ug.ravel()[idx]])
        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"maxiter": budget.nm_maxiter,
                                "xatol": 1e-10, "fatol": 1e-12})
        if res.success:
            converged += 1
        val = -float(res.fun)
        if val > best_val + 1e-15:
            best_val = val
            best_abu = _lemma2_clamp(res.x, eps)
    if converged == 0:
        raise BudgetExhausted("no Nelder-Mead start converged")
    a, b, u = best_abu
    argmax = Lemma2Params(a, b, float(a * np.cos(u)), float(a * np.sin(u)))
    return OptimizationReport(
        best_value=best_val,
        argmax=argmax,
        starts=int(len(top)),
        converged_starts=converged,
        constraint_residual=argmax.feasibility_residual(),
    )
