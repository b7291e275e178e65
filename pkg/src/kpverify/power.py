"""Power (Laguerre) cells, radical hyperplanes, truncated cells and walls."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    GeometryError,
    RadiusFamily,
    Tolerances,
    _check_index,
    orthonormal_complement,
)


@dataclass(frozen=True, eq=False)
class Halfspace:
    """{x : normal . x <= offset}; ``source`` is the ball index that produced it."""

    normal: np.ndarray
    offset: float
    source: int | None = None

    def contains(self, x, tol: Tolerances = DEFAULT_TOL) -> bool:
        return bool(np.dot(self.normal, x) <= self.offset + tol.geometric_eps * (1.0 + abs(self.offset)))


@dataclass(frozen=True, eq=False)
class Hyperplane:
    normal: np.ndarray
    offset: float
    frame: np.ndarray  # (d-1, d), rows orthonormal and orthogonal to normal

    def signed_distance(self, x) -> float:
        return float(np.dot(self.normal, x) - self.offset)

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x - self.signed_distance(x) * self.normal


def _stack(halfspaces: list[Halfspace], dim: int) -> tuple[np.ndarray, np.ndarray]:
    if not halfspaces:
        return np.zeros((0, dim)), np.zeros(0)
    return np.array([h.normal for h in halfspaces]), np.array([h.offset for h in halfspaces])


def _satisfies(A: np.ndarray, b: np.ndarray, X: np.ndarray, eps: float) -> np.ndarray:
    """Row mask of X (n, d) satisfying A x <= b within eps."""
    X = np.atleast_2d(X)
    if A.shape[0] == 0:
        return np.ones(X.shape[0], dtype=bool)
    return np.all(X @ A.T <= b + eps * (1.0 + np.abs(b)), axis=1)


@dataclass(frozen=True, eq=False)
class PowerCell:
    index: int
    halfspaces: list[Halfspace]
    dimension: int

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return _stack(self.halfspaces, self.dimension)

    def contains_many(self, X, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        A, b = self.arrays()
        return _satisfies(A, b, X, tol.geometric_eps)


@dataclass(frozen=True, eq=False)
class TruncatedCell:
    cell: PowerCell
    center: np.ndarray
    base_radius: float
    s: float = 0.0

    def __post_init__(self) -> None:
        if self.base_radius**2 + self.s < 0:
            raise GeometryError("r_i^2 + s must be nonnegative")

    @property
    def radius(self) -> float:
        return float(np.sqrt(self.base_radius**2 + self.s))

    def contains_many(self, X, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        X = np.atleast_2d(X)
        r = self.radius
        in_ball = np.linalg.norm(X - self.center, axis=1) <= r + tol.geometric_eps * (1.0 + r)
        return in_ball & self.cell.contains_many(X, tol)


@dataclass(frozen=True, eq=False)
class Wall:
    """The truncated polytope W_ij inside the radical hyperplane L_ij.

    In-plane coordinates are u = frame @ (x - foot).  ``blocked`` marks a
    constraint parallel to L_ij that excludes the whole plane.
    """

    pair: tuple[int, int]
    plane: Hyperplane
    foot: np.ndarray
    h: float
    in_plane_halfspaces: list[Halfspace]
    radius_squared_base: float
    blocked: bool = False

    @property
    def ambient_dimension(self) -> int:
        return self.foot.shape[0]

    @property
    def base_radius_i_squared(self) -> float:
        """r_i^2 of the first ball of the pair (Pythagoras on the radical sphere)."""
        return self.radius_squared_base + self.h**2

    def radius_squared(self, s: float) -> float:
        return self.radius_squared_base + s

    def radius(self, s: float) -> float:
        """In-plane disk radius r_ij(s); 0 for an empty wall."""
        return float(np.sqrt(max(self.radius_squared(s), 0.0)))

    def is_empty(self, s: float) -> bool:
        return self.blocked or self.radius_squared(s) < 0

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return _stack(self.in_plane_halfspaces, self.ambient_dimension - 1)

    def to_plane(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return (X - self.foot) @ self.plane.frame.T

    def to_ambient(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        return self.foot + U @ self.plane.frame

    def contains_in_plane(self, U, s: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if self.is_empty(s):
            return np.zeros(U.shape[0], dtype=bool)
        r = self.radius(s)
        in_disk = np.linalg.norm(U, axis=1) <= r + tol.geometric_eps * (1.0 + r)
        A, b = self.arrays()
        return in_disk & _satisfies(A, b, U, tol.geometric_eps)

    def contains(self, X, s: float, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        """Ambient-point membership: on L_ij (within tolerance) and inside the in-plane polytope."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        on_plane = np.abs(X @ self.plane.normal - self.plane.offset) <= tol.geometric_eps * (
            1.0 + abs(self.plane.offset)
        )
        return on_plane & self.contains_in_plane(self.to_plane(X), s, tol)


def radical_hyperplane(fam: RadiusFamily, i: int, j: int) -> Hyperplane:
    """Locus of equal power with respect to balls i and j; the normal points from p_i to p_j.

    Built from the base radii, so the s-dependence cancels exactly.
    """
    _check_index(fam, i)
    _check_index(fam, j)
    pi, pj = fam.centers[i], fam.centers[j]
    dvec = pj - pi
    dist = float(np.linalg.norm(dvec))
    if dist == 0.0:
        raise GeometryError(f"balls {i} and {j} have coincident centers")
    normal = dvec / dist
    ri2, rj2 = fam.config.radii[i] ** 2, fam.config.radii[j] ** 2
    a = (dist * dist + ri2 - rj2) / (2.0 * dist)
    offset = float(normal @ pi + a)
    return Hyperplane(normal, offset, orthonormal_complement(normal))


def _bisector(fam: RadiusFamily, i: int, j: int) -> Halfspace:
    pi, pj = fam.centers[i], fam.centers[j]
    dvec = pj - pi
    dist = float(np.linalg.norm(dvec))
    if dist == 0.0:
        raise GeometryError(f"balls {i} and {j} have coincident centers")
    normal = dvec / dist
    ri2, rj2 = fam.config.radii[i] ** 2, fam.config.radii[j] ** 2
    return Halfspace(normal, float(normal @ pi + (dist * dist + ri2 - rj2) / (2.0 * dist)), j)


def power_cell(fam: RadiusFamily, i: int) -> PowerCell:
    """All N-1 bisector constraints power(x, i) <= power(x, j); no pruning."""
    _check_index(fam, i)
    return PowerCell(i, [_bisector(fam, i, j) for j in range(fam.n) if j != i], fam.dimension)


def power_cells(fam: RadiusFamily) -> list[PowerCell]:
    fam.config.require_distinct_centers()
    return [power_cell(fam, i) for i in range(fam.n)]


def cell_contains(cell: PowerCell, x, tol: Tolerances = DEFAULT_TOL) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != cell.dimension:
        raise GeometryError(f"point has {x.shape[0]} coordinates, expected {cell.dimension}")
    return bool(cell.contains_many(x[None, :], tol)[0])


def truncated_cell(fam: RadiusFamily, i: int) -> TruncatedCell:
    return TruncatedCell(power_cell(fam, i), fam.centers[i], float(fam.config.radii[i]), fam.s)


def wall(fam: RadiusFamily, i: int, j: int) -> Wall:
    if i == j:
        raise GeometryError("a wall needs two distinct balls")
    plane = radical_hyperplane(fam, i, j)
    pi = fam.centers[i]
    h = float(plane.offset - plane.normal @ pi)
    foot = pi + h * plane.normal
    base = float(fam.config.radii[i] ** 2 - h * h)

    in_plane: list[Halfspace] = []
    blocked = False
    for k in range(fam.n):
        if k == i or k == j:
            continue
        hs = _bisector(fam, i, k)
        g = plane.frame @ hs.normal
        rhs = hs.offset - hs.normal @ foot
        gn = float(np.linalg.norm(g))
        if gn > 1e-12:
            in_plane.append(Halfspace(g / gn, float(rhs / gn), k))
        elif rhs < -DEFAULT_TOL.geometric_eps * (1.0 + abs(hs.offset)):
            blocked = True
    return Wall((i, j), plane, foot, h, in_plane, base, blocked)
