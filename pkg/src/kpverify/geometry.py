"""Ball configurations, metric predicates and the bounded-intersection condition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

Mode = Literal["closed", "interior"]


class GeometryError(ValueError):
    """Raised when an input violates a geometric precondition."""


class LensEmptyError(GeometryError):
    pass


@dataclass(frozen=True)
class Tolerances:
    geometric_eps: float = 1e-9
    strict_margin: float = 1e-7

    def __post_init__(self) -> None:
        for name in ("geometric_eps", "strict_margin"):
            v = getattr(self, name)
            if not (0.0 < v < 1e-3):
                raise ValueError(f"{name} must lie in (0, 1e-3), got {v!r}")


DEFAULT_TOL = Tolerances()


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BallConfiguration:
    """N closed balls in E^d, stored as an (N, d) center array and N radii."""

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.centers, dtype=float)
        r = np.array(self.radii, dtype=float).reshape(-1)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise GeometryError(f"centers must be an (N, d) array with N, d >= 1, got shape {c.shape}")
        if r.shape[0] != c.shape[0]:
            raise GeometryError(f"{c.shape[0]} centers but {r.shape[0]} radii")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(r)):
            raise GeometryError("coordinates and radii must be finite")
        if np.any(r < 0):
            raise GeometryError("radii must be nonnegative")
        object.__setattr__(self, "centers", _readonly(c))
        object.__setattr__(self, "radii", _readonly(r))

    @classmethod
    def from_lists(cls, centers: Sequence[Sequence[float]], radii: Sequence[float]) -> "BallConfiguration":
        return cls(np.asarray(centers, dtype=float), np.asarray(radii, dtype=float))

    @property
    def dimension(self) -> int:
        return self.centers.shape[1]

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    def __len__(self) -> int:
        return self.n

    def with_centers(self, centers: np.ndarray) -> "BallConfiguration":
        return BallConfiguration(centers, self.radii)

    def scaled(self, factor: float) -> "BallConfiguration":
        return BallConfiguration(self.centers * factor, self.radii * factor)

    def embedded(self, dimension: int) -> "BallConfiguration":
        """Zero-pad the centers into E^dimension (E^d = E^d x {0})."""
        d = self.dimension
        if dimension < d:
            raise GeometryError(f"cannot embed E^{d} into E^{dimension}")
        c = np.zeros((self.n, dimension))
        c[:, :d] = self.centers
        return BallConfiguration(c, self.radii)

    def min_center_separation(self) -> float:
        if self.n < 2:
            return np.inf
        dm = distance_matrix(self)
        return float(dm[np.triu_indices(self.n, 1)].min())

    def require_distinct_centers(self, threshold: float = 0.0) -> None:
        sep = self.min_center_separation()
        if sep <= threshold:
            raise GeometryError(f"coincident centers (min separation {sep:.3g}); radical hyperplanes are undefined")


@dataclass(frozen=True, eq=False)
class RadiusFamily:
    """Radii r_i(s) = sqrt(r_i^2 + s) over a fixed set of centers."""

    config: BallConfiguration
    s: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.s):
            raise GeometryError("s must be finite")
        if np.any(self.config.radii**2 + self.s < 0):
            raise GeometryError(f"s={self.s!r} makes r_i^2 + s negative for some ball")

    @property
    def radii_squared(self) -> np.ndarray:
        return np.maximum(self.config.radii**2 + self.s, 0.0)

    @property
    def radii(self) -> np.ndarray:
        return np.sqrt(self.radii_squared)

    @property
    def centers(self) -> np.ndarray:
        return self.config.centers

    @property
    def dimension(self) -> int:
        return self.config.dimension

    @property
    def n(self) -> int:
        return self.config.n

    def at(self, s: float) -> "RadiusFamily":
        return RadiusFamily(self.config, s)

    def as_configuration(self) -> BallConfiguration:
        """The configuration with radii r_i(s) frozen in."""
        return BallConfiguration(self.config.centers, self.radii)


def as_family(obj: BallConfiguration | RadiusFamily) -> RadiusFamily:
    return obj if isinstance(obj, RadiusFamily) else RadiusFamily(obj, 0.0)


def distance_matrix(config: BallConfiguration) -> np.ndarray:
    c = config.centers
    diff = c[:, None, :] - c[None, :, :]
    dm = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dm, 0.0)
    return dm


def is_expansion(p: BallConfiguration, q: BallConfiguration, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff every pairwise center distance of q is at least that of p (up to tolerance)."""
    if p.n != q.n:
        raise GeometryError(f"configurations have {p.n} and {q.n} balls")
    if p.dimension != q.dimension:
        raise GeometryError(f"configurations live in E^{p.dimension} and E^{q.dimension}")
    if p.n < 2:
        return True
    dp = distance_matrix(p)
    dq = distance_matrix(q)
    iu = np.triu_indices(p.n, 1)
    a, b = dp[iu], dq[iu]
    return bool(np.all(b >= a - tol.geometric_eps * (1.0 + a)))


def expansion_slack(p: BallConfiguration, q: BallConfiguration) -> float:
    """min over pairs of |q_i - q_j| - |p_i - p_j| (inf for N < 2)."""
    if p.n < 2:
        return np.inf
    iu = np.triu_indices(p.n, 1)
    return float((distance_matrix(q)[iu] - distance_matrix(p)[iu]).min())


def _check_index(config_or_fam, i: int) -> None:
    if not (0 <= i < config_or_fam.n):
        raise IndexError(f"ball index {i} out of range for N={config_or_fam.n}")


def power(x, i: int, fam: RadiusFamily) -> float:
    """Power of x with respect to ball i of the family: |x - p_i|^2 - r_i^2 - s."""
    _check_index(fam, i)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != fam.dimension:
        raise GeometryError(f"point has {x.shape[0]} coordinates, expected {fam.dimension}")
    diff = x - fam.centers[i]
    return float(diff @ diff - fam.config.radii[i] ** 2 - fam.s)


def orthonormal_complement(normal: np.ndarray) -> np.ndarray:
    """(d-1, d) orthonormal basis of normal's orthogonal complement.

    Gram-Schmidt seeded with coordinate axes in order of increasing alignment
    with the normal, so the frame is deterministic.
    """
    n = np.asarray(normal, dtype=float)
    d = n.shape[0]
    order = np.argsort(np.abs(n), kind="stable")
    basis: list[np.ndarray] = []
    for axis in order:
        if len(basis) == d - 1:
            break
        v = np.zeros(d)
        v[axis] = 1.0
        v -= (v @ n) * n
        for b in basis:
            v -= (v @ b) * b
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            continue
        v /= nv
        # second pass restores orthogonality lost to cancellation
        v -= (v @ n) * n
        for b in basis:
            v -= (v @ b) * b
        basis.append(v / np.linalg.norm(v))
    return np.array(basis).reshape(d - 1, d)


def lens_nonempty(config: BallConfiguration, i: int, j: int) -> bool:
    _check_index(config, i)
    _check_index(config, j)
    dist = np.linalg.norm(config.centers[i] - config.centers[j])
    return bool(dist <= config.radii[i] + config.radii[j])


def _project_ball(x: np.ndarray, c: np.ndarray, r: float) -> np.ndarray:
    v = x - c
    nv = np.linalg.norm(v)
    if nv <= r:
        return x.copy()
    return c + (r / nv) * v


def _in_ball(z: np.ndarray, c: np.ndarray, r: float, eps: float) -> bool:
    return bool(np.linalg.norm(z - c) <= r + eps * (1.0 + r))


def _dykstra(x: np.ndarray, ci, ri, cj, rj, iterations: int = 50) -> np.ndarray:
    z = x.copy()
    pi = np.zeros_like(x)
    qj = np.zeros_like(x)
    for _ in range(iterations):
        y = _project_ball(z + pi, ci, ri)
        pi = z + pi - y
        z = _project_ball(y + qj, cj, rj)
        qj = y + qj - z
    return z


def closest_point_in_lens(x, config: BallConfiguration, i: int, j: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Euclidean projection of x onto the lens B_i ∩ B_j.

    The minimiser is x itself, a radial projection onto one ball that happens
    to lie in the other, or a point on the radical sphere (both boundaries).
    Every case that yields a feasible point is evaluated and the nearest one
    kept; Dykstra alternation is the fallback when none does.  When x projects
    onto the axis of the radical sphere the first in-plane frame axis is used.
    """
    _check_index(config, i)
    _check_index(config, j)
    if i == j:
        raise GeometryError("lens needs two distinct balls")
    if not lens_nonempty(config, i, j):
        raise LensEmptyError(f"balls {i} and {j} are disjoint")
    eps = tol.geometric_eps
    x = np.asarray(x, dtype=float).reshape(-1)
    ci, cj = config.centers[i], config.centers[j]
    ri, rj = float(config.radii[i]), float(config.radii[j])

    if np.linalg.norm(x - ci) <= ri and np.linalg.norm(x - cj) <= rj:
        return x.copy()

    candidates = []
    zi = _project_ball(x, ci, ri)
    if _in_ball(zi, cj, rj, eps):
        candidates.append(zi)
    zj = _project_ball(x, cj, rj)
    if _in_ball(zj, ci, ri, eps):
        candidates.append(zj)

    dvec = cj - ci
    dist = np.linalg.norm(dvec)
    if dist > 0 and config.dimension >= 2:
        normal = dvec / dist
        a = (dist * dist + ri * ri - rj * rj) / (2.0 * dist)
        rho_sq = ri * ri - a * a
        if rho_sq >= -eps * (1.0 + ri * ri):
            rho = np.sqrt(max(rho_sq, 0.0))
            foot = ci + a * normal
            v = x - foot
            v -= (v @ normal) * normal
            nv = np.linalg.norm(v)
            if nv > eps * (1.0 + dist):
                u = v / nv
            else:
                u = orthonormal_complement(normal)[0]
            candidates.append(foot + rho * u)

    if not candidates:
        return _dykstra(x, ci, ri, cj, rj)
    dists = [np.linalg.norm(x - z) for z in candidates]
    return candidates[int(np.argmin(dists))]


def lens_ball_distance(config: BallConfiguration, i: int, j: int, k: int, tol: Tolerances = DEFAULT_TOL) -> float:
    """Distance from center k to the lens B_i ∩ B_j."""
    z = closest_point_in_lens(config.centers[k], config, i, j, tol)
    return float(np.linalg.norm(z - config.centers[k]))


def lens_meets_ball(
    config: BallConfiguration,
    i: int,
    j: int,
    k: int,
    mode: Mode = "closed",
    tol: Tolerances = DEFAULT_TOL,
) -> bool:
    if len({i, j, k}) != 3:
        raise GeometryError("i, j, k must be pairwise distinct")
    _check_index(config, k)
    gap = lens_ball_distance(config, i, j, k, tol)
    rk = float(config.radii[k])
    if mode == "closed":
        return gap <= rk + tol.geometric_eps * (1.0 + rk)
    if mode == "interior":
        return gap < rk - tol.strict_margin
    raise ValueError(f"unknown mode {mode!r}")


def _lens_has_points(config: BallConfiguration, i: int, j: int, mode: Mode, tol: Tolerances) -> bool:
    if mode == "closed":
        return lens_nonempty(config, i, j)
    dist = np.linalg.norm(config.centers[i] - config.centers[j])
    ri, rj = config.radii[i], config.radii[j]
    m = tol.strict_margin
    return bool(ri > m and rj > m and dist < ri + rj - m)


def pair_interaction_count(
    config: BallConfiguration, i: int, j: int, mode: Mode = "closed", tol: Tolerances = DEFAULT_TOL
) -> int:
    """Number of other balls that have common points with the lens B_i ∩ B_j."""
    if i == j:
        raise GeometryError("pair needs two distinct balls")
    if not _lens_has_points(config, i, j, mode, tol):
        return 0
    return sum(
        lens_meets_ball(config, i, j, k, mode, tol) for k in range(config.n) if k != i and k != j
    )


def interaction_table(
    config: BallConfiguration, mode: Mode = "closed", tol: Tolerances = DEFAULT_TOL
) -> dict[tuple[int, int], int]:
    return {
        (i, j): pair_interaction_count(config, i, j, mode, tol)
        for i in range(config.n)
        for j in range(i + 1, config.n)
    }


def theorem_condition_holds(
    config: BallConfiguration, mode: Mode = "closed", tol: Tolerances = DEFAULT_TOL
) -> tuple[bool, dict[tuple[int, int], int]]:
    """Check that every pair of balls has common points with at most d + 1 other balls."""
    table = interaction_table(config, mode, tol)
    worst = max(table.values(), default=0)
    return worst <= config.dimension + 1, table
