"""Monotone motions, the union-volume derivative formula and its numerical checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .geometry import (
    DEFAULT_TOL,
    BallConfiguration,
    GeometryError,
    Mode,
    RadiusFamily,
    Tolerances,
    distance_matrix,
    interaction_table,
    is_expansion,
)
from .measure import ball_halfspace_measure, union_length_1d, union_measure_exact, wall_measure_exact
from .montecarlo import (
    MCEstimate,
    ball_halfspace_sampler,
    combine_independent,
    derive_seed,
    estimate,
    union_combination_mc,
    wall_sampler,
    wall_volume_mc,
)
from .power import Wall, wall

MeasureMode = Literal["exact", "mc"]
COINCIDENCE_THRESHOLD = 1e-9


class NotAnExpansionError(GeometryError):
    pass


class DomainEdgeWarning(UserWarning):
    """A finite-difference stencil touches the edge of the wall's s-domain."""


@dataclass(frozen=True)
class CheckResult:
    name: str
    lhs: float
    rhs: float
    error_bound: float
    passed: bool

    @property
    def diff(self) -> float:
        return abs(self.lhs - self.rhs)


@dataclass(frozen=True, eq=False)
class Motion:
    """t -> p(t) on [0, 1].

    ``lifted``: p_i(t) = (cos(pi t/2) p_i, sin(pi t/2) q_i) in E^{2d}, so that
    |p_i(t) - p_j(t)|^2 = cos^2 |p_i - p_j|^2 + sin^2 |q_i - q_j|^2.
    ``linear``: p_i(t) = (1 - t) p_i + t q_i in E^d.
    Radii are those of ``p``.
    """

    kind: Literal["lifted", "linear"]
    p: BallConfiguration
    q: BallConfiguration

    @property
    def dimension(self) -> int:
        return 2 * self.p.dimension if self.kind == "lifted" else self.p.dimension

    @property
    def n(self) -> int:
        return self.p.n

    @property
    def radii(self) -> np.ndarray:
        return self.p.radii

    def positions(self, t: float) -> np.ndarray:
        if self.kind == "lifted":
            a = 0.5 * math.pi * t
            return np.hstack([math.cos(a) * self.p.centers, math.sin(a) * self.q.centers])
        return (1.0 - t) * self.p.centers + t * self.q.centers

    def position(self, t: float, i: int) -> np.ndarray:
        return self.positions(t)[i]

    def config_at(self, t: float) -> BallConfiguration:
        return BallConfiguration(self.positions(t), self.p.radii)

    def family_at(self, t: float, s: float = 0.0) -> RadiusFamily:
        return RadiusFamily(self.config_at(t), s)

    def distances(self, t: float) -> np.ndarray:
        return distance_matrix(self.config_at(t))

    def distance_derivatives(self, t: float) -> np.ndarray:
        """Closed-form d/dt |p_i(t) - p_j(t)| (zero diagonal; zero where points coincide)."""
        dist = self.distances(t)
        if self.kind == "lifted":
            a = 0.5 * math.pi * t
            P2 = distance_matrix(self.p) ** 2
            Q2 = distance_matrix(self.q) ** 2
            num = math.pi * math.cos(a) * math.sin(a) * (Q2 - P2)
            denom = 2.0 * dist
        else:
            x = self.positions(t)
            v = self.q.centers - self.p.centers
            dx = x[:, None, :] - x[None, :, :]
            dv = v[:, None, :] - v[None, :, :]
            num = np.einsum("ijk,ijk->ij", dx, dv)
            denom = dist
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
        np.fill_diagonal(out, 0.0)
        return out

    def distance_derivative(self, t: float, i: int, j: int) -> float:
        return float(self.distance_derivatives(t)[i, j])


def _check_pair(p: BallConfiguration, q: BallConfiguration) -> None:
    if p.n != q.n or p.dimension != q.dimension:
        raise GeometryError("p and q must have the same number of balls and dimension")
    if not np.array_equal(p.radii, q.radii):
        raise GeometryError("p and q must carry the same radii")


def lifted_monotone_motion(p: BallConfiguration, q: BallConfiguration, tol: Tolerances = DEFAULT_TOL) -> Motion:
    _check_pair(p, q)
    if not is_expansion(p, q, tol):
        raise NotAnExpansionError("q is not an expansion of p")
    return Motion("lifted", p, q)


def linear_motion(p: BallConfiguration, q: BallConfiguration) -> Motion:
    _check_pair(p, q)
    return Motion("linear", p, q)


def _require_separated(config: BallConfiguration, t: float) -> None:
    if config.min_center_separation() < COINCIDENCE_THRESHOLD:
        raise GeometryError(f"points coincide at t={t!r}; the derivative formula needs distinct points")


def csikos_derivative(
    motion: Motion,
    t: float,
    s: float = 0.0,
    wall_measure: MeasureMode = "exact",
    samples: int = 10**6,
    seed: int = 0,
    workers: int = 1,
) -> float | MCEstimate:
    """sum_{i<j} d_ij'(t) * Vol_{D-1}(W_ij(p(t), s))."""
    D = motion.dimension
    if D < 2:
        raise GeometryError("the derivative formula needs ambient dimension >= 2")
    fam = motion.family_at(t, s)
    _require_separated(fam.config, t)
    dd = motion.distance_derivatives(t)
    pairs = [(i, j) for i in range(motion.n) for j in range(i + 1, motion.n)]
    if wall_measure == "exact":
        if D != 2:
            raise GeometryError("exact wall measures need ambient dimension 2")
        return math.fsum(dd[i, j] * wall_measure_exact(wall(fam, i, j), s) for i, j in pairs)
    ests = [wall_volume_mc(wall(fam, i, j), s, samples, derive_seed(seed, i, j), workers) for i, j in pairs]
    out = combine_independent(ests, [dd[i, j] for i, j in pairs])
    return MCEstimate(out.value, out.std_error, samples, seed)


def _check_t_stencil(t: float, h: float) -> None:
    if h <= 0 or t - h < 0.0 or t + h > 1.0:
        raise ValueError(f"stencil t ± h = {t!r} ± {h!r} leaves [0, 1]")


def total_volume_derivative_fd(
    motion: Motion,
    t: float,
    s: float = 0.0,
    h: float = 1e-5,
    measure_mode: MeasureMode = "exact",
    samples: int = 10**6,
    seed: int = 0,
    workers: int = 1,
) -> float | MCEstimate:
    """Central difference in t of the union measure along the motion."""
    _check_t_stencil(t, h)
    plus, minus = motion.family_at(t + h, s), motion.family_at(t - h, s)
    if measure_mode == "exact":
        return (union_measure_exact(plus) - union_measure_exact(minus)) / (2.0 * h)
    return union_combination_mc([plus, minus], [0.5 / h, -0.5 / h], samples, seed, workers)


_STENCILS = {
    0: ([0.0], [1.0]),
    1: ([1.0, -1.0], [0.5, -0.5]),
    2: ([1.0, 0.0, -1.0], [1.0, -2.0, 1.0]),
}


def fd_stencil(order: int, h: float) -> tuple[list[float], list[float]]:
    """Offsets and weights of the central difference of the given order."""
    if order not in _STENCILS:
        raise ValueError("supported derivative orders are 0, 1, 2")
    offs, wts = _STENCILS[order]
    return [o * h for o in offs], [w / h**order for w in wts]


def wall_s_derivative_fd(
    w: Wall,
    s: float,
    order: int = 1,
    h: float = 1e-5,
    mode: MeasureMode = "exact",
    samples: int = 10**6,
    seed: int = 0,
    workers: int = 1,
) -> float | MCEstimate:
    """order-th central difference in s of the wall measure (order in {0, 1, 2})."""
    offs, wts = fd_stencil(order, h)
    lo = s + min(offs)
    if w.base_radius_i_squared + lo < 0:
        raise ValueError(f"stencil reaches s={lo!r}, outside the ball domain r_i^2 + s >= 0")
    top = w.radius_squared(s + max(offs))
    bottom = w.radius_squared(lo)
    if order > 0 and top > 0 and bottom <= 10 * order * h:
        warnings.warn(
            f"wall {w.pair} is near its emptiness edge (r_ij^2 + s = {w.radius_squared(s):.3g})",
            DomainEdgeWarning,
            stacklevel=2,
        )
    s_values = [s + o for o in offs]
    if mode == "exact":
        return math.fsum(wt * wall_measure_exact(w, sv) for sv, wt in zip(s_values, wts))
    return estimate(wall_sampler(w, s_values, wts), samples, seed, workers)


@dataclass(frozen=True, eq=False)
class ArchimedesInstance:
    """Ball B(center, sqrt(r0^2 + s)) in E^{n+2k} cut by halfspaces whose normals lie in S.

    S = center + span(rows of ``basis``) is n-dimensional, so every boundary
    hyperplane is orthogonal to S and S passes through the center.
    """

    n: int
    k: int
    r0: float
    center: np.ndarray
    basis: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self) -> None:
        D = self.n + 2 * self.k
        if self.n < 1 or self.k < 1:
            raise GeometryError("need n >= 1 and k >= 1")
        if self.r0 <= 0:
            raise GeometryError("r0 must be positive")
        center = np.asarray(self.center, dtype=float).reshape(-1)
        basis = np.asarray(self.basis, dtype=float).reshape(self.n, -1)
        normals = np.asarray(self.normals, dtype=float).reshape(-1, D)
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        if center.shape[0] != D or basis.shape[1] != D:
            raise GeometryError(f"center and basis must live in E^{D}")
        if not np.allclose(basis @ basis.T, np.eye(self.n), atol=1e-12):
            raise GeometryError("basis rows must be orthonormal")
        if normals.shape[0] != offsets.shape[0]:
            raise GeometryError("one offset per normal")
        if normals.shape[0]:
            if not np.allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-12):
                raise GeometryError("halfspace normals must be unit vectors")
            resid = normals - (normals @ basis.T) @ basis
            if np.abs(resid).max() > 1e-9:
                raise GeometryError("halfspace boundaries must be orthogonal to S (normals in S)")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)

    @property
    def ambient_dimension(self) -> int:
        return self.n + 2 * self.k

    def section(self) -> tuple[np.ndarray, np.ndarray]:
        """In-S halfspaces (normals, offsets) in coordinates centered on ``center``."""
        return self.normals @ self.basis.T, self.offsets - self.normals @ self.center

    def volume_sampler(self, s_values: Sequence[float], weights: Sequence[float]):
        radii = [math.sqrt(self.r0**2 + sv) for sv in s_values]
        return ball_halfspace_sampler(self.center, self.normals, self.offsets, radii, weights)


def section_measure(inst: ArchimedesInstance, s: float, samples: int = 10**6, seed: int = 0, workers: int = 1):
    """Vol_n(S ∩ P(s)); exact for n <= 2, an MCEstimate otherwise."""
    A, b = inst.section()
    r = math.sqrt(inst.r0**2 + s)
    if inst.n <= 2:
        return ball_halfspace_measure(inst.n, r, A, b)
    return estimate(ball_halfspace_sampler(np.zeros(inst.n), A, b, [r], [1.0]), samples, seed, workers)


def archimedes_check(
    inst: ArchimedesInstance,
    s: float = 0.0,
    h: float = 1e-2,
    samples: int = 10**6,
    seed: int = 0,
    workers: int = 1,
    atol: float = 1e-6,
) -> CheckResult:
    """Compare the k-th s-derivative of Vol_{n+2k}(P(s)) with pi^k Vol_n(S ∩ P(s)).

    lhs is a central difference of Monte Carlo volumes drawn with common
    random numbers.  Passes when |lhs - rhs| <= 3 * combined std error + atol;
    ``atol`` absorbs finite-difference truncation when the sampling error is 0.
    """
    if inst.k not in (1, 2):
        raise GeometryError("only k in {1, 2} is supported")
    offs, wts = fd_stencil(inst.k, h)
    if inst.r0**2 + s + min(offs) < 0:
        raise GeometryError("stencil leaves the domain r0^2 + s >= 0")
    lhs = estimate(inst.volume_sampler([s + o for o in offs], wts), samples, seed, workers)
    sec = section_measure(inst, s, samples, derive_seed(seed, 1), workers)
    scale = math.pi**inst.k
    if isinstance(sec, MCEstimate):
        rhs, rhs_err = scale * sec.value, scale * sec.std_error
    else:
        rhs, rhs_err = scale * sec, 0.0
    err = math.hypot(lhs.std_error, rhs_err)
    passed = abs(lhs.value - rhs) <= 3.0 * err + atol
    return CheckResult(f"archimedes n={inst.n} k={inst.k}", lhs.value, rhs, err, passed)


def proof_chain_check(
    p: BallConfiguration,
    q: BallConfiguration,
    s: float = 0.0,
    k: int = 1,
    h: float = 1e-2,
    samples: int = 10**7,
    seed: int = 0,
    workers: int = 1,
) -> CheckResult:
    """pi^k (V_d(q, s) - V_d(p, s)) against d^k/ds^k (V_{d+2k}(q, s) - V_{d+2k}(p, s)).

    Only d = 1, k = 1: the left side from exact interval unions, the right
    side from a central difference of E^3 Monte Carlo volumes sharing one
    random stream across all four evaluations.
    """
    _check_pair(p, q)
    if p.dimension != 1 or k != 1:
        raise GeometryError("proof-chain check supports d = 1, k = 1 only")
    if np.any(p.radii**2 + s - h < 0):
        raise GeometryError("stencil leaves the radius domain")
    lhs = math.pi * (union_length_1d(RadiusFamily(q, s)) - union_length_1d(RadiusFamily(p, s)))
    D = p.dimension + 2 * k
    P, Q = p.embedded(D), q.embedded(D)
    fams = [RadiusFamily(Q, s + h), RadiusFamily(P, s + h), RadiusFamily(Q, s - h), RadiusFamily(P, s - h)]
    c = 0.5 / h
    rhs = union_combination_mc(fams, [c, -c, -c, c], samples, seed, workers)
    passed = abs(lhs - rhs.value) <= 3.0 * rhs.std_error
    return CheckResult("proof chain d=1 k=1", lhs, rhs.value, rhs.std_error, passed)


@dataclass(frozen=True)
class TraceRow:
    t: float
    max_pair_count: int
    total_triples: int


def triple_count_trace(
    motion: Motion,
    t_grid: Sequence[float],
    s: float = 0.0,
    mode: Mode = "closed",
    tol: Tolerances = DEFAULT_TOL,
) -> list[TraceRow]:
    """Per-t lens/ball interaction counts in the motion's ambient space.

    ``total_triples`` counts unordered triples with a common point (each is
    seen once from each of its three pairs).
    """
    ts = list(t_grid)
    if any(b < a for a, b in zip(ts, ts[1:])) or (ts and (ts[0] < 0 or ts[-1] > 1)):
        raise ValueError("t_grid must be sorted inside [0, 1]")
    rows = []
    for t in ts:
        cfg = motion.family_at(t, s).as_configuration()
        table = interaction_table(cfg, mode, tol)
        total = sum(table.values())
        rows.append(TraceRow(float(t), max(table.values(), default=0), total // 3))
    return rows


def kp_defect(
    p: BallConfiguration,
    q: BallConfiguration,
    s: float = 0.0,
    measure_mode: MeasureMode = "exact",
    samples: int = 10**6,
    seed: int = 0,
    workers: int = 1,
) -> float | MCEstimate:
    """V_d(q, s) - V_d(p, s)."""
    _check_pair(p, q)
    fp, fq = RadiusFamily(p, s), RadiusFamily(q, s)
    if measure_mode == "exact":
        return union_measure_exact(fq) - union_measure_exact(fp)
    return union_combination_mc([fq, fp], [1.0, -1.0], samples, seed, workers)
