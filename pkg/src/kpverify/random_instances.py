"""Random test instances: configurations, expansion pairs, truncated-ball instances."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .dynamics import ArchimedesInstance
from .geometry import DEFAULT_TOL, BallConfiguration, Tolerances, distance_matrix, is_expansion


def random_configuration(
    rng: np.random.Generator,
    n: int,
    d: int,
    box: float = 1.0,
    r_range: tuple[float, float] = (0.2, 0.6),
) -> BallConfiguration:
    centers = rng.uniform(0.0, box, size=(n, d))
    radii = rng.uniform(*r_range, size=n)
    return BallConfiguration(centers, radii)


def pair_margin(config: BallConfiguration) -> float:
    """Smallest gap between a center distance and the degenerate values 0, r_i + r_j, |r_i - r_j|."""
    if config.n < 2:
        return np.inf
    dm = distance_matrix(config)
    r = config.radii
    iu = np.triu_indices(config.n, 1)
    dist = dm[iu]
    rs = (r[:, None] + r[None, :])[iu]
    rd = np.abs(r[:, None] - r[None, :])[iu]
    return float(np.min(np.concatenate([dist, np.abs(dist - rs), np.abs(dist - rd)])))


def scaling_pair(p: BallConfiguration, factor: float) -> tuple[BallConfiguration, BallConfiguration]:
    """(p, factor * p) with unchanged radii; an expansion whenever factor >= 1."""
    return p, BallConfiguration(p.centers * factor, p.radii)


def expansion_pairs(
    rng: np.random.Generator,
    n: int,
    d: int,
    trials: int,
    box: float = 1.0,
    spread: float = 2.0,
    r_range: tuple[float, float] = (0.2, 0.6),
    tol: Tolerances = DEFAULT_TOL,
) -> Iterator[tuple[BallConfiguration, BallConfiguration]]:
    """Rejection sampling: p uniform in [0, box]^d, q uniform in [0, spread*box]^d.

    ``trials`` counts attempted pairs; only expansions are yielded.  Acceptance
    falls quickly with n since all n(n-1)/2 distances must grow.
    """
    for _ in range(trials):
        p = random_configuration(rng, n, d, box, r_range)
        q = BallConfiguration(rng.uniform(0.0, spread * box, size=(n, d)), p.radii)
        if is_expansion(p, q, tol):
            yield p, q


def random_archimedes_instance(
    rng: np.random.Generator,
    n: int,
    k: int,
    m: int,
    r0_range: tuple[float, float] = (0.6, 1.4),
    offset_range: tuple[float, float] = (-0.4, 0.8),
) -> ArchimedesInstance:
    """Randomly rotated S through a random center, with m halfspaces whose normals lie in S.

    Offsets are drawn relative to the center as fractions of r0, keeping
    boundaries away from the sphere.
    """
    D = n + 2 * k
    Q, _ = np.linalg.qr(rng.standard_normal((D, D)))
    basis = Q[:n]
    center = rng.uniform(-1.0, 1.0, size=D)
    r0 = float(rng.uniform(*r0_range))
    coeff = rng.standard_normal((m, n))
    coeff /= np.linalg.norm(coeff, axis=1, keepdims=True)
    normals = coeff @ basis
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = normals @ center + r0 * rng.uniform(*offset_range, size=m)
    return ArchimedesInstance(n, k, r0, center, basis, normals, offsets)


def no_halfspace_instance(n: int, k: int, r0: float = 1.0) -> ArchimedesInstance:
    D = n + 2 * k
    basis = np.eye(D)[:n]
    return ArchimedesInstance(n, k, r0, np.zeros(D), basis, np.zeros((0, D)), np.zeros(0))
