"""Seeded Monte Carlo measures with reproducible chunked reduction.

Samples are drawn in fixed-size chunks; chunk ``c`` gets its own Philox
stream keyed by ``(seed, c)``, and chunk statistics are merged in chunk
order.  The result is therefore bit-identical for any worker count.
Estimators that share a ``sampler`` call share their random numbers, which
is how finite differences get common random numbers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import GeometryError, RadiusFamily
from .measure import ball_volume
from .power import TruncatedCell, Wall

CHUNK = 1 << 16
MASK64 = (1 << 64) - 1

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    samples: int
    seed: int

    def within(self, target: float, sigmas: float = 3.0, extra: float = 0.0) -> bool:
        return abs(self.value - target) <= sigmas * self.std_error + extra

    def __str__(self) -> str:
        return f"{self.value:.10g} ± {self.std_error:.3g} (n={self.samples}, seed={self.seed})"


def combine_independent(estimates: Sequence[MCEstimate], weights: Sequence[float] | None = None) -> MCEstimate:
    """Linear combination of independent estimates; errors add in quadrature."""
    if weights is None:
        weights = [1.0] * len(estimates)
    value = math.fsum(w * e.value for w, e in zip(weights, estimates))
    err = math.sqrt(math.fsum((w * e.std_error) ** 2 for w, e in zip(weights, estimates)))
    samples = sum(e.samples for e in estimates)
    seed = estimates[0].seed if estimates else 0
    return MCEstimate(value, err, samples, seed)


def derive_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed & MASK64, spawn_key=tuple(key)).generate_state(1, np.uint64)[0])


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed & MASK64) | (chunk << 64)))


def _chunk_stats(sampler: Sampler, seed: int, chunk: int, n: int) -> tuple[int, np.ndarray, np.ndarray]:
    vals = np.asarray(sampler(chunk_rng(seed, chunk), n), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    mean = vals.mean(axis=0)
    m2 = ((vals - mean) ** 2).sum(axis=0)
    return n, mean, m2


def reduce_samples(sampler: Sampler, samples: int, seed: int, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-output (mean, standard error of the mean) of sampler values."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = [min(CHUNK, samples - c * CHUNK) for c in range(-(-samples // CHUNK))]

    def job(c: int):
        return _chunk_stats(sampler, seed, c, sizes[c])

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(job, range(len(sizes))))
    else:
        stats = [job(c) for c in range(len(sizes))]

    count, mean, m2 = stats[0]
    for nb, mb, m2b in stats[1:]:
        total = count + nb
        delta = mb - mean
        mean = mean + delta * (nb / total)
        m2 = m2 + m2b + delta * delta * (count * nb / total)
        count = total
    var = m2 / (count - 1) if count > 1 else np.zeros_like(m2)
    return mean, np.sqrt(var / count)


def estimate(sampler: Sampler, samples: int, seed: int, workers: int = 1) -> MCEstimate:
    mean, err = reduce_samples(sampler, samples, seed, workers)
    return MCEstimate(float(mean[0]), float(err[0]), samples, seed)


def unit_ball_samples(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Uniform points of the unit dim-ball: Gaussian direction times U^(1/dim)."""
    g = rng.standard_normal((n, dim))
    scale = rng.random(n) ** (1.0 / dim) / np.sqrt(np.einsum("ij,ij->i", g, g))
    return g * scale[:, None]


class _UnionData:
    """Per-configuration constants of the inclusion-count estimator."""

    def __init__(self, fam: RadiusFamily):
        centers = np.asarray(fam.centers, dtype=float)
        # volumes are translation invariant; centering keeps |x|^2 - 2 x.c well conditioned
        self.centers = centers - centers.mean(axis=0)
        self.radii = fam.radii
        dim = self.centers.shape[1]
        vols = np.array([ball_volume(dim, r) for r in self.radii])
        self.total = math.fsum(vols)
        self.cum = np.cumsum(vols) / self.total if self.total > 0 else vols
        self.slack = self.radii**2 - np.einsum("ij,ij->i", self.centers, self.centers)

    def values(self, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Per-sample estimator values for sorted selector uniforms ``u``.

        Sorted ``u`` makes each ball's samples one contiguous block.
        """
        n = u.shape[0]
        out = np.zeros(n)
        if self.total == 0.0:
            return out
        N = len(self.radii)
        bounds = np.concatenate([[0], np.searchsorted(u, self.cum[:-1], side="right"), [n]])
        ones = np.ones(N)
        for b in range(N):
            lo, hi = bounds[b], bounds[b + 1]
            if hi <= lo:
                continue
            x = self.centers[b] + self.radii[b] * w[lo:hi]
            # |x - c_i|^2 <= r_i^2  <=>  |x|^2 - 2 x.c_i <= r_i^2 - |c_i|^2
            lhs = np.einsum("ij,ij->i", x, x)[:, None] - 2.0 * (x @ self.centers.T)
            inside = (lhs <= self.slack).astype(float)
            # the sampled ball always counts, whatever rounding says about it
            inside[:, b] = 1.0
            out[lo:hi] = self.total / (inside @ ones)
        return out


def sorted_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    """Order statistics of n iid U(0, 1) via normalized exponential spacings."""
    e = np.cumsum(rng.standard_exponential(n + 1))
    return e[:-1] / e[-1]


def union_sampler(fams: Sequence[RadiusFamily], weights: Sequence[float]) -> Sampler:
    dims = {f.dimension for f in fams}
    if len(dims) != 1:
        raise GeometryError("combined union estimators need a common dimension")
    dim = dims.pop()
    data = [_UnionData(f) for f in fams]

    def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
        # w is independent of u, so pairing sorted u with w still gives iid samples
        u = sorted_uniforms(rng, n)
        w = unit_ball_samples(rng, n, dim)
        out = np.zeros(n)
        for ud, wt in zip(data, weights):
            out += wt * ud.values(u, w)
        return out

    return sampler


def union_volume_mc(fam: RadiusFamily, samples: int, seed: int, workers: int = 1) -> MCEstimate:
    """Union volume via inclusion-count weighting.

    A ball is picked with probability proportional to its volume, a point is
    drawn uniformly inside it, and the point contributes (total volume) / m(x)
    where m(x) counts the balls containing it.
    """
    return estimate(union_sampler([fam], [1.0]), samples, seed, workers)


def union_combination_mc(
    fams: Sequence[RadiusFamily], weights: Sequence[float], samples: int, seed: int, workers: int = 1
) -> MCEstimate:
    """sum_c weights[c] * Vol(union of fams[c]) with common random numbers."""
    return estimate(union_sampler(fams, weights), samples, seed, workers)


def ball_halfspace_sampler(
    center: np.ndarray,
    normals: np.ndarray,
    offsets: np.ndarray,
    radii: Sequence[float],
    weights: Sequence[float],
) -> Sampler:
    """Per-sample sum_c weights[c] * Vol(B(center, radii[c])) * [x_c in all halfspaces].

    All radii reuse one unit-ball draw (x_c = center + radii[c] * w).
    """
    center = np.asarray(center, dtype=float).reshape(-1)
    dim = center.shape[0]
    A = np.asarray(normals, dtype=float).reshape(-1, dim)
    b = np.asarray(offsets, dtype=float).reshape(-1)
    vols = [ball_volume(dim, r) if dim else 1.0 for r in radii]
    base = A @ center if A.shape[0] else np.zeros(0)

    def sampler(rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.zeros(n)
        if dim == 0:
            return out + sum(wt * v for wt, v in zip(weights, vols))
        w = unit_ball_samples(rng, n, dim)
        proj = w @ A.T if A.shape[0] else None
        for r, v, wt in zip(radii, vols, weights):
            if proj is None:
                out += wt * v
            else:
                ok = np.all(base + r * proj <= b, axis=1)
                out += wt * v * ok
        return out

    return sampler


def truncated_cell_volume_mc(cell: TruncatedCell, samples: int, seed: int, workers: int = 1) -> MCEstimate:
    A, b = cell.cell.arrays()
    sampler = ball_halfspace_sampler(cell.center, A, b, [cell.radius], [1.0])
    return estimate(sampler, samples, seed, workers)


def wall_sampler(w: Wall, s_values: Sequence[float], weights: Sequence[float]) -> Sampler:
    A, b = w.arrays()
    dim = w.ambient_dimension - 1
    empty = [w.is_empty(s) for s in s_values]
    radii = [0.0 if e else w.radius(s) for e, s in zip(empty, s_values)]
    wts = [0.0 if e else wt for e, wt in zip(empty, weights)]
    return ball_halfspace_sampler(np.zeros(dim), A, b, radii, wts)


def wall_volume_mc(w: Wall, s: float, samples: int, seed: int, workers: int = 1) -> MCEstimate:
    """Vol_{D-1} of the wall: uniform samples in the in-plane disk, accepted by the in-plane halfspaces."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if w.is_empty(s):
        return MCEstimate(0.0, 0.0, samples, seed)
    return estimate(wall_sampler(w, [s], [1.0]), samples, seed, workers)
