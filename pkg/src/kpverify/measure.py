"""Exact measures in dimensions 1 and 2: clipped disks, union areas, wall lengths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .geometry import GeometryError, RadiusFamily
from .power import Halfspace, Wall, power_cell, wall

ANGLE_TIE = 1e-12


def ball_volume(d: int, r: float) -> float:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


@dataclass(frozen=True)
class Edge:
    """A boundary piece in disk-local coordinates, traversed counter-clockwise."""

    kind: Literal["segment", "arc"]
    start: tuple[float, float]
    end: tuple[float, float]
    theta0: float = 0.0
    theta1: float = 0.0


@dataclass(frozen=True)
class ArcPolygon:
    """Convex region bounded by chords and arcs of one circle.

    Edge coordinates are relative to ``center``; every arc belongs to the
    circle of radius ``radius`` about it.  No edges means the empty region.
    """

    center: tuple[float, float]
    radius: float
    edges: tuple[Edge, ...] = field(default_factory=tuple)

    @property
    def is_empty(self) -> bool:
        return not self.edges

    def vertices(self) -> list[tuple[float, float]]:
        cx, cy = self.center
        return [(e.start[0] + cx, e.start[1] + cy) for e in self.edges]


def full_disk(center: Sequence[float], radius: float) -> ArcPolygon:
    c = (float(center[0]), float(center[1]))
    if radius <= 0:
        return ArcPolygon(c, float(radius))
    p = (float(radius), 0.0)
    return ArcPolygon(c, float(radius), (Edge("arc", p, p, 0.0, 2 * math.pi),))


def _on_circle(r: float, theta: float) -> tuple[float, float]:
    return (r * math.cos(theta), r * math.sin(theta))


def _clip_edges(edges: tuple[Edge, ...], r: float, nx: float, ny: float, c: float) -> tuple[Edge, ...]:
    kappa = c / r
    if kappa >= 1.0:
        # the whole disk satisfies the constraint
        return edges
    if kappa <= -1.0:
        return ()
    phi = math.atan2(ny, nx)
    alpha = math.acos(kappa)
    inside_len = 2 * math.pi - 2 * alpha

    pieces: list[Edge] = []
    for e in edges:
        if e.kind == "segment":
            (ax, ay), (bx, by) = e.start, e.end
            fa = nx * ax + ny * ay - c
            fb = nx * bx + ny * by - c
            if fa <= 0 and fb <= 0:
                pieces.append(e)
            elif fa <= 0 < fb or fb <= 0 < fa:
                t = fa / (fa - fb)
                x = (ax + t * (bx - ax), ay + t * (by - ay))
                if fa <= 0:
                    pieces.append(Edge("segment", e.start, x))
                else:
                    pieces.append(Edge("segment", x, e.end))
            continue
        lo = phi + alpha
        lo -= 2 * math.pi * math.ceil((lo - e.theta0) / (2 * math.pi))
        for m in (0, 1):
            a = max(e.theta0, lo + 2 * math.pi * m)
            b = min(e.theta1, lo + 2 * math.pi * m + inside_len)
            if b - a > ANGLE_TIE:
                start = e.start if a == e.theta0 else _on_circle(r, a)
                end = e.end if b == e.theta1 else _on_circle(r, b)
                pieces.append(Edge("arc", start, end, a, b))

    if not pieces:
        return ()
    closed: list[Edge] = []
    gap = 1e-12 * (1.0 + r)
    for k, e in enumerate(pieces):
        closed.append(e)
        nxt = pieces[(k + 1) % len(pieces)]
        if math.dist(e.end, nxt.start) > gap:
            closed.append(Edge("segment", e.end, nxt.start))
    return tuple(closed)


def _as_pairs(halfplanes: Iterable) -> list[tuple[float, float, float]]:
    out = []
    for h in halfplanes:
        if isinstance(h, Halfspace):
            normal, offset = h.normal, h.offset
        else:
            normal, offset = h
        nx, ny = float(normal[0]), float(normal[1])
        norm = math.hypot(nx, ny)
        if norm == 0.0:
            if offset < 0:
                out.append((1.0, 0.0, -math.inf))
            continue
        out.append((nx / norm, ny / norm, float(offset) / norm))
    return out


def clip_disk_by_halfplanes(center: Sequence[float], radius: float, halfplanes: Iterable) -> ArcPolygon:
    """Exact disk ∩ halfplanes, clipping one halfplane at a time.

    ``halfplanes`` holds Halfspace objects or (normal, offset) pairs for
    {x : normal . x <= offset} in absolute coordinates.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    region = full_disk(center, radius)
    cx, cy = region.center
    edges = region.edges
    r = float(radius)
    for nx, ny, off in _as_pairs(halfplanes):
        if not edges:
            break
        edges = _clip_edges(edges, r, nx, ny, off - (nx * cx + ny * cy))
    return ArcPolygon(region.center, r, edges)


def arc_polygon_area(region: ArcPolygon) -> float:
    """Shoelace over chord vertices plus a circular-segment term per arc."""
    r = region.radius
    total = 0.0
    for e in region.edges:
        (ax, ay), (bx, by) = e.start, e.end
        total += 0.5 * (ax * by - ay * bx)
        if e.kind == "arc":
            delta = e.theta1 - e.theta0
            total += 0.5 * r * r * (delta - math.sin(delta))
    return total


def cell_area_2d(fam: RadiusFamily, i: int) -> float:
    cell = power_cell(fam, i)
    r = float(fam.radii[i])
    return arc_polygon_area(clip_disk_by_halfplanes(fam.centers[i], r, cell.halfspaces))


def cell_areas_2d(fam: RadiusFamily) -> list[float]:
    if fam.dimension != 2:
        raise GeometryError("exact cell areas need d = 2")
    fam.config.require_distinct_centers()
    return [cell_area_2d(fam, i) for i in range(fam.n)]


def union_area_2d(fam: RadiusFamily) -> float:
    """Area of the union of disks as the sum of exact truncated power-cell areas."""
    return math.fsum(cell_areas_2d(fam))


def union_length_1d(fam: RadiusFamily) -> float:
    if fam.dimension != 1:
        raise GeometryError("interval unions need d = 1")
    c = fam.centers[:, 0]
    r = fam.radii
    order = np.argsort(c - r, kind="stable")
    total = 0.0
    cur_lo = cur_hi = None
    for k in order:
        lo, hi = float(c[k] - r[k]), float(c[k] + r[k])
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    total += cur_hi - cur_lo
    return total


def union_measure_exact(fam: RadiusFamily) -> float:
    if fam.dimension == 1:
        return union_length_1d(fam)
    if fam.dimension == 2:
        return union_area_2d(fam)
    raise GeometryError(f"no exact union measure in dimension {fam.dimension}")


def interval_ball_halfspaces(radius: float, normals: np.ndarray, offsets: np.ndarray) -> tuple[float, float]:
    """[lo, hi] of [-radius, radius] ∩ {normal * u <= offset} for scalar normals."""
    lo, hi = -radius, radius
    for g, b in zip(np.asarray(normals, dtype=float).reshape(-1), np.asarray(offsets, dtype=float)):
        if g > 0:
            hi = min(hi, b / g)
        elif g < 0:
            lo = max(lo, b / g)
        elif b < 0:
            return 0.0, 0.0
    return lo, hi


def ball_halfspace_measure(dim: int, radius: float, normals, offsets) -> float:
    """Exact measure of B(0, radius) ∩ {A u <= b} for dim in {0, 1, 2}."""
    normals = np.asarray(normals, dtype=float).reshape(-1, dim) if dim else np.zeros((0, 0))
    offsets = np.asarray(offsets, dtype=float).reshape(-1)
    if radius < 0:
        return 0.0
    if dim == 0:
        return 1.0 if np.all(offsets >= 0) else 0.0
    if dim == 1:
        lo, hi = interval_ball_halfspaces(radius, normals[:, 0], offsets)
        return max(hi - lo, 0.0)
    if dim == 2:
        return arc_polygon_area(clip_disk_by_halfplanes((0.0, 0.0), radius, list(zip(normals, offsets))))
    raise GeometryError(f"no exact truncated-ball measure in dimension {dim}")


def wall_measure_exact(w: Wall, s: float) -> float:
    """Vol_{D-1} of the wall at parameter s, for ambient D in {1, 2}."""
    D = w.ambient_dimension
    if D > 2:
        raise GeometryError(f"no exact wall measure in ambient dimension {D}")
    if w.is_empty(s):
        return 0.0
    A, b = w.arrays()
    return ball_halfspace_measure(D - 1, w.radius(s), A, b)


def wall_length_2d(fam: RadiusFamily, i: int, j: int) -> float:
    if fam.dimension != 2:
        raise GeometryError("wall lengths need d = 2")
    return wall_measure_exact(wall(fam, i, j), fam.s)


def wall_length_s_derivative_2d(w: Wall, s: float) -> float:
    """Closed-form right derivative in s of the 2D wall length.

    Each chord end still on the disk moves outward at dr_ij/ds = 1 / (2 r_ij).
    """
    if w.ambient_dimension != 2:
        raise GeometryError("closed-form wall derivative needs ambient D = 2")
    if w.is_empty(s) or w.radius_squared(s) == 0.0:
        return 0.0
    r = w.radius(s)
    A, b = w.arrays()
    lo, hi = interval_ball_halfspaces(r, A[:, 0], b)
    if hi <= lo:
        return 0.0
    ends = (hi == r) + (lo == -r)
    return ends / (2.0 * r)
