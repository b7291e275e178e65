"""Instance files, verification reports and CSV output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .geometry import BallConfiguration, GeometryError

SCHEMA_VERSION = 1


class InstanceError(ValueError):
    """Malformed instance file."""


@dataclass(frozen=True, eq=False)
class InstanceFile:
    """A configuration, an optional expanded configuration (same radii) and run defaults.

    On disk this is JSON::

        {"schema_version": 1, "dimension": 2,
         "centers": [[0, 0], [1, 0]], "radii": [1, 1],
         "q_centers": [[0, 0], [2, 0]],
         "s": 0.0, "seed": 0, "samples": 1000000}
    """

    p: BallConfiguration
    q: BallConfiguration | None = None
    s: float | None = None
    seed: int | None = None
    samples: int | None = None

    @property
    def dimension(self) -> int:
        return self.p.dimension

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "dimension": self.p.dimension,
            "centers": self.p.centers.tolist(),
            "radii": self.p.radii.tolist(),
        }
        if self.q is not None:
            out["q_centers"] = self.q.centers.tolist()
        for key in ("s", "seed", "samples"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _matrix(value: Any, name: str, rows: int | None, cols: int) -> list[list[float]]:
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise InstanceError(f"{name} must be a list of coordinate lists")
    if rows is not None and len(value) != rows:
        raise InstanceError(f"{name} has {len(value)} rows, expected {rows}")
    out = []
    for k, row in enumerate(value):
        if len(row) != cols:
            raise InstanceError(f"{name}[{k}] has {len(row)} coordinates, expected {cols}")
        try:
            out.append([float(x) for x in row])
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"{name}[{k}] is not numeric") from exc
    return out


def parse_instance(data: Any) -> InstanceFile:
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InstanceError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    for key in ("dimension", "centers", "radii"):
        if key not in data:
            raise InstanceError(f"missing required key {key!r}")
    dim = data["dimension"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise InstanceError("dimension must be a positive integer")
    centers = _matrix(data["centers"], "centers", None, dim)
    radii = data["radii"]
    if not isinstance(radii, list) or len(radii) != len(centers):
        raise InstanceError("radii must be a list with one entry per center")
    try:
        radii = [float(r) for r in radii]
    except (TypeError, ValueError) as exc:
        raise InstanceError("radii must be numeric") from exc
    try:
        p = BallConfiguration.from_lists(centers, radii)
        q = None
        if "q_centers" in data:
            q = BallConfiguration.from_lists(_matrix(data["q_centers"], "q_centers", len(centers), dim), radii)
    except GeometryError as exc:
        raise InstanceError(str(exc)) from exc
    s = data.get("s")
    seed = data.get("seed")
    samples = data.get("samples")
    if s is not None and not isinstance(s, (int, float)):
        raise InstanceError("s must be a number")
    if seed is not None and (not isinstance(seed, int) or seed < 0):
        raise InstanceError("seed must be a nonnegative integer")
    if samples is not None and (not isinstance(samples, int) or samples < 1):
        raise InstanceError("samples must be a positive integer")
    return InstanceFile(p, q, None if s is None else float(s), seed, samples)


def load_instance(path: str | Path) -> InstanceFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc})") from exc
    return parse_instance(data)


def fmt(x: Any) -> str:
    """17 significant digits for floats, so values round-trip."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


@dataclass(frozen=True)
class Record:
    """One line of a report.  ``passed is None`` marks an informational record."""

    name: str
    lhs: float
    rhs: float | None = None
    error_bound: float = 0.0
    passed: bool | None = True


@dataclass
class VerificationReport:
    command: str
    inputs_digest: str
    seed: int | None = None
    records: list[Record] = field(default_factory=list)
    wall_clock: float = 0.0

    def add(self, *args, **kwargs) -> Record:
        rec = Record(*args, **kwargs)
        self.records.append(rec)
        return rec

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records if r.passed is not None)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "records": [r.__dict__ for r in self.records],
            "passed": self.passed,
            "wall_clock": self.wall_clock,
        }

    def render(self) -> str:
        """Deterministic text form; wall-clock time is deliberately left out."""
        lines = [f"command: {self.command}", f"inputs: {self.inputs_digest}"]
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        for r in self.records:
            status = "info" if r.passed is None else ("PASS" if r.passed else "FAIL")
            rhs = "" if r.rhs is None else f"  rhs={fmt(float(r.rhs))}"
            lines.append(f"[{status}] {r.name}: lhs={fmt(float(r.lhs))}{rhs}  err={fmt(float(r.error_bound))}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def args_digest(*parts: Any) -> str:
    canon = json.dumps(parts, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
