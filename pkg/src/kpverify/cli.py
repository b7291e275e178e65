"""Command-line harness.

Exit codes: 0 pass, 1 verification finding, 2 parse error, 3 domain error or
unsupported request, 4 precondition failure (q is not an expansion of p).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np

from .dynamics import (
    Motion,
    NotAnExpansionError,
    archimedes_check,
    csikos_derivative,
    kp_defect,
    lifted_monotone_motion,
    linear_motion,
    total_volume_derivative_fd,
    triple_count_trace,
)
from .geometry import (
    BallConfiguration,
    GeometryError,
    RadiusFamily,
    expansion_slack,
    is_expansion,
    theorem_condition_holds,
)
from .instances import (
    InstanceError,
    InstanceFile,
    VerificationReport,
    args_digest,
    load_instance,
    render_csv,
)
from .measure import union_measure_exact, wall_measure_exact
from .montecarlo import MCEstimate, derive_seed, union_volume_mc, wall_volume_mc
from .power import wall
from .random_instances import expansion_pairs, no_halfspace_instance, random_archimedes_instance, scaling_pair

EXIT_PASS, EXIT_FINDING, EXIT_PARSE, EXIT_DOMAIN, EXIT_PRECONDITION = 0, 1, 2, 3, 4
DEFAULT_SAMPLES = 10**6
DEFAULT_SEED = 0
KP_TOL = 1e-9
CSIKOS_REL_TOL = 1e-5


class DomainError(Exception):
    pass


class PreconditionError(Exception):
    pass


def _value(x) -> tuple[float, float]:
    if isinstance(x, MCEstimate):
        return x.value, x.std_error
    return float(x), 0.0


def parse_t_grid(text: str) -> list[float]:
    """'a:b:n' for n evenly spaced points, or a comma-separated list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad t-grid {text!r}") from exc


class Context:
    """Resolved global options plus the output sink."""

    def __init__(self, args: argparse.Namespace, instance: InstanceFile | None = None):
        self.args = args
        self.instance = instance
        file_seed = instance.seed if instance else None
        file_samples = instance.samples if instance else None
        file_s = instance.s if instance else None
        self.seed = _first(getattr(args, "seed", None), file_seed, DEFAULT_SEED)
        self.samples = _first(getattr(args, "samples", None), file_samples, DEFAULT_SAMPLES)
        self.s = _first(getattr(args, "s", None), file_s, 0.0)
        self.workers = getattr(args, "workers", None) or 1
        self.out = getattr(args, "out", None)
        self.format = getattr(args, "format", None) or "text"

    def emit(self, report: VerificationReport, csv_text: str | None = None) -> None:
        if csv_text is not None and self.out:
            Path(self.out).write_text(csv_text)
        if csv_text is not None and self.format == "csv" and not self.out:
            sys.stdout.write(csv_text)
        else:
            sys.stdout.write(report.render())
        sys.stdout.flush()


def _first(*values):
    for v in values:
        if v is not None:
            return v
    return None


def _require_pair(inst: InstanceFile) -> BallConfiguration:
    if inst.q is None:
        raise InstanceError("this command needs a pair instance (q_centers)")
    return inst.q


def _digest(ctx: Context, *extra) -> str:
    inst = ctx.instance.digest() if ctx.instance else ""
    return args_digest(inst, ctx.seed, ctx.samples, ctx.s, *extra)


def cmd_volume(ctx: Context) -> int:
    inst = ctx.instance
    fam = RadiusFamily(inst.p, ctx.s)
    mode = ctx.args.mode
    report = VerificationReport("volume", _digest(ctx, mode), ctx.seed if mode == "mc" else None)
    if mode == "exact":
        if fam.dimension > 2:
            raise DomainError("exact mode needs d <= 2; use --mode mc")
        report.add("union_volume", union_measure_exact(fam), None, 0.0, None)
    else:
        est = union_volume_mc(fam, ctx.samples, ctx.seed, ctx.workers)
        report.add("union_volume", est.value, None, est.std_error, None)
    ctx.emit(report)
    return EXIT_PASS


def cmd_check_condition(ctx: Context) -> int:
    p = ctx.instance.p
    holds, table = theorem_condition_holds(p, ctx.args.mode)
    limit = p.dimension + 1
    report = VerificationReport("check-condition", _digest(ctx, ctx.args.mode))
    for (i, j), count in table.items():
        report.add(f"pair({i},{j}) interactions", count, limit, 0.0, count <= limit)
    report.add("condition holds", float(holds), 1.0, 0.0, holds)
    csv_text = render_csv(["i", "j", "count", "limit"], [(i, j, c, limit) for (i, j), c in table.items()])
    ctx.emit(report, csv_text)
    return EXIT_PASS if holds else EXIT_FINDING


def cmd_verify_kp(ctx: Context) -> int:
    p = ctx.instance.p
    q = _require_pair(ctx.instance)
    mode = ctx.args.mode
    if not is_expansion(p, q):
        raise PreconditionError(f"q is not an expansion of p (min distance change {expansion_slack(p, q):.6g})")
    if mode == "exact" and p.dimension > 2:
        raise DomainError("exact mode needs d <= 2; use --mode mc")
    report = VerificationReport("verify-kp", _digest(ctx, mode), ctx.seed if mode == "mc" else None)
    slack = expansion_slack(p, q)
    report.add("expansion min slack", slack if math.isfinite(slack) else 0.0, 0.0, 0.0, True)
    holds, table = theorem_condition_holds(p)
    report.add("condition max interactions", max(table.values(), default=0), p.dimension + 1, 0.0, None)
    defect, err = _value(kp_defect(p, q, ctx.s, mode, ctx.samples, ctx.seed, ctx.workers))
    ok = defect >= -KP_TOL if mode == "exact" else defect >= -3.0 * err
    report.add("kp_defect", defect, 0.0, err, ok)
    ctx.emit(report)
    if not ok:
        sys.stderr.write(
            f"FINDING: union volume decreased under expansion (defect {defect:.6g}, condition "
            f"{'holds' if holds else 'violated'})\n"
        )
        return EXIT_FINDING
    return EXIT_PASS


def _motion(p: BallConfiguration, q: BallConfiguration, kind: str | None) -> Motion:
    if kind is None:
        kind = "lifted" if p.dimension == 1 else "linear"
    if kind == "lifted":
        try:
            return lifted_monotone_motion(p, q)
        except NotAnExpansionError as exc:
            raise PreconditionError(str(exc)) from exc
    return linear_motion(p, q)


def cmd_csikos_check(ctx: Context) -> int:
    a = ctx.args
    p = ctx.instance.p
    q = _require_pair(ctx.instance)
    motion = _motion(p, q, a.motion)
    mode = a.mode or ("exact" if motion.dimension == 2 else "mc")
    if mode == "exact" and motion.dimension != 2:
        raise DomainError(f"exact mode needs ambient dimension 2, motion lives in E^{motion.dimension}")
    h = a.h if a.h is not None else (1e-5 if mode == "exact" else 1e-2)
    ts = a.t_grid or parse_t_grid("0.1:0.9:9")
    report = VerificationReport(
        "csikos-check", _digest(ctx, mode, motion.kind, h, ts), ctx.seed if mode == "mc" else None
    )
    rows = []
    for t in ts:
        fam = motion.family_at(t, ctx.s)
        if mode == "exact":
            vol, vol_err = union_measure_exact(fam), 0.0
        else:
            vol, vol_err = _value(union_volume_mc(fam, ctx.samples, ctx.seed, ctx.workers))
        try:
            f, f_err = _value(csikos_derivative(motion, t, ctx.s, mode, ctx.samples, ctx.seed, ctx.workers))
            fd, fd_err = _value(
                total_volume_derivative_fd(motion, t, ctx.s, h, mode, ctx.samples, derive_seed(ctx.seed, 7), ctx.workers)
            )
        except ValueError as exc:
            raise DomainError(str(exc)) from exc
        diff = abs(f - fd)
        bound = CSIKOS_REL_TOL * (1.0 + abs(f)) if mode == "exact" else 3.0 * math.hypot(f_err, fd_err)
        ok = diff <= bound
        report.add(f"dV/dt at t={t:.6g}", f, fd, bound, ok)
        rows.append((t, vol, vol_err, f, f_err, fd, fd_err, diff, ok))
    header = ["t", "V(t)", "V_err", "dV/dt_formula", "formula_err", "dV/dt_fd", "fd_err", "|diff|", "pass"]
    ctx.emit(report, render_csv(header, rows))
    return EXIT_PASS if report.passed else EXIT_FINDING


def cmd_archimedes(ctx: Context) -> int:
    a = ctx.args
    if a.n not in (1, 2) or a.k not in (1, 2):
        raise DomainError("supported: n in {1, 2}, k in {1, 2}")
    if a.m < 0:
        raise DomainError("--m must be nonnegative")
    h = a.h if a.h is not None else (1e-5 if a.m == 0 else (1e-2 if a.k == 1 else 1e-1))
    rng = np.random.default_rng(ctx.seed)
    report = VerificationReport("archimedes", args_digest(a.n, a.k, a.m, a.count, ctx.seed, ctx.samples, ctx.s, h), ctx.seed)
    rows = []
    for c in range(a.count):
        inst = no_halfspace_instance(a.n, a.k) if a.m == 0 else random_archimedes_instance(rng, a.n, a.k, a.m)
        try:
            res = archimedes_check(inst, ctx.s, h, ctx.samples, derive_seed(ctx.seed, c), ctx.workers)
        except GeometryError as exc:
            raise DomainError(str(exc)) from exc
        report.add(f"instance {c}: {res.name} m={a.m}", res.lhs, res.rhs, res.error_bound, res.passed)
        rows.append((c, a.n, a.k, a.m, res.lhs, res.rhs, res.error_bound, res.passed))
    ctx.emit(report, render_csv(["instance", "n", "k", "m", "lhs", "rhs", "err", "pass"], rows))
    return EXIT_PASS if report.passed else EXIT_FINDING


def cmd_search(ctx: Context) -> int:
    a = ctx.args
    if a.mode == "exact" and a.d > 2:
        raise DomainError("exact search needs d <= 2; use --mode mc")
    rng = np.random.default_rng(ctx.seed)
    report = VerificationReport(
        "search",
        args_digest(a.d, a.n_balls, a.trials, a.condition, a.generator, a.lambda_max, a.spread, ctx.seed, ctx.samples, ctx.s),
        ctx.seed,
    )
    rows = []
    worst: tuple[float, BallConfiguration, BallConfiguration] | None = None

    def pairs():
        if a.generator in ("rejection", "both"):
            yield from (("rejection", p, q) for p, q in expansion_pairs(rng, a.n_balls, a.d, a.trials, spread=a.spread))
        if a.generator in ("scaling", "both"):
            for _ in range(a.trials):
                p = BallConfiguration(rng.uniform(0, 1, (a.n_balls, a.d)), rng.uniform(0.2, 0.6, a.n_balls))
                lam = float(rng.uniform(1.0, a.lambda_max)) if a.lambda_max > 1 else 1.0
                yield ("scaling",) + scaling_pair(p, lam)

    accepted = 0
    for gen, p, q in pairs():
        holds = theorem_condition_holds(p)[0]
        if a.condition == "on" and not holds:
            continue
        try:
            defect, err = _value(
                kp_defect(p, q, ctx.s, a.mode, ctx.samples, derive_seed(ctx.seed, accepted), ctx.workers)
            )
        except GeometryError:
            continue
        rows.append((accepted, gen, defect, err, holds))
        key = defect if a.mode == "exact" else defect / err if err > 0 else defect
        if worst is None or key < worst[0]:
            worst = (key, p, q)
        accepted += 1
    if accepted == 0:
        raise DomainError("no expansion pairs accepted; raise --trials or --spread")
    defects = [r[2] for r in rows]
    min_row = rows[int(np.argmin(defects))]
    ok = min_row[2] >= -KP_TOL if a.mode == "exact" else all(r[2] >= -3.0 * r[3] for r in rows)
    report.add("accepted pairs", accepted, None, 0.0, None)
    report.add("min kp_defect", min_row[2], 0.0, min_row[3], ok)
    if worst is not None and a.dump:
        Path(a.dump).write_text(InstanceFile(worst[1], worst[2], ctx.s).dumps())
    ctx.emit(report, render_csv(["trial", "generator", "defect", "err", "condition"], rows))
    return EXIT_PASS if ok else EXIT_FINDING


def cmd_trace_motion(ctx: Context) -> int:
    a = ctx.args
    p = ctx.instance.p
    q = _require_pair(ctx.instance)
    if not is_expansion(p, q):
        raise PreconditionError("q is not an expansion of p")
    motion = lifted_monotone_motion(p, q)
    ts = a.t_grid or parse_t_grid("0:1:11")
    exact = motion.dimension <= 2
    trace = triple_count_trace(motion, ts, ctx.s)
    pairs = [(i, j) for i in range(motion.n) for j in range(i + 1, motion.n)]
    iu = np.triu_indices(motion.n, 1)
    d0 = motion.distances(0.0)[iu]
    rows = []
    for t, tr in zip(ts, trace):
        fam = motion.family_at(t, ctx.s)
        if exact:
            vol, vol_err = union_measure_exact(fam), 0.0
        else:
            vol, vol_err = _value(union_volume_mc(fam, ctx.samples, ctx.seed, ctx.workers))
        dd = motion.distance_derivatives(t)[iu]
        inc = motion.distances(t)[iu] - d0
        walls = []
        for i, j in pairs:
            w = wall(fam, i, j)
            if motion.dimension == 2:
                walls += [wall_measure_exact(w, ctx.s), 0.0]
            else:
                walls += list(_value(wall_volume_mc(w, ctx.s, ctx.samples, derive_seed(ctx.seed, i, j), ctx.workers)))
        rows.append(
            [t, float(dd.min()) if dd.size else 0.0, float(inc.min()) if inc.size else 0.0, vol, vol_err,
             tr.max_pair_count, tr.total_triples] + walls
        )
    header = ["t", "min_dist_derivative", "min_dist_increase", "union", "union_err", "max_pair_count", "total_triples"]
    for i, j in pairs:
        header += [f"wall_{i}_{j}", f"wall_{i}_{j}_err"]

    report = VerificationReport("trace-motion", _digest(ctx, ts), None if exact else ctx.seed)
    min_dd = min((r[1] for r in rows), default=0.0)
    report.add("min distance derivative", min_dd, 0.0, 0.0, min_dd >= -1e-12)
    steps = [(r1[3] - r0[3], math.hypot(r0[4], r1[4])) for r0, r1 in zip(rows, rows[1:])]
    worst_step = min(steps, default=(0.0, 0.0))
    mono = all(dv >= -(KP_TOL if exact else 3.0 * e) for dv, e in steps)
    report.add("min union increment", worst_step[0], 0.0, worst_step[1], mono)
    triples = [r[6] for r in rows]
    report.add("max triple-count increase", max((b - c for c, b in zip(triples, triples[1:])), default=0), 0.0, 0.0, None)
    ctx.emit(report, render_csv(header, rows))
    return EXIT_PASS if report.passed else EXIT_FINDING


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="RNG seed (default 0)")
    parser.add_argument("--samples", type=int, default=default, help="Monte Carlo samples (default 10^6)")
    parser.add_argument("--out", default=default, help="write CSV output to this path")
    parser.add_argument("--format", choices=("text", "csv"), default=default, help="stdout format")
    parser.add_argument("--workers", type=int, default=default, help="Monte Carlo worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpverify", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    glob = argparse.ArgumentParser(add_help=False)
    _global_options(glob, suppress=True)

    def add(name: str, func: Callable[[Context], int], instance: bool, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[glob], help=help)
        if instance:
            sp.add_argument("instance", help="instance JSON file")
        sp.set_defaults(func=func, needs_instance=instance)
        return sp

    sp = add("volume", cmd_volume, True, "union volume of the balls")
    sp.add_argument("--mode", choices=("exact", "mc"), default="exact")
    sp.add_argument("--s", type=float)

    sp = add("check-condition", cmd_check_condition, True, "pair/ball interaction counts against d + 1")
    sp.add_argument("--mode", choices=("closed", "interior"), default="closed")

    sp = add("verify-kp", cmd_verify_kp, True, "check the volume inequality on a pair instance")
    sp.add_argument("--mode", choices=("exact", "mc"), default="exact")
    sp.add_argument("--s", type=float)

    sp = add("csikos-check", cmd_csikos_check, True, "derivative formula against finite differences")
    sp.add_argument("--mode", choices=("exact", "mc"))
    sp.add_argument("--motion", choices=("lifted", "linear"))
    sp.add_argument("--t-grid", type=parse_t_grid)
    sp.add_argument("--s", type=float)
    sp.add_argument("--h", type=float)

    sp = add("archimedes", cmd_archimedes, False, "s-derivative identity for truncated balls")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--m", type=int, default=2, help="number of halfspaces (0: analytic case)")
    sp.add_argument("--count", type=int, default=1, help="number of random instances")
    sp.add_argument("--s", type=float)
    sp.add_argument("--h", type=float)

    sp = add("search", cmd_search, False, "random expansion pairs; report the worst defect")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--n-balls", type=int, default=3)
    sp.add_argument("--trials", type=int, default=1000, help="attempted samples per generator")
    sp.add_argument("--condition", choices=("on", "off"), default="off")
    sp.add_argument("--generator", choices=("rejection", "scaling", "both"), default="both")
    sp.add_argument("--lambda-max", type=float, default=2.0)
    sp.add_argument("--spread", type=float, default=2.0, help="q box size relative to the p box")
    sp.add_argument("--mode", choices=("exact", "mc"), default="exact")
    sp.add_argument("--dump", help="write the worst pair as an instance file")
    sp.add_argument("--s", type=float)

    sp = add("trace-motion", cmd_trace_motion, True, "CSV trace along the lifted monotone motion")
    sp.add_argument("--t-grid", type=parse_t_grid)
    sp.add_argument("--s", type=float)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        instance = load_instance(args.instance) if args.needs_instance else None
        ctx = Context(args, instance)
        if ctx.samples < 1 or ctx.workers < 1:
            raise DomainError("--samples and --workers must be positive")
        code = args.func(ctx)
    except InstanceError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except PreconditionError as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        return EXIT_PRECONDITION
    except (DomainError, GeometryError) as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return EXIT_DOMAIN
    sys.stderr.write(f"wall-clock: {time.perf_counter() - start:.3f}s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
