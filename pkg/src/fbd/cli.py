"""Command-line entry point: ``fbd {fbd,frw,solve-q,check,fbd2d}``.

Exit codes: 0 success, 1 usage/config error, 2 invariant violation,
3 root solver non-convergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analysis, checks, engine, fbd2d, frw
from .lattice import InvalidState

logger = logging.getLogger("fbd")

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_SOLVER = 0, 1, 2, 3
FBD_HEADER = ("t", "beta", "beta_scaled", "m2", "m4", "m6", "m2_residual", "levy_distance")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    subcommand: str
    alphas: list[float] = field(default_factory=lambda: [0.5])
    steps: int = 1
    n: int = 10000
    trials: int = 1
    seed: int = 0
    jobs: int = 1
    schedule: str = "geometric"
    output: str | None = None
    fmt: str = "csv"
    moments: list[int] = field(default_factory=lambda: [2, 4, 6])

    @property
    def alpha(self) -> float:
        return self.alphas[0]

    def validate(self) -> None:
        for a in self.alphas:
            if not (0.0 < a < 1.0):
                raise ConfigError(f"alpha must lie in (0, 1), got {a}")
        min_steps = 0 if self.subcommand == "frw" else 1
        if self.steps < min_steps:
            raise ConfigError(f"steps must be >= {min_steps}, got {self.steps}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt}")
        if self.n < 1 or self.trials < 1 or self.jobs < 1:
            raise ConfigError("n, trials and jobs must be >= 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for k in self.moments:
            if k < 0 or k % 2 or k > engine.MAX_MOMENT_ORDER:
                raise ConfigError(f"moment orders must be even and <= {engine.MAX_MOMENT_ORDER}, got {k}")


def parse_schedule(spec: str, steps: int) -> list[int]:
    """``geometric`` | ``linear:<k>`` | ``explicit:<t1>,<t2>,...``."""
    if spec == "geometric":
        return engine.geometric_schedule(steps)
    kind, _, arg = spec.partition(":")
    try:
        if kind == "linear":
            return engine.linear_schedule(steps, int(arg))
        if kind == "explicit":
            times = [int(x) for x in arg.split(",") if x.strip()]
            if not times or any(b <= a for a, b in zip(times, times[1:])) or times[0] < 0 or times[-1] > steps:
                raise ConfigError(f"explicit schedule must be strictly increasing within [0, {steps}]")
            return times
    except ValueError as exc:
        raise ConfigError(f"bad schedule {spec!r}: {exc}") from None
    raise ConfigError(f"unknown schedule {spec!r}")


def fmt_num(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.17g}"


def write_csv(fh, header, rows) -> None:
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(fmt_num(v) for v in row) + "\n")


def _open_out(path: str | None):
    if path is None or path == "-":
        return _Stdout()
    return open(path, "w", newline="\n")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _dump_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    with _open_out(path) as fh:
        fh.write(text)


def cmd_fbd(cfg: RunConfig, profile: str | None = None) -> int:
    schedule = parse_schedule(cfg.schedule, cfg.steps)
    lm = analysis.solve_q(cfg.alpha)
    try:
        traj = engine.run_fbd(cfg.alpha, cfg.steps, schedule, snapshot_times=schedule)
    except InvalidState as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    snaps = dict(traj.snapshots)
    table = []
    for r in traj.rows:
        levy = analysis.levy_distance(snaps[r.t], lm) if r.t >= 1 else float("nan")
        extra = {f"m{k}": engine.moment(snaps[r.t], k) for k in cfg.moments}
        table.append((r, levy, extra))
    if cfg.fmt == "csv":
        with _open_out(cfg.output) as fh:
            write_csv(fh, FBD_HEADER,
                      [(r.t, r.beta, r.beta_scaled, r.m2, r.m4, r.m6, r.m2_residual, levy) for r, levy, _ in table])
    else:
        rows = []
        for r, levy, extra in table:
            d = r.as_dict()
            d["levy_distance"] = None if math.isnan(levy) else levy
            d.update(extra)
            rows.append(d)
        _dump_json({"alpha": cfg.alpha, "steps": cfg.steps, "q_alpha": lm.q, "rows": rows}, cfg.output)
    if profile:
        sites, masses = traj.final_state.full()
        with _open_out(profile) as fh:
            write_csv(fh, ("site", "mass"), zip(sites, masses))
    return EXIT_OK


def cmd_solve_q(cfg: RunConfig, tol: float, check_k: int | None) -> int:
    out = []
    for a in cfg.alphas:
        try:
            lm = analysis.solve_q(a, tol)
        except analysis.ConvergenceError as exc:
            print(f"solver failed: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        entry = {
            "alpha": a,
            "q": lm.q,
            "key_residual": lm.key_residual(),
            "gaussian_residual": lm.gaussian_residual(),
        }
        if check_k is not None:
            rep = analysis.check_inequalities(lm, check_k)
            entry["inequalities"] = [
                {"k": r.k, "P_k": r.P, "lower_margin": r.lower_margin, "upper_margin": r.upper_margin,
                 "pass": r.passed}
                for r in rep.rows[1:]
            ]
        out.append(entry)
    if cfg.fmt == "json":
        _dump_json(out, cfg.output)
        return EXIT_OK
    with _open_out(cfg.output) as fh:
        for e in out:
            fh.write(f"alpha={e['alpha']!r} q={fmt_num(e['q'])} "
                     f"key_residual={e['key_residual']:.3e} gaussian_residual={e['gaussian_residual']:.3e}\n")
            for r in e.get("inequalities", []):
                fh.write(f"  k={r['k']:2d} P_k={r['P_k']:.10e} lower={r['lower_margin']:.3e} "
                         f"upper={r['upper_margin']:.3e} {'pass' if r['pass'] else 'FAIL'}\n")
    return EXIT_OK


def cmd_frw(cfg: RunConfig, meta: str | None) -> int:
    prof = frw.frw_average(cfg.n, cfg.alpha, cfg.steps, cfg.trials, cfg.seed, jobs=cfg.jobs)
    with _open_out(cfg.output) as fh:
        write_csv(fh, ("site", "fraction"), zip(prof.sites, prof.fractions))
    if meta is None and cfg.output not in (None, "-"):
        meta = str(cfg.output) + ".meta.json"
    if meta is not None:
        _dump_json({
            "n": cfg.n, "alpha": cfg.alpha, "steps": cfg.steps, "trials": cfg.trials,
            "master_seed": cfg.seed,
            "seed_derivation": "numpy SeedSequence(master_seed).spawn(trials); PCG64 per trial",
            "frozen_per_side": frw.freeze_count(cfg.n, cfg.alpha),
        }, meta)
    total = prof.fractions.sum()
    if abs(total - 1.0) > 1e-12:
        print(f"profile sums to {total!r}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_check(cfg: RunConfig, inject_fault: bool) -> int:
    failed = []
    with _open_out(cfg.output) as fh:
        for a in cfg.alphas:
            results = checks.run_all(a, cfg.steps, inject_fault=inject_fault)
            for r in results:
                fh.write(f"alpha={a:<6g} {r.name:<28s} {'PASS' if r.passed else 'FAIL'}  {r.detail}\n")
                if not r.passed:
                    failed.append((a, r.name))
    if failed:
        for a, name in failed:
            print(f"failed: alpha={a:g} {name}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_fbd2d(cfg: RunConfig, heatmap: str | None, pgm: str | None, slice_path: str | None) -> int:
    bad: list[str] = []

    def audit(g):
        if not g.is_symmetric():
            bad.append(f"symmetry t={g.t}")
        if abs(g.total() - 1.0) > 1e-10 * (g.t + 1):
            bad.append(f"mass t={g.t}")
        if abs(g.radial_second_moment() - g.t * (1 - cfg.alpha)) > 1e-8 * g.t:
            bad.append(f"second moment t={g.t}")

    grid, free = fbd2d.run_fbd2d(cfg.alpha, cfg.steps, observer=audit)
    if heatmap:
        fbd2d.write_matrix_csv(heatmap, free)
    if pgm:
        fbd2d.write_pgm(pgm, free)
    if slice_path:
        r = grid.radius
        with _open_out(slice_path) as fh:
            write_csv(fh, ("y", "free_mass"), zip(np.arange(-r, r + 1), free[r, :]))
    with _open_out(cfg.output) as fh:
        fh.write(f"t={grid.t} radius={grid.radius} total={grid.total():.17g} "
                 f"M2={grid.radial_second_moment():.17g} expected={grid.t * (1 - cfg.alpha):.17g}\n")
    if bad:
        print("invariant violations: " + "; ".join(bad[:10]), file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _csv_ints(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fbd", description="Frozen-boundary diffusion toolkit")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, steps_default):
        sp.add_argument("--alpha", type=float, default=0.5)
        sp.add_argument("--steps", type=int, default=steps_default)
        sp.add_argument("--output", "-o", default=None, help="output path (default stdout)")

    s = sub.add_parser("fbd", help="run FBD-alpha and emit diagnostics")
    common(s, 1000)
    s.add_argument("--schedule", default="geometric", help="geometric | linear:<k> | explicit:<t1,t2,...>")
    s.add_argument("--format", dest="fmt", default="csv")
    s.add_argument("--profile", default=None, help="write final profile CSV (site,mass)")
    s.add_argument("--moments", type=_csv_ints, default=[2, 4, 6], help="even moment orders for JSON output")

    s = sub.add_parser("frw", help="Frozen Random Walk trial average")
    common(s, 100)
    s.add_argument("--n", type=int, default=10000)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--meta", default=None, help="metadata JSON path (default <output>.meta.json)")

    s = sub.add_parser("solve-q", help="solve for the scaling constant q_alpha")
    s.add_argument("--alpha", type=float, action="append")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--check-k", type=int, default=None)
    s.add_argument("--format", dest="fmt", default="csv", help="text (csv) or json")
    s.add_argument("--output", "-o", default=None)

    s = sub.add_parser("check", help="run the invariant suite")
    s.add_argument("--alpha", type=float, action="append")
    s.add_argument("--grid", action="store_true", help="alpha in 0.1, 0.2, ..., 0.9")
    s.add_argument("--steps", type=int, default=10000)
    s.add_argument("--output", "-o", default=None)
    s.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    s = sub.add_parser("fbd2d", help="experimental 2D analogue")
    common(s, 1000)
    s.add_argument("--heatmap", default=None, help="free-mass matrix CSV")
    s.add_argument("--pgm", default=None, help="free-mass portable graymap")
    s.add_argument("--slice", dest="slice_path", default=None, help="x=0 slice CSV")
    return p


def _setup_logging() -> None:
    level = os.environ.get("FBD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    sc = args.subcommand
    alphas = getattr(args, "alpha", None)
    if sc in ("solve-q", "check"):
        if sc == "check" and args.grid:
            alphas = [round(0.1 * i, 1) for i in range(1, 10)]
        alphas = alphas or [0.5]
    else:
        alphas = [alphas]
    cfg = RunConfig(
        subcommand=sc,
        alphas=alphas,
        steps=getattr(args, "steps", 1),
        n=getattr(args, "n", 10000),
        trials=getattr(args, "trials", 1),
        seed=getattr(args, "seed", 0),
        jobs=getattr(args, "jobs", 1),
        schedule=getattr(args, "schedule", "geometric"),
        output=args.output,
        fmt=getattr(args, "fmt", "csv"),
        moments=getattr(args, "moments", [2, 4, 6]),
    )
    try:
        cfg.validate()
        if sc == "fbd":
            parse_schedule(cfg.schedule, cfg.steps)
        if sc == "solve-q":
            if not args.tol >= 1e-14:
                raise ConfigError(f"--tol must be >= 1e-14, got {args.tol}")
            if args.check_k is not None and not 0 <= args.check_k <= analysis.MAX_K:
                raise ConfigError(f"--check-k must lie in [0, {analysis.MAX_K}]")
    except ConfigError as exc:
        print(f"fbd {sc}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logger.info("running %s with %s", sc, cfg)
    if sc == "fbd":
        return cmd_fbd(cfg, args.profile)
    if sc == "frw":
        return cmd_frw(cfg, args.meta)
    if sc == "solve-q":
        return cmd_solve_q(cfg, args.tol, args.check_k)
    if sc == "check":
        return cmd_check(cfg, args.inject_fault)
    return cmd_fbd2d(cfg, args.heatmap, args.pgm, args.slice_path)


if __name__ == "__main__":
    sys.exit(main())
