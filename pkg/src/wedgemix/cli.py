"""``wedgemix`` command line: run, ensemble, analyze, verify, render."""

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import io as wio
from .analyzer import DegenerateFieldError
from .experiment import (FitError, ScheduleExhausted, evolve, fit_rate, run_ensemble,
                         run_simulation)
from .kernels import BACKEND
from .schedule import FlowType, ScheduleConfig, blocks_for, fixed_blocks
from .verify import default_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_FORMAT = 4
EXIT_DEGENERATE = 5
EXIT_INCOMPLETE = 6
EXIT_DEGENERATE_FIELD = 7
EXIT_IO = 8


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# -- argument plumbing -------------------------------------------------------

_OVERRIDES = (
    ("--flow-type", "flow_type", "FSFT, RSFT, FSRT or RSRT"),
    ("--n-exp", "n_exp", "grid exponent (side 2**n)"),
    ("--tau", "tau", "flow time per block"),
    ("--time-set", "time_set", "comma-separated flow times for random-time flows"),
    ("--runs", "runs", "number of runs"),
    ("--seed", "master_seed", "master seed"),
    ("--kappa", "kappa", "mixing threshold as num/den"),
    ("--regression-start", "regression_start", "first time in the fit window"),
    ("--stop-offset", "stop_offset", "stop once the exponent reaches n_exp minus this"),
    ("--max-steps", "max_steps", "give up after this many steps"),
    ("--mode", "mode", "standard or extended"),
    ("--horizon", "horizon", "run length in extended mode"),
)


def _add_config_args(p):
    p.add_argument("--config", type=Path, help="key=value config file (flags override it)")
    for flag, dest, text in _OVERRIDES:
        p.add_argument(flag, dest=dest, help=text)
    p.add_argument("--engine", choices=("auto", "packed", "bytes"), default="auto")


def _load_config(args):
    if args.config is not None:
        if not args.config.is_file():
            raise CliError(EXIT_MISSING, f"config file not found: {args.config}")
        try:
            cfg = wio.load_config(args.config)
        except wio.ConfigError as exc:
            raise CliError(EXIT_CONFIG, f"config error in {args.config}: {exc}") from None
    else:
        cfg = wio.ExperimentConfig()
    for _, dest, _ in _OVERRIDES:
        val = getattr(args, dest, None)
        if val is not None:
            try:
                wio.apply_setting(cfg, dest, val)
            except wio.ConfigError as exc:
                raise CliError(EXIT_CONFIG, f"config error: {exc}") from None
    return cfg


def _checked(fn, *a):
    try:
        return fn(*a)
    except wio.ConfigError as exc:
        raise CliError(EXIT_CONFIG, f"config error: {exc}") from None


def _read_log(path):
    if not Path(path).is_file():
        raise CliError(EXIT_MISSING, f"schedule log not found: {path}")
    try:
        return wio.read_schedule_log(path)
    except (wio.FormatError, ValueError, KeyError) as exc:
        raise CliError(EXIT_FORMAT, f"malformed schedule log {path}: {exc}") from None


def _outdir(path):
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create output directory {path}: {exc}") from None
    return path


def _log(args, msg):
    if not getattr(args, "quiet", False):
        print(msg, file=sys.stderr)


# -- subcommands -------------------------------------------------------------

def cmd_run(args):
    cfg = _load_config(args)
    limits = _checked(cfg.limits)
    if args.replay is not None:
        sched, blocks, _ = _read_log(args.replay)
    else:
        sched = _checked(cfg.schedule, args.run_index)
        blocks = None
    out = _outdir(args.out)
    try:
        res = run_simulation(sched, limits, blocks=blocks, engine=args.engine)
    except ScheduleExhausted as exc:
        raise CliError(EXIT_FORMAT, f"replayed schedule too short: {exc}") from None
    except DegenerateFieldError as exc:
        raise CliError(EXIT_DEGENERATE_FIELD, f"degenerate field: {exc}") from None
    wio.write_trajectory(out / "trajectory.csv", sched.run_index, res.exponents)
    wio.write_schedule_log(out / "schedule.log", sched, res.blocks)
    wio.write_result(out / "result.txt", res)
    print(f"{sched.flow_type.value} tau={sched.tau} n_exp={sched.n_exp} run={sched.run_index}: "
          f"status={res.status} T10={res.T10} rate={res.rate} r2={res.r_squared}")
    if res.status == "degenerate":
        raise CliError(EXIT_DEGENERATE,
                       f"degenerate run: T10={res.T10} leaves fewer than 3 points after "
                       f"regression_start={limits.regression_start}; no rate fitted")
    if res.status == "incomplete":
        raise CliError(EXIT_INCOMPLETE,
                       f"incomplete run: exponent never reached "
                       f"{sched.n_exp - limits.stop_offset} within {res.end} steps")
    return EXIT_OK


def full_matrix_cells():
    """``(flow_type, tau, time_set)`` for the standard ensemble table."""
    cells = [(ft, tau, None) for ft in FlowType for tau in range(2, 11)
             if not (ft is FlowType.FSFT and tau == 2)]
    cells += [(FlowType.FSRT, 3, (3, 4)), (FlowType.RSRT, 3, (3, 4))]
    return cells


def _cell_name(sched):
    name = f"{sched.flow_type.value}_tau{sched.tau}"
    if sched.flow_type.random_time:
        name += "_t" + "-".join(map(str, sched.time_set))
    return name


def _run_cell(args, cfg, sched, limits, out):
    cell = _outdir(out / _cell_name(sched))
    _outdir(cell / "trajectories")
    _outdir(cell / "schedules")
    t0 = time.perf_counter()

    def done(res):
        i = res.config.run_index
        wio.write_trajectory(cell / "trajectories" / f"run_{i:04d}.csv", i, res.exponents)
        wio.write_schedule_log(cell / "schedules" / f"run_{i:04d}.log", res.config, res.blocks)
        _log(args, f"  {_cell_name(sched)} run {i}: {res.status} T10={res.T10} rate={res.rate}")

    summary, results = run_ensemble(sched, cfg.runs, limits, args.workers, args.engine, done)
    row = wio.SummaryRow.from_summary(summary, sched, limits)
    wio.write_summary(cell / "summary.csv", [row])
    wio.write_per_time(cell / "per_time.csv", summary.per_time)
    bad = [r.config.run_index for r in results if r.status != "complete"]
    print(f"{_cell_name(sched)}: runs {summary.runs_completed}/{cfg.runs} "
          f"rate {summary.mean_rate} +- {summary.std_rate} T10 {summary.mean_T10} "
          f"+- {summary.std_T10} ({time.perf_counter() - t0:.1f} s)")
    if bad:
        print(f"  runs without a fitted rate: {bad}", file=sys.stderr)
    return row


def cmd_ensemble(args):
    cfg = _load_config(args)
    limits = _checked(cfg.limits)
    out = _outdir(args.out)
    if args.full_matrix:
        scheds = []
        for ft, tau, ts in full_matrix_cells():
            try:
                scheds.append(ScheduleConfig(ft, cfg.n_exp, tau, ts, cfg.master_seed))
            except ValueError as exc:
                raise CliError(EXIT_CONFIG, f"config error: {exc}") from None
    else:
        scheds = [_checked(cfg.schedule, 0)]
    rows = [_run_cell(args, cfg, s, limits, out) for s in scheds]
    wio.write_summary(out / "summary.csv", rows)
    return EXIT_OK


def _t10_of(points, n_exp, stop_offset):
    if n_exp is None:
        return points[-1][0]
    target = n_exp - stop_offset
    for k, n in points:
        if n >= target:
            return k
    return None


def cmd_analyze(args):
    rows = []
    for path in args.csv:
        if not path.is_file():
            raise CliError(EXIT_MISSING, f"trajectory file not found: {path}")
        try:
            trajs = wio.read_trajectories(path)
        except (wio.FormatError, ValueError, ZeroDivisionError) as exc:
            raise CliError(EXIT_FORMAT, f"malformed trajectory CSV {path}: {exc}") from None
        for run_id, pts in trajs.items():
            pts.sort()
            T10 = args.t10 if args.t10 is not None else _t10_of(pts, args.n_exp, args.stop_offset)
            if T10 is None:
                rows.append((run_id, None, None, None, "incomplete"))
                continue
            try:
                rate, r2 = fit_rate(pts, args.regression_start, T10)
            except FitError:
                rows.append((run_id, T10, None, None, "degenerate"))
                continue
            rows.append((run_id, T10, rate, r2, "complete"))
    header = ("run_id", "T10", "rate", "r_squared", "status")
    if args.out is not None:
        try:
            wio.write_csv(args.out, header, rows)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from None
    print(",".join(header))
    for row in rows:
        print(",".join(wio.format_value(x) for x in row))
    fitted = [r for r in rows if r[4] == "complete"]
    if fitted:
        mean = sum(r[2] for r in fitted) / len(fitted)
        print(f"# {len(fitted)}/{len(rows)} runs fitted, mean rate {mean!r}", file=sys.stderr)
    if not fitted:
        raise CliError(EXIT_DEGENERATE, "no run has enough points in the window to fit a rate")
    return EXIT_OK


def cmd_verify(args):
    t0 = time.perf_counter()
    results = default_suite(args.samples)
    lines = []
    for r in results:
        lines.append(f"[{'PASS' if r.ok else 'FAIL'}] {r.name}")
        lines += [f"    {x}" for x in r.lines]
    ok = all(r.ok for r in results)
    lines.append(f"{sum(r.ok for r in results)}/{len(results)} checks passed "
                 f"in {time.perf_counter() - t0:.3f} s")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        try:
            args.out.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from None
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_render(args):
    if args.replay is not None:
        sched, blocks, _ = _read_log(args.replay)
        n_exp = sched.n_exp
    elif args.fixed_phases is not None:
        cfg = _load_config(args)
        try:
            h, v = (int(x) for x in args.fixed_phases.split(","))
        except ValueError:
            raise CliError(EXIT_CONFIG, "--fixed-phases expects H,V grid phases") from None
        if cfg.tau is None:
            raise CliError(EXIT_CONFIG, "config error: --fixed-phases needs --tau")
        n_exp = cfg.n_exp
        blocks = fixed_blocks(h, v, cfg.tau, args.time // cfg.tau + 1)
    else:
        cfg = _load_config(args)
        sched = _checked(cfg.schedule, args.run_index)
        n_exp = sched.n_exp
        blocks = blocks_for(sched)
    try:
        f = evolve(n_exp, blocks, args.time, args.engine)
    except ScheduleExhausted as exc:
        raise CliError(EXIT_FORMAT, f"replayed schedule too short: {exc}") from None
    try:
        wio.render_field(f, args.out, args.downsample)
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"bad downsample: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write image {args.out}: {exc}") from None
    print(f"wrote {args.out} ({f.side // args.downsample}px, time {args.time})")
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="wedgemix", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s 0.1.0 (kernels: {BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one run")
    _add_config_args(p)
    p.add_argument("--run-index", type=int, default=0)
    p.add_argument("--replay", type=Path, help="replay a schedule log instead of drawing")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ensemble", help="simulate an ensemble and summarize it")
    _add_config_args(p)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--full-matrix", action="store_true",
                   help="every flow type and tau 2..10 plus the {3,4} random-time cells")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("analyze", help="refit rates from trajectory CSVs")
    p.add_argument("csv", type=Path, nargs="+")
    p.add_argument("--regression-start", type=_fraction, default=8)
    p.add_argument("--t10", type=int, help="fixed window end (default: per run)")
    p.add_argument("--n-exp", type=int, help="grid exponent; window ends at T10")
    p.add_argument("--stop-offset", type=int, default=5)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="exact checks of invariant segments")
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="write a field snapshot as PPM")
    _add_config_args(p)
    p.add_argument("--run-index", type=int, default=0)
    p.add_argument("--replay", type=Path)
    p.add_argument("--fixed-phases", help="H,V grid phases for a deterministic schedule")
    p.add_argument("--time", type=int, required=True)
    p.add_argument("--downsample", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"wedgemix: {exc}", file=sys.stderr)
        return exc.code
