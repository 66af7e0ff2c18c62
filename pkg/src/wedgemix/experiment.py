"""Single runs, ensembles, exponential-rate fits and extended runs.

A run starts from the half/half initial datum, applies one unit shear per
integer time following its schedule, and records the mixing-scale exponent
``n_k`` at every time ``k`` (including ``k = 0``). In standard mode it stops
at ``T10``, the first time with ``n_k >= n_exp - stop_offset``; the base-2
rate is the negated least-squares slope of ``-n_k`` over
``[regression_start, T10]``.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .advection import apply_flow_map
from .analyzer import DEFAULT_KAPPA, Kappa, field_mixing_exponent
from .grid import make_initial_datum
from .packed import MIN_PACKED_EXPONENT, PackedField
from .schedule import ScheduleConfig, ScheduleGenerator

STANDARD = "standard"
EXTENDED = "extended"


class FitError(ValueError):
    """Too few points in the regression window."""


class ScheduleExhausted(RuntimeError):
    """A replayed schedule log ended before the run did."""


@dataclass(frozen=True)
class RunLimits:
    max_steps: int = 400
    mode: str = STANDARD
    horizon: int = None
    regression_start: int = 8
    stop_offset: int = 5
    kappa: Kappa = DEFAULT_KAPPA

    def __post_init__(self):
        if self.mode not in (STANDARD, EXTENDED):
            raise ValueError(f"mode must be {STANDARD!r} or {EXTENDED!r}")
        if self.mode == EXTENDED and (self.horizon is None or self.horizon < 1):
            raise ValueError("extended mode needs a positive horizon")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass
class RunResult:
    config: ScheduleConfig
    limits: RunLimits
    exponents: list
    blocks: list
    T10: int = None
    rate: float = None
    r_squared: float = None
    completed: bool = False
    status: str = "incomplete"
    totals: list = None

    @property
    def trajectory(self):
        return list(enumerate(self.exponents))

    @property
    def end(self):
        return len(self.exponents) - 1


# -- engines ---------------------------------------------------------------

class _ByteEngine:
    """int8 field with double buffering; works at every grid size."""

    def __init__(self, n_exp, kappa):
        self.field = make_initial_datum(n_exp)
        self.spare = np.empty_like(self.field.values)
        self.kappa = kappa

    def apply(self, direction, phase):
        out = apply_flow_map(self.field, direction, phase, 1, out=self.spare)
        self.spare = self.field.values
        self.field = out

    def exponent(self):
        return field_mixing_exponent(self.field, self.kappa)

    def total(self):
        return self.field.total()


class _PackedEngine:
    """One bit per cell; needs ``n_exp >= 6``."""

    def __init__(self, n_exp, kappa):
        self.field = PackedField.initial(n_exp)
        self.kappa = kappa

    def apply(self, direction, phase):
        self.field.apply(direction, phase, 1)

    def exponent(self):
        return self.field.mixing_exponent(self.kappa)

    def total(self):
        return self.field.total()


def make_engine(n_exp, kappa=DEFAULT_KAPPA, engine="auto"):
    if engine == "auto":
        engine = "packed" if n_exp >= MIN_PACKED_EXPONENT else "bytes"
    if engine == "packed":
        return _PackedEngine(n_exp, kappa)
    if engine == "bytes":
        return _ByteEngine(n_exp, kappa)
    raise ValueError(f"unknown engine {engine!r}")


# -- fitting ---------------------------------------------------------------

def fit_rate(trajectory, regression_start=8, T10=None):
    """Least-squares rate and R^2 over ``regression_start <= k <= T10``.

    ``trajectory`` is a sequence of ``(k, n_k)`` pairs; ``n_k`` may be any
    exact number (int, Fraction, decimal string). Sums are exact; only the
    final division is done in floating point. Returns ``(rate, r_squared)``
    with ``rate = -slope`` of the line through ``(k, -n_k)``.
    """
    pts = [(int(k), Fraction(n)) for k, n in trajectory
           if k >= regression_start and (T10 is None or k <= T10)]
    m = len(pts)
    if m < 3:
        raise FitError(f"need at least 3 points in the window, got {m}")
    sx = sum(k for k, _ in pts)
    sxx = sum(k * k for k, _ in pts)
    sy = sum(-n for _, n in pts)
    syy = sum(n * n for _, n in pts)
    sxy = sum(-k * n for k, n in pts)
    cov = m * sxy - sx * sy
    var_x = m * sxx - sx * sx
    var_y = m * syy - sy * sy
    slope = Fraction(cov, 1) / var_x
    if var_y == 0:
        r2 = Fraction(1)
    else:
        r2 = cov * cov / (var_x * var_y)
    return float(-slope), float(r2)


# -- runs ------------------------------------------------------------------

def run_simulation(config, limits=RunLimits(), blocks=None, engine="auto",
                   track_totals=False):
    """Simulate one run.

    ``blocks`` replays a logged schedule instead of drawing from the
    generator. With ``track_totals`` the field sum is recorded at every time
    (a conservation check; costs one extra pass per step).
    """
    n_exp = config.n_exp
    target = n_exp - limits.stop_offset
    state = make_engine(n_exp, limits.kappa, engine)
    source = iter(blocks) if blocks is not None else iter(ScheduleGenerator(config))
    used = []
    exps = [state.exponent()]
    totals = [state.total()] if track_totals else None
    T10 = 0 if exps[0] >= target else None
    remaining = 0
    block = None
    k = 0
    while True:
        if limits.mode == STANDARD:
            if T10 is not None or k >= limits.max_steps:
                break
        elif k >= limits.horizon:
            break
        if remaining == 0:
            try:
                block = next(source)
            except StopIteration:
                raise ScheduleExhausted(f"schedule ended at time {k}") from None
            used.append(block)
            remaining = block.duration
        state.apply(block.direction, block.phase)
        remaining -= 1
        k += 1
        exps.append(state.exponent())
        if track_totals:
            totals.append(state.total())
        if T10 is None and exps[-1] >= target:
            T10 = k

    result = RunResult(config, limits, exps, used, T10=T10, totals=totals)
    if T10 is None:
        result.status = "incomplete"
    elif T10 < limits.regression_start + 2:
        result.completed = True
        result.status = "degenerate"
    else:
        result.completed = True
        result.status = "complete"
        result.rate, result.r_squared = fit_rate(result.trajectory, limits.regression_start, T10)
    return result


# -- ensembles -------------------------------------------------------------

def _mean_std(values):
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


@dataclass
class EnsembleSummary:
    """Statistics over the completed runs of one ensemble.

    Standard deviations use the sample convention (divisor ``runs - 1``;
    zero for a single run). Per-time statistics cover every run that has
    data at that time.
    """

    flow_type: str
    tau: int
    n_exp: int
    runs_requested: int
    runs_completed: int
    mean_rate: float = None
    std_rate: float = None
    mean_r2: float = None
    std_r2: float = None
    mean_T10: float = None
    std_T10: float = None
    per_time: list = field(default_factory=list)
    std_convention: str = "sample"


@dataclass
class TimeStat:
    k: int
    count: int
    mean: float
    std: float
    minimum: int
    maximum: int


def per_time_stats(results):
    horizon = max(r.end for r in results)
    rows = []
    for k in range(horizon + 1):
        vals = [r.exponents[k] for r in results if r.end >= k]
        mean, std = _mean_std(vals)
        rows.append(TimeStat(k, len(vals), mean, std, min(vals), max(vals)))
    return rows


def summarize(results):
    cfg = results[0].config
    done = [r for r in results if r.status == "complete"]
    summary = EnsembleSummary(cfg.flow_type.value, cfg.tau, cfg.n_exp, len(results), len(done))
    summary.mean_rate, summary.std_rate = _mean_std([r.rate for r in done])
    summary.mean_r2, summary.std_r2 = _mean_std([r.r_squared for r in done])
    summary.mean_T10, summary.std_T10 = _mean_std([r.T10 for r in done])
    summary.per_time = per_time_stats(results)
    return summary


def _run_one(args):
    config, limits, engine = args
    return run_simulation(config, limits, engine=engine)


def run_ensemble(template, runs=100, limits=RunLimits(), workers=1, engine="auto",
                 progress=None):
    """Run ``runs`` independent simulations (run indices ``0..runs-1``).

    Returns ``(summary, results)``; results are in run-index order no matter
    how many worker processes are used.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    jobs = [(template.with_run(i), limits, engine) for i in range(runs)]
    if workers <= 1:
        results = []
        for job in jobs:
            results.append(_run_one(job))
            if progress:
                progress(results[-1])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = []
            for res in pool.map(_run_one, jobs):
                results.append(res)
                if progress:
                    progress(res)
    return summarize(results), results


def extended_ensemble(template, horizon, runs=100, limits=RunLimits(), workers=1,
                      engine="auto", progress=None):
    """Run every simulation to a fixed ``horizon`` past ``T10``."""
    ext = replace(limits, mode=EXTENDED, horizon=horizon)
    return run_ensemble(template, runs, ext, workers, engine, progress)


def uniform_stretches(stats, runs, value):
    """Maximal intervals of times where all ``runs`` runs report ``value``."""
    out = []
    start = None
    for s in stats:
        hit = s.count == runs and s.minimum == value and s.maximum == value
        if hit and start is None:
            start = s.k
        elif not hit and start is not None:
            out.append((start, s.k - 1))
            start = None
    if start is not None:
        out.append((start, stats[-1].k))
    return out




def evolve(n_exp, blocks, steps, engine="auto"):
    """Field reached after ``steps`` unit shears of ``blocks`` from the initial datum."""
    state = make_engine(n_exp, DEFAULT_KAPPA, engine)
    done = 0
    for b in blocks:
        for _ in range(b.duration):
            if done == steps:
                break
            state.apply(b.direction, b.phase)
            done += 1
        if done == steps:
            break
    if done < steps:
        raise ScheduleExhausted(f"schedule ended at time {done}, before time {steps}")
    f = state.field
    return f.to_field() if isinstance(f, PackedField) else f
