"""Config files, CSV records, schedule logs and PPM snapshots.

All text formats are UTF-8 with LF line endings and are written
deterministically: the same records always produce the same bytes.
"""

import csv
import io
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .advection import Direction
from .analyzer import Kappa
from .experiment import EnsembleSummary, RunLimits, TimeStat
from .schedule import GENERATOR_ID, Block, FlowType, ScheduleConfig

SUMMARY_SCHEMA_VERSION = 1
SCHEDULE_LOG_MAGIC = "# wedgemix schedule log v1"

BLUE = (31, 119, 255)
YELLOW = (255, 221, 51)


class ConfigError(ValueError):
    pass


class FormatError(ValueError):
    pass


# -- experiment config -----------------------------------------------------

@dataclass
class ExperimentConfig:
    flow_type: FlowType = None
    n_exp: int = 15
    tau: int = None
    time_set: tuple = None
    runs: int = 100
    master_seed: int = 0
    kappa: Kappa = Kappa(1, 3)
    regression_start: int = 8
    stop_offset: int = 5
    max_steps: int = 400
    mode: str = "standard"
    horizon: int = None

    def schedule(self, run_index=0):
        if self.flow_type is None or self.tau is None:
            raise ConfigError("flow_type and tau are required")
        try:
            return ScheduleConfig(self.flow_type, self.n_exp, self.tau, self.time_set,
                                  self.master_seed, run_index)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def limits(self):
        try:
            return RunLimits(self.max_steps, self.mode, self.horizon,
                             self.regression_start, self.stop_offset, self.kappa)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def _parse_time_set(text):
    return tuple(int(t) for t in str(text).replace(" ", "").split(",") if t)


_CONVERTERS = {
    "flow_type": lambda v: FlowType(v.strip().upper()),
    "n_exp": int,
    "tau": int,
    "time_set": _parse_time_set,
    "runs": int,
    "master_seed": int,
    "kappa": Kappa.parse,
    "regression_start": int,
    "stop_offset": int,
    "max_steps": int,
    "mode": lambda v: v.strip().lower(),
    "horizon": int,
}

CONFIG_KEYS = tuple(_CONVERTERS)


def apply_setting(cfg, key, value):
    if key not in _CONVERTERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        setattr(cfg, key, _CONVERTERS[key](value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def parse_config(text, cfg=None):
    """Parse flat ``key=value`` lines (``#`` starts a comment)."""
    cfg = cfg or ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        apply_setting(cfg, key, value)
    return cfg


def load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(cfg):
    lines = []
    for key in CONFIG_KEYS:
        val = getattr(cfg, key)
        if val is None:
            continue
        if key == "flow_type":
            val = val.value
        elif key == "time_set":
            val = ",".join(map(str, val))
        lines.append(f"{key}={val}")
    return "\n".join(lines) + "\n"


# -- CSV helpers -----------------------------------------------------------

def format_value(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(x) for x in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def _read_csv(path, header):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != list(header):
        raise FormatError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def _opt(text, conv):
    return None if text == "" else conv(text)


TRAJECTORY_HEADER = ("run_id", "k", "neg_log2_scale")


def write_trajectory(path, run_id, exponents):
    write_csv(path, TRAJECTORY_HEADER, ((run_id, k, n) for k, n in enumerate(exponents)))


def read_trajectories(path):
    """``{run_id: [(k, value), ...]}``; values parsed as exact Fractions."""
    out = {}
    for row in _read_csv(path, TRAJECTORY_HEADER):
        if len(row) != 3:
            raise FormatError(f"{path}: bad row {row}")
        run_id, k, val = row
        out.setdefault(run_id, []).append((int(k), Fraction(val)))
    return out


SUMMARY_HEADER = ("flow_type", "tau", "n_exp", "runs_completed", "mean_rate", "std_rate",
                  "mean_r2", "std_r2", "mean_T10", "std_T10", "kappa", "regression_start",
                  "stop_offset", "seed", "generator_id", "time_set", "schema_version")


@dataclass
class SummaryRow:
    flow_type: str
    tau: int
    n_exp: int
    runs_completed: int
    mean_rate: float
    std_rate: float
    mean_r2: float
    std_r2: float
    mean_T10: float
    std_T10: float
    kappa: str
    regression_start: int
    stop_offset: int
    seed: int
    generator_id: str
    time_set: str
    schema_version: int = SUMMARY_SCHEMA_VERSION

    @classmethod
    def from_summary(cls, summary, config, limits):
        return cls(summary.flow_type, summary.tau, summary.n_exp, summary.runs_completed,
                   summary.mean_rate, summary.std_rate, summary.mean_r2, summary.std_r2,
                   summary.mean_T10, summary.std_T10, str(limits.kappa), limits.regression_start,
                   limits.stop_offset, config.master_seed, GENERATOR_ID,
                   " ".join(map(str, config.time_set)))


_SUMMARY_TYPES = {f.name: f.type for f in fields(SummaryRow)}


def write_summary(path, rows):
    write_csv(path, SUMMARY_HEADER, ([getattr(r, h) for h in SUMMARY_HEADER] for r in rows))


def read_summary(path):
    out = []
    for row in _read_csv(path, SUMMARY_HEADER):
        vals = {h: v if _SUMMARY_TYPES[h] is str else _opt(v, _SUMMARY_TYPES[h])
                for h, v in zip(SUMMARY_HEADER, row)}
        out.append(SummaryRow(**vals))
    return out


PER_TIME_HEADER = ("k", "count", "mean", "std", "min", "max")


def write_per_time(path, stats):
    write_csv(path, PER_TIME_HEADER,
               ((s.k, s.count, s.mean, s.std, s.minimum, s.maximum) for s in stats))


def read_per_time(path):
    return [TimeStat(int(k), int(c), float(m), float(s), int(lo), int(hi))
            for k, c, m, s, lo, hi in _read_csv(path, PER_TIME_HEADER)]


RESULT_KEYS = ("flow_type", "tau", "n_exp", "time_set", "master_seed", "run_index", "run_seed",
               "generator_id", "mode", "status", "T10", "rate", "r_squared", "end",
               "kappa", "regression_start", "stop_offset", "max_steps", "horizon")


def result_record(result):
    cfg, lim = result.config, result.limits
    return {
        "flow_type": cfg.flow_type.value, "tau": cfg.tau, "n_exp": cfg.n_exp,
        "time_set": ",".join(map(str, cfg.time_set)), "master_seed": cfg.master_seed,
        "run_index": cfg.run_index, "run_seed": cfg.run_seed(), "generator_id": GENERATOR_ID,
        "mode": lim.mode, "status": result.status, "T10": result.T10, "rate": result.rate,
        "r_squared": result.r_squared, "end": result.end, "kappa": str(lim.kappa),
        "regression_start": lim.regression_start, "stop_offset": lim.stop_offset,
        "max_steps": lim.max_steps, "horizon": lim.horizon,
    }


def write_result(path, result):
    rec = result_record(result)
    Path(path).write_text("".join(f"{k}={format_value(rec[k])}\n" for k in RESULT_KEYS), encoding="utf-8")


def read_result(path):
    rec = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        key, _, val = line.partition("=")
        rec[key] = val
    if tuple(rec) != RESULT_KEYS:
        raise FormatError(f"{path}: unexpected result keys")
    return rec


# -- schedule logs ---------------------------------------------------------

BLOCK_HEADER = "index,direction,phase,duration"


def format_schedule_log(config, blocks):
    lines = [
        SCHEDULE_LOG_MAGIC,
        f"flow_type={config.flow_type.value}",
        f"n_exp={config.n_exp}",
        f"tau={config.tau}",
        f"time_set={','.join(map(str, config.time_set))}",
        f"master_seed={config.master_seed}",
        f"run_index={config.run_index}",
        f"run_seed={config.run_seed()}",
        f"generator={GENERATOR_ID}",
        f"blocks={len(blocks)}",
        BLOCK_HEADER,
    ]
    lines += [f"{b.index},{b.direction.value},{b.phase},{b.duration}" for b in blocks]
    return "\n".join(lines) + "\n"


def write_schedule_log(path, config, blocks):
    Path(path).write_text(format_schedule_log(config, blocks), encoding="utf-8", newline="")


def parse_schedule_log(text):
    """Return ``(ScheduleConfig, blocks, header)`` from a schedule log."""
    lines = text.split("\n")
    if not lines or lines[0] != SCHEDULE_LOG_MAGIC:
        raise FormatError("not a wedgemix schedule log")
    header = {}
    pos = 1
    while pos < len(lines) and lines[pos] != BLOCK_HEADER:
        key, sep, val = lines[pos].partition("=")
        if not sep:
            raise FormatError(f"bad header line {lines[pos]!r}")
        header[key] = val
        pos += 1
    if pos == len(lines):
        raise FormatError("schedule log has no block table")
    blocks = []
    for line in lines[pos + 1:]:
        if not line:
            continue
        idx, d, ph, dur = line.split(",")
        blocks.append(Block(int(idx), Direction.parse(d), int(ph), int(dur)))
    if int(header.get("blocks", len(blocks))) != len(blocks):
        raise FormatError("block count does not match the header")
    if [b.index for b in blocks] != list(range(len(blocks))):
        raise FormatError("blocks must be numbered 0, 1, 2, ...")
    side = 1 << int(header["n_exp"])
    if any(not 0 <= b.phase < side for b in blocks):
        raise FormatError("phase outside the grid")
    cfg = ScheduleConfig(FlowType(header["flow_type"]), int(header["n_exp"]), int(header["tau"]),
                         _parse_time_set(header["time_set"]), int(header["master_seed"]),
                         int(header["run_index"]))
    return cfg, blocks, header


def read_schedule_log(path):
    return parse_schedule_log(Path(path).read_text(encoding="utf-8"))


# -- rendering -------------------------------------------------------------

def _block_sums(values, downsample):
    side = values.shape[0]
    k = side // downsample
    out = np.empty((k, k), dtype=np.int64)
    rows = max(1, (1 << 22) // side // downsample) * downsample
    for j0 in range(0, side, rows):
        strip = np.asarray(values[j0:j0 + rows], dtype=np.int64)
        out[j0 // downsample:(j0 + len(strip)) // downsample] = strip.reshape(
            -1, downsample, k, downsample).sum(axis=(1, 3))
    return out


def field_image(f, downsample=1):
    """RGB image array (top row = largest second coordinate)."""
    side = f.side
    if downsample < 1 or downsample & (downsample - 1) or side % downsample:
        raise ValueError("downsample must be a power of two dividing the side")
    sums = _block_sums(f.values, downsample)
    scale = downsample * downsample * max(f.sup_norm, 1)
    img = np.empty(sums.shape + (3,), dtype=np.uint8)
    for ch in range(3):
        num = YELLOW[ch] * (scale - sums) + BLUE[ch] * (scale + sums)
        img[..., ch] = (num + scale) // (2 * scale)
    return img[::-1]


def render_field(f, path, downsample=1):
    """Write the field as a binary PPM: +1 blue, -1 yellow, averages blended."""
    img = field_image(f, downsample)
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


def read_ppm(path):
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6" or parts[2] != b"255":
        raise FormatError("not a binary PPM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
