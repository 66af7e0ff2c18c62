"""Alternating horizontal/vertical block schedules for the four flow types.

A schedule is a lazy sequence of :class:`Block` records. Even blocks are
horizontal, odd blocks vertical. Phases are grid units in ``[0, 2**n_exp)``;
durations are positive integers. Randomness comes from a numpy ``PCG64``
generator seeded per run through ``SeedSequence``, and a schedule log (see
:mod:`wedgemix.io`) replays a run independently of the generator.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .advection import Direction
from .grid import check_exponent

GENERATOR_ID = "numpy-SeedSequence-PCG64-v1"


class FlowType(enum.Enum):
    FSFT = "FSFT"
    RSFT = "RSFT"
    FSRT = "FSRT"
    RSRT = "RSRT"

    @property
    def random_phase(self):
        return self.value[0] == "R"

    @property
    def random_time(self):
        return self.value[2] == "R"


@dataclass(frozen=True)
class Block:
    index: int
    direction: Direction
    phase: int
    duration: int

    def __post_init__(self):
        if self.index < 0 or self.duration < 1:
            raise ValueError(f"invalid block {self}")
        if self.direction is not Direction.for_block(self.index):
            raise ValueError(f"block {self.index} must be {Direction.for_block(self.index).name}")


@dataclass
class ScheduleConfig:
    """What determines a schedule: flow type, grid, times and seeds.

    ``time_set`` defaults to ``{tau - 1, tau, tau + 1}`` for random-time
    flows (dropping values below 1) and to ``{tau}`` otherwise.
    """

    flow_type: FlowType
    n_exp: int = 15
    tau: int = 3
    time_set: tuple = None
    master_seed: int = 0
    run_index: int = 0

    def __post_init__(self):
        self.flow_type = FlowType(self.flow_type)
        self.n_exp = check_exponent(self.n_exp)
        self.tau = int(self.tau)
        if self.tau < 1:
            raise ValueError("tau must be at least 1")
        if self.time_set is None:
            if self.flow_type.random_time:
                self.time_set = tuple(t for t in (self.tau - 1, self.tau, self.tau + 1) if t >= 1)
            else:
                self.time_set = (self.tau,)
        self.time_set = tuple(sorted({int(t) for t in self.time_set}))
        if not self.time_set or self.time_set[0] < 1:
            raise ValueError("time_set must be a nonempty set of positive integers")
        if not self.flow_type.random_time and self.time_set != (self.tau,):
            raise ValueError(f"{self.flow_type.value} uses the fixed time tau; drop time_set")

    def run_seed(self):
        return derive_run_seed(self.master_seed, self.run_index)

    def with_run(self, run_index):
        return ScheduleConfig(self.flow_type, self.n_exp, self.tau, self.time_set,
                              self.master_seed, run_index)


def derive_run_seed(master_seed, run_index):
    """64-bit stream seed for one run: ``SeedSequence(master, spawn_key=(run,))``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(run_index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ScheduleGenerator:
    """Lazily draws blocks for one run.

    Fixed phases are drawn at construction (horizontal first). Per block,
    a random phase is drawn before a random duration.
    """

    config: ScheduleConfig
    _rng: np.random.Generator = field(init=False, repr=False)
    _fixed: tuple = field(init=False, default=None)
    _next: int = field(init=False, default=0)

    def __post_init__(self):
        self._rng = np.random.Generator(np.random.PCG64(self.config.run_seed()))
        if not self.config.flow_type.random_phase:
            self._fixed = (self._draw_phase(), self._draw_phase())

    def _draw_phase(self):
        return int(self._rng.integers(0, 1 << self.config.n_exp))

    def next_block(self):
        cfg = self.config
        k = self._next
        if cfg.flow_type.random_phase:
            phase = self._draw_phase()
        else:
            phase = self._fixed[k % 2]
        if cfg.flow_type.random_time:
            duration = cfg.time_set[int(self._rng.integers(0, len(cfg.time_set)))]
        else:
            duration = cfg.tau
        self._next += 1
        return Block(k, Direction.for_block(k), phase, duration)

    def __iter__(self):
        while True:
            yield self.next_block()


def blocks_for(config):
    """Infinite block iterator for ``config``."""
    return iter(ScheduleGenerator(config))


def fixed_blocks(h_phase, v_phase, tau, count):
    """A deterministic FSFT-style block list, e.g. for ``(V_0^2 H_0^2)^4``."""
    return [Block(k, Direction.for_block(k), (h_phase, v_phase)[k % 2], tau) for k in range(count)]


def step_directions(blocks):
    """Expand blocks into per-unit-time ``(direction, phase)`` steps."""
    for b in blocks:
        for _ in range(b.duration):
            yield b.direction, b.phase
