import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wedgemix.advection import Direction
from wedgemix.schedule import (GENERATOR_ID, Block, FlowType, ScheduleConfig, ScheduleGenerator,
                               blocks_for, derive_run_seed, fixed_blocks, step_directions)

H, V = Direction.HORIZONTAL, Direction.VERTICAL


def take(cfg, n):
    return list(itertools.islice(blocks_for(cfg), n))


def test_fsft_alternates_with_constant_phases():
    blocks = take(ScheduleConfig("FSFT", 8, 2, master_seed=3), 8)
    assert [(b.direction, b.duration) for b in blocks] == [(H, 2), (V, 2)] * 4
    assert len({b.phase for b in blocks[0::2]}) == 1
    assert len({b.phase for b in blocks[1::2]}) == 1


def test_rsrt_singleton_set_is_rsft():
    a = take(ScheduleConfig("RSRT", 8, 3, time_set=(3,), master_seed=9), 30)
    assert all(b.duration == 3 for b in a)
    assert len({b.phase for b in a}) > 20


def test_fsrt_same_seed_same_blocks():
    cfg = ScheduleConfig("FSRT", 10, 3, time_set=(2, 3, 4), master_seed=77)
    assert take(cfg, 50) == take(cfg, 50)
    assert take(cfg, 50) != take(cfg.with_run(1), 50)


def test_default_time_sets():
    assert ScheduleConfig("FSRT", 8, 3).time_set == (2, 3, 4)
    assert ScheduleConfig("RSRT", 8, 1).time_set == (1, 2)
    assert ScheduleConfig("RSFT", 8, 5).time_set == (5,)
    assert ScheduleConfig("RSRT", 8, 3, time_set=(4, 3, 4)).time_set == (3, 4)


def test_config_errors():
    with pytest.raises(ValueError):
        ScheduleConfig("FSFT", 8, 0)
    with pytest.raises(ValueError):
        ScheduleConfig("FSFT", 8, 3, time_set=(2, 3))
    with pytest.raises(ValueError):
        ScheduleConfig("RSRT", 8, 3, time_set=(0, 1))
    with pytest.raises(ValueError):
        ScheduleConfig("XXXX", 8, 3)
    with pytest.raises(ValueError):
        ScheduleConfig("FSFT", 31, 3)


def test_block_validates_alternation():
    Block(0, H, 0, 1)
    with pytest.raises(ValueError):
        Block(1, H, 0, 1)
    with pytest.raises(ValueError):
        Block(2, H, 0, 0)


@given(st.integers(0, 2**63), st.integers(0, 10**6))
def test_run_seeds_distinct_and_stable(master, run):
    assert derive_run_seed(master, run) == derive_run_seed(master, run)
    assert derive_run_seed(master, run) != derive_run_seed(master, run + 1)
    assert 0 <= derive_run_seed(master, run) < 2**64


def test_run_seed_frozen_value():
    # pins the documented derivation against accidental changes
    ss = np.random.SeedSequence(2024, spawn_key=(5,))
    assert derive_run_seed(2024, 5) == int(ss.generate_state(1, dtype=np.uint64)[0])
    assert GENERATOR_ID == "numpy-SeedSequence-PCG64-v1"


def test_first_phases_distinct_across_runs():
    base = ScheduleConfig("RSFT", 8, 3, master_seed=1)
    phases = [next(blocks_for(base.with_run(r))).phase for r in range(100)]
    collisions = 100 - len(set(phases))
    # expected pairs colliding among 100 draws from 256: about 19
    assert collisions <= 35


def test_phase_uniformity_chi_squared():
    gen = ScheduleGenerator(ScheduleConfig("RSRT", 4, 3, master_seed=11))
    blocks = [gen.next_block() for _ in range(16000)]
    phases = np.bincount([b.phase for b in blocks], minlength=16)
    durs = np.bincount([b.duration for b in blocks], minlength=5)[2:]
    chi_p = (((phases - 1000) ** 2) / 1000).sum()
    chi_d = (((durs - 16000 / 3) ** 2) / (16000 / 3)).sum()
    # 99.9% critical values: 37.7 for 15 dof, 13.8 for 2 dof
    assert chi_p < 37.7
    assert chi_d < 13.8


def test_draw_order_phase_then_duration():
    cfg = ScheduleConfig("RSRT", 8, 3, master_seed=5)
    rng = np.random.Generator(np.random.PCG64(cfg.run_seed()))
    want = []
    for k in range(4):
        ph = int(rng.integers(0, 256))
        dur = cfg.time_set[int(rng.integers(0, 3))]
        want.append((ph, dur))
    assert [(b.phase, b.duration) for b in take(cfg, 4)] == want


def test_fixed_phase_draw_order():
    cfg = ScheduleConfig("FSRT", 8, 3, master_seed=5)
    rng = np.random.Generator(np.random.PCG64(cfg.run_seed()))
    h, v = int(rng.integers(0, 256)), int(rng.integers(0, 256))
    b = take(cfg, 2)
    assert (b[0].phase, b[1].phase) == (h, v)


def test_fixed_blocks_and_steps():
    blocks = fixed_blocks(0, 0, 2, 4)
    assert [(b.direction, b.phase, b.duration) for b in blocks] == [(H, 0, 2), (V, 0, 2)] * 2
    steps = list(step_directions(blocks))
    assert steps == [(H, 0)] * 2 + [(V, 0)] * 2 + [(H, 0)] * 2 + [(V, 0)] * 2


def test_flow_type_flags():
    assert [(f.random_phase, f.random_time) for f in FlowType] == [
        (False, False), (True, False), (False, True), (True, True)]
