from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wedgemix.advection import Direction, apply_flow_map
from wedgemix.grid import Field
from wedgemix.verify import (TAU1_TRIPLE, TAU1_WORD, TAU2_PAIR_A, TAU2_PAIR_B, TAU2_WORD,
                             ExactPoint, NonDifferentiable, apply_word, default_suite,
                             exact_flow_map, jordan_check, orbit_jacobian, segment,
                             verify_segment_cycle, word)

H, V = Direction.HORIZONTAL, Direction.VERTICAL
fracs = st.fractions(min_value=0, max_value=1, max_denominator=1 << 12)


def test_flow_map_examples():
    assert exact_flow_map(ExactPoint(0, F(1, 4)), H, 0, 1) == ExactPoint(F(1, 4), F(1, 4))
    p = ExactPoint(F(3, 7), F(5, 9))
    assert exact_flow_map(p, V, F(1, 3), 0) == p


def test_three_cycle_point():
    p = ExactPoint(F(1, 8), F(5, 8))
    mid = exact_flow_map(p, H, 0, 1)
    assert mid == ExactPoint(F(1, 2), F(5, 8))
    q = apply_word(p, TAU1_WORD)
    assert q == ExactPoint(F(1, 2), F(1, 8))
    assert TAU1_TRIPLE[1].contains(q)
    assert apply_word(p, TAU1_WORD * 3) == p


def test_points_reduced_mod_one():
    assert ExactPoint(F(5, 4), -F(1, 4)) == ExactPoint(F(1, 4), F(3, 4))


def test_single_shear_jacobian():
    assert orbit_jacobian(ExactPoint(F(1, 4), F(1, 4)), word((H, 0, 1))) == ((1, 1), (0, 1))
    assert orbit_jacobian(ExactPoint(F(1, 4), F(3, 4)), word((H, 0, 2))) == ((1, -2), (0, 1))


@pytest.mark.parametrize("s", [F(1, 16), F(1, 8), F(3, 16), F(1, 5)])
def test_tau2_jacobian_along_segment(s):
    jac = orbit_jacobian(ExactPoint(s, s + F(3, 4)), TAU2_WORD * 2)
    assert jac == ((-3, 4), (-4, 5))


@pytest.mark.parametrize("s", [F(1, 16), F(1, 8), F(3, 8)])
def test_tau1_jacobians_on_both_sides(s):
    eps = F(1, 1024)
    above = orbit_jacobian(ExactPoint(s, s + F(1, 2) + eps), TAU1_WORD * 3)
    below = orbit_jacobian(ExactPoint(s, s + F(1, 2) - eps), TAU1_WORD * 3)
    assert {above, below} == {((3, -2), (2, -1)), ((-1, 2), (-2, 3))}


def test_kink_raises():
    with pytest.raises(NonDifferentiable):
        orbit_jacobian(ExactPoint(F(1, 8), F(1, 2)), word((H, 0, 1)))
    with pytest.raises(NonDifferentiable):
        orbit_jacobian(ExactPoint(F(1, 3), F(1, 8)), word((V, F(1, 3), 1)))


@pytest.mark.parametrize("m", [((-3, 4), (-4, 5)), ((3, -2), (2, -1)), ((-1, 2), (-2, 3))])
def test_jordan_on_displayed_matrices(m):
    rep = jordan_check(m)
    assert rep.det == 1 and rep.trace == 2 and not rep.identity
    assert rep.unipotent_jordan and rep.fixes_diagonal


def test_jordan_edge_cases():
    ident = jordan_check(((1, 0), (0, 1)))
    assert ident.identity and not ident.unipotent_jordan
    shear = jordan_check(((1, 1), (0, 1)))
    assert shear.unipotent_jordan and not shear.fixes_diagonal


@pytest.mark.parametrize("segs,w", [(TAU2_PAIR_A, TAU2_WORD), (TAU2_PAIR_B, TAU2_WORD),
                                    (TAU1_TRIPLE, TAU1_WORD)])
def test_cycles_hold(segs, w):
    rep = verify_segment_cycle(segs, w, 16)
    assert rep.ok, rep.failures
    # every segment stays on a single branch pattern
    assert all(len(p) == 1 for p in rep.branch_patterns)


def test_cycle_failure_reported():
    rep = verify_segment_cycle(TAU2_PAIR_A, TAU1_WORD, 4)
    assert not rep.ok
    assert "segment 0" in rep.failures[0]


def test_segment_validation_and_contains():
    with pytest.raises(ValueError):
        segment(0, 0, 0, 0, 0, 1)
    with pytest.raises(ValueError):
        segment(0, 0, 1, 1, F(1, 2), F(1, 2))
    seg = segment(0, F(3, 4), 1, 1, 0, F(1, 4))
    assert seg.contains(ExactPoint(F(1, 8), F(7, 8)))
    assert not seg.contains(ExactPoint(F(1, 8), F(3, 4)))
    assert not seg.contains(ExactPoint(F(3, 8), F(1, 8)))
    with pytest.raises(ValueError):
        verify_segment_cycle([seg], TAU2_WORD, 0)
    with pytest.raises(ValueError):
        word()


@given(fracs, fracs, st.sampled_from([H, V]), fracs, st.integers(-6, 6))
def test_inverse_word_is_identity(x1, x2, d, w, tau):
    p = ExactPoint(x1, x2)
    assert apply_word(p, word((d, w, tau), (d, w, -tau))) == p


@given(fracs, fracs, st.lists(st.tuples(st.sampled_from([H, V]), fracs, st.integers(-4, 4)),
                               min_size=2, max_size=8), st.integers(1, 7))
def test_chain_rule_and_unit_determinant(x1, x2, steps, cut):
    p = ExactPoint(x1, x2)
    steps = word(*steps)
    cut = min(cut, len(steps) - 1)
    try:
        whole = orbit_jacobian(p, steps)
        first = orbit_jacobian(p, steps[:cut])
        second = orbit_jacobian(apply_word(p, steps[:cut]), steps[cut:])
    except NonDifferentiable:
        return
    prod = tuple(tuple(sum(second[r][k] * first[k][c] for k in range(2)) for c in range(2))
                 for r in range(2))
    assert whole == prod
    assert jordan_check(whole).det == 1


@pytest.mark.parametrize("n_exp", [2, 3, 4, 5, 6])
def test_agrees_with_grid_engine(n_exp):
    side = 1 << n_exp
    rng = np.random.default_rng(n_exp)
    labels = np.arange(side * side, dtype=np.int64).reshape(side, side)
    f = Field(n_exp, labels)
    phases = range(side) if n_exp <= 4 else rng.integers(0, side, 6)
    for d in (H, V):
        for w in phases:
            for tau in (-3, 1, 2):
                g = apply_flow_map(f, d, int(w), tau).values
                for j in range(side):
                    for i in range(side):
                        q = exact_flow_map(ExactPoint(F(i, side), F(j, side)), d,
                                           F(int(w), side), tau)
                        # the label of (i, j) is carried to its image point
                        assert g[int(q.x2 * side), int(q.x1 * side)] == labels[j, i]


def test_default_suite_passes_quickly():
    import time
    t0 = time.perf_counter()
    results = default_suite(16)
    assert time.perf_counter() - t0 < 1.0
    assert [r.ok for r in results] == [True] * 5
    text = "\n".join(line for r in results for line in r.lines)
    for m in ("[[-3, 4], [-4, 5]]", "[[3, -2], [2, -1]]", "[[-1, 2], [-2, 3]]"):
        assert m in text
