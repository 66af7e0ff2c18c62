from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wedgemix.grid import (MAX_EXPONENT, Field, check_exponent, field_mean_and_supnorm,
                           make_initial_datum, torus_grid_distance)


def test_initial_datum_one_bit():
    f = make_initial_datum(1)
    # values[j, i]: column 0 is +1, column 1 is -1
    assert f.values.tolist() == [[1, -1], [1, -1]]


def test_initial_datum_point_lookup():
    f = make_initial_datum(2)
    assert f.value(1, 3) == 1
    assert f.value(2, 0) == -1


@pytest.mark.parametrize("n_exp", [1, 2, 5, 10])
def test_initial_datum_balanced(n_exp):
    f = make_initial_datum(n_exp)
    assert f.total() == 0
    assert f.sup_norm == 1
    assert np.count_nonzero(f.values == 1) == np.count_nonzero(f.values == -1)


def test_initial_datum_full_size_sum():
    f = make_initial_datum(15)
    assert f.values.shape == (1 << 15, 1 << 15)
    assert f.total() == 0


@pytest.mark.parametrize("a,b,side,d", [(0, 0, 8, 0), (3, 0, 8, 3), (6, 0, 8, 2), (4, 0, 8, 4)])
def test_torus_grid_distance_examples(a, b, side, d):
    assert torus_grid_distance(a, b, side) == d


@given(st.integers(1, 12).flatmap(
    lambda n: st.tuples(st.just(1 << n), st.integers(0, (1 << n) - 1), st.integers(0, (1 << n) - 1))))
def test_torus_grid_distance_symmetric_bounded(args):
    side, a, b = args
    d = torus_grid_distance(a, b, side)
    assert d == torus_grid_distance(b, a, side)
    assert 0 <= d <= side // 2


def test_mean_and_supnorm_examples():
    assert field_mean_and_supnorm(make_initial_datum(4)) == (0, 1)
    assert field_mean_and_supnorm(Field(3, np.zeros((8, 8), dtype=np.int8))) == (0, 0)
    f = Field(1, np.array([[1, 1], [1, -1]], dtype=np.int8))
    mean, sup = field_mean_and_supnorm(f)
    assert mean == Fraction(1, 2) and isinstance(mean, Fraction)
    assert sup == 1


def test_exponent_range():
    assert check_exponent(1) == 1
    assert check_exponent(MAX_EXPONENT) == MAX_EXPONENT
    for bad in (0, MAX_EXPONENT + 1, -3):
        with pytest.raises(ValueError):
            check_exponent(bad)


def test_field_shape_checked():
    with pytest.raises(ValueError):
        Field(2, np.zeros((4, 3), dtype=np.int8))


def test_field_equality_is_exact():
    a = make_initial_datum(3)
    b = a.copy()
    assert a == b
    b.values[0, 0] = -1
    assert a != b


def test_from_points_matches_lookup():
    f = Field.from_points(3, lambda i, j: i - 2 * j)
    assert f.value(5, 1) == 3
    assert f.values[1, 5] == 3
