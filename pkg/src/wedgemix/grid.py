"""The dyadic grid on the torus, integer fields on it, and the initial datum.

A field on the ``2**n_exp x 2**n_exp`` grid is stored row-major as
``values[j, i]``: row ``j`` holds the points with second coordinate
``j / side``, so horizontal shears rotate contiguous rows. Use
:meth:`Field.value` for ``(i, j)`` point access.
"""

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

MAX_EXPONENT = 30


def check_exponent(n_exp):
    n_exp = int(n_exp)
    if not 1 <= n_exp <= MAX_EXPONENT:
        raise ValueError(f"grid exponent must be in [1, {MAX_EXPONENT}], got {n_exp}")
    return n_exp


@dataclass(eq=False)
class Field:
    """Integer scalar field on the grid G_N.

    Parameters
    ----------
    n_exp : int
        Grid exponent; the side length is ``2**n_exp``.
    values : ndarray
        Integer array of shape ``(side, side)`` indexed ``[j, i]``.
    sup_norm : int, optional
        Cached ``max |value|``; computed when omitted.
    """

    n_exp: int
    values: np.ndarray
    sup_norm: int = dc_field(default=None)

    def __post_init__(self):
        self.n_exp = check_exponent(self.n_exp)
        side = 1 << self.n_exp
        if self.values.shape != (side, side):
            raise ValueError(f"expected shape {(side, side)}, got {self.values.shape}")
        if not np.issubdtype(self.values.dtype, np.integer):
            raise TypeError("field values must be integers")
        if self.sup_norm is None:
            self.sup_norm = max(abs(int(self.values.max())), abs(int(self.values.min())))

    @property
    def side(self):
        return 1 << self.n_exp

    def value(self, i, j):
        """Value at grid point ``(i / side, j / side)``."""
        return int(self.values[j, i])

    def total(self):
        return int(self.values.sum(dtype=np.int64))

    def copy(self):
        return Field(self.n_exp, self.values.copy(), self.sup_norm)

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return self.n_exp == other.n_exp and np.array_equal(self.values, other.values)

    @classmethod
    def from_points(cls, n_exp, func, dtype=np.int64):
        """Build a field from ``func(i, j)`` evaluated at every grid point."""
        side = 1 << check_exponent(n_exp)
        vals = np.empty((side, side), dtype=dtype)
        for j in range(side):
            for i in range(side):
                vals[j, i] = func(i, j)
        return cls(n_exp, vals)


def make_initial_datum(n_exp):
    """+1 on the left half ``x1 < 1/2`` of the torus, -1 on the right half."""
    n_exp = check_exponent(n_exp)
    side = 1 << n_exp
    vals = np.full((side, side), -1, dtype=np.int8)
    vals[:, : side // 2] = 1
    return Field(n_exp, vals, 1)


def torus_grid_distance(a, b, side):
    """Distance between grid indices ``a`` and ``b`` on a cycle of length ``side``."""
    d = (a - b) % side
    return min(d, side - d)


def row_distances(w, side):
    """``torus_grid_distance(j, w, side)`` for every ``j`` as an int64 array."""
    d = (np.arange(side, dtype=np.int64) - w) % side
    return np.minimum(d, side - d)


def field_mean_and_supnorm(f):
    """Exact mean (a Fraction) and sup norm of a field."""
    return Fraction(f.total(), f.side * f.side), int(f.sup_norm)
