"""Wedge shear flow maps acting on grid fields as exact cyclic rotations.

Pulling a field back through the horizontal time-``tau`` map gives
``g(i, j) = f(i - tau * d(j, w), j)``: row ``j`` is rotated towards higher
``i`` by ``tau * d(j, w)`` cells, where ``d`` is the torus distance on grid
indices and ``w`` the phase in grid units. Vertical maps do the same to
columns.
"""

import enum
from fractions import Fraction

import numpy as np

from . import _fallback, kernels
from .grid import Field, row_distances


class Direction(enum.Enum):
    HORIZONTAL = "H"
    VERTICAL = "V"

    @classmethod
    def parse(cls, text):
        text = str(text).strip().upper()
        for d in cls:
            if text in (d.value, d.name):
                return d
        raise ValueError(f"unknown direction {text!r}")

    @classmethod
    def for_block(cls, index):
        return cls.HORIZONTAL if index % 2 == 0 else cls.VERTICAL


def shear_shifts(side, phase, tau):
    """Per-row (or per-column) rotation amounts ``tau * d(., phase) mod side``."""
    if not 0 <= phase < side:
        raise ValueError(f"phase {phase} outside [0, {side})")
    return (int(tau) * row_distances(phase, side)) % side


def _backend_for(values):
    if values.dtype == np.int8 and values.flags.c_contiguous:
        return kernels
    return _fallback


def apply_flow_map(f, direction, phase, tau, out=None):
    """Pull ``f`` back through the time-``tau`` wedge map.

    ``out`` may be a preallocated array of the same shape and dtype (it must
    not alias ``f.values``). Returns a new :class:`Field`.
    """
    direction = Direction(direction)
    tau = int(tau)
    if tau == 0:
        return f.copy()
    shifts = shear_shifts(f.side, phase, tau)
    if out is None:
        out = np.empty_like(f.values)
    backend = _backend_for(f.values)
    if direction is Direction.HORIZONTAL:
        backend.shear_rows_bytes(f.values, out, shifts)
    else:
        backend.shear_cols_bytes(f.values, out, shifts)
    return Field(f.n_exp, out, f.sup_norm)


def unit_shear_step(f, direction, phase, out=None):
    """One unit of time of the wedge flow: ``apply_flow_map`` with ``tau=1``."""
    return apply_flow_map(f, direction, phase, 1, out=out)


def _torus_distance(x, y):
    d = (x - y) % 1
    return min(d, 1 - d)


def naive_pullback_oracle(f, direction, phase, tau):
    """Point-by-point evaluation of the pullback formula in exact rationals.

    Test oracle for :func:`apply_flow_map`; intended for small grids.
    """
    direction = Direction(direction)
    side = f.side
    omega = Fraction(phase, side)
    out = np.empty_like(f.values)
    for j in range(side):
        for i in range(side):
            x1, x2 = Fraction(i, side), Fraction(j, side)
            if direction is Direction.HORIZONTAL:
                src = ((x1 - tau * _torus_distance(x2, omega)) % 1, x2)
            else:
                src = (x1, (x2 - tau * _torus_distance(x1, omega)) % 1)
            si, sj = src[0] * side, src[1] * side
            assert si.denominator == 1 and sj.denominator == 1
            out[j, i] = f.values[int(sj), int(si)]
    return Field(f.n_exp, out, f.sup_norm)
