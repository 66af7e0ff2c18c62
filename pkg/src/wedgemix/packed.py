"""Bit-packed +-1 fields for large-grid simulation.

One bit per cell (set means +1), rows packed into uint64 words. Vertical
shears are handled by keeping the field transposed while a vertical block
runs, so every shear is a contiguous row rotation. The dyadic mixing scale
is invariant under transposition, so it can be read off either orientation.
"""

import numpy as np

from . import kernels
from .advection import Direction, shear_shifts
from .analyzer import DEFAULT_KAPPA, exponent_from_flags, popcount_bounds
from .grid import Field, check_exponent

MIN_PACKED_EXPONENT = 6
_SCAN_LEVELS = 6


class PackedField:
    """A +-1 field stored as ``uint64[side, side // 64]``.

    When ``transposed`` is false, storage row ``j`` holds the cells with
    second coordinate ``j``; when true, storage row ``i`` holds the cells
    with first coordinate ``i``.
    """

    def __init__(self, n_exp, words, transposed=False):
        self.n_exp = check_exponent(n_exp)
        if self.n_exp < MIN_PACKED_EXPONENT:
            raise ValueError(f"packed fields need n_exp >= {MIN_PACKED_EXPONENT}")
        side = 1 << self.n_exp
        if words.shape != (side, side // 64) or words.dtype != np.uint64:
            raise ValueError("bad packed word array")
        self.words = words
        self.transposed = transposed
        self._scratch = None

    @property
    def side(self):
        return 1 << self.n_exp

    @classmethod
    def initial(cls, n_exp):
        """The half-plus, half-minus initial datum, packed directly."""
        n_exp = check_exponent(n_exp)
        if n_exp < MIN_PACKED_EXPONENT:
            raise ValueError(f"packed fields need n_exp >= {MIN_PACKED_EXPONENT}")
        side = 1 << n_exp
        words = np.zeros((side, side // 64), dtype=np.uint64)
        half = side // 2
        words[:, : half // 64] = np.uint64(0xFFFFFFFFFFFFFFFF)
        if half % 64:
            # side 64: the +1 half is the low 32 bits of the only word
            words[:, half // 64] = np.uint64((1 << (half % 64)) - 1)
        return cls(n_exp, words)

    @classmethod
    def from_field(cls, f):
        side = f.side
        words = np.empty((side, side // 64), dtype=np.uint64)
        for j0 in range(0, side, 1024):
            rows = f.values[j0:j0 + 1024]
            if np.any((rows != 1) & (rows != -1)):
                raise ValueError("packed fields hold +-1 values only")
            bits = np.packbits(rows > 0, axis=1, bitorder="little")
            words[j0:j0 + 1024] = bits.view("<u8")
        return cls(f.n_exp, words)

    def to_field(self):
        side = self.side
        words = self._oriented(False)
        vals = np.empty((side, side), dtype=np.int8)
        for j0 in range(0, side, 1024):
            bits = np.unpackbits(
                np.ascontiguousarray(words[j0:j0 + 1024]).astype("<u8", copy=False).view(np.uint8),
                axis=1, bitorder="little",
            )
            vals[j0:j0 + 1024] = 2 * bits.astype(np.int8) - 1
        return Field(self.n_exp, vals, 1)

    def _buffer(self):
        if self._scratch is None:
            self._scratch = np.empty_like(self.words)
        return self._scratch

    def _swap(self, new):
        self._scratch, self.words = self.words, new

    def _oriented(self, transposed):
        if self.transposed == transposed:
            return self.words
        out = np.empty_like(self.words)
        kernels.transpose_packed(self.words, out)
        return out

    def set_orientation(self, transposed):
        if self.transposed != transposed:
            buf = self._buffer()
            kernels.transpose_packed(self.words, buf)
            self._swap(buf)
            self.transposed = transposed

    def apply(self, direction, phase, tau=1):
        """Pull the field back through a wedge map, in place."""
        direction = Direction(direction)
        tau = int(tau)
        if tau == 0:
            return self
        self.set_orientation(direction is Direction.VERTICAL)
        buf = self._buffer()
        kernels.shear_rows_packed(self.words, buf, shear_shifts(self.side, phase, tau))
        self._swap(buf)
        return self

    def total(self):
        ones = int(np.bitwise_count(self.words).sum(dtype=np.int64)) if hasattr(np, "bitwise_count") \
            else int(np.unpackbits(self.words.view(np.uint8)).sum(dtype=np.int64))
        return 2 * ones - self.side * self.side

    def mixed_levels(self, kappa=DEFAULT_KAPPA):
        """Per-level mixed flags for levels ``0..n_exp`` (sup norm is 1)."""
        n_exp = self.n_exp
        side = self.side
        bounds = [popcount_bounds(m, kappa) for m in range(_SCAN_LEVELS)]
        lo = [b[0] for b in bounds]
        hi = [b[1] for b in bounds]
        counts = np.empty((side // 64, side // 64), dtype=np.int64)
        fine = kernels.packed_level_scan(self.words, lo, hi, counts)
        flags = [False] * (n_exp + 1)
        # single cells: |+-1| <= kappa never holds
        flags[n_exp] = False
        for m in range(1, _SCAN_LEVELS):
            flags[n_exp - m] = bool(fine[m])
        sums = 2 * counts - (1 << (2 * _SCAN_LEVELS))
        for n in range(n_exp - _SCAN_LEVELS, -1, -1):
            cells = 1 << (2 * (n_exp - n))
            flags[n] = bool(np.all(kappa.den * np.abs(sums) <= kappa.num * cells))
            if n:
                k = 1 << (n - 1)
                sums = sums.reshape(k, 2, k, 2).sum(axis=(1, 3))
        return flags

    def mixing_exponent(self, kappa=DEFAULT_KAPPA):
        return exponent_from_flags(self.mixed_levels(kappa))
