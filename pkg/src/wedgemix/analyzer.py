"""Dyadic geometric mixing scale via exact integer block sums.

A field is mixed at level ``n`` when every dyadic square of side
``2**-n`` has ``|block average| <= kappa * sup_norm``. All comparisons are
done on integer block sums, never on floating-point averages.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class DegenerateFieldError(ValueError):
    """The field is not even mixed at the coarsest level (nonzero mean)."""


@dataclass(frozen=True)
class Kappa:
    num: int = 1
    den: int = 3

    def __post_init__(self):
        if self.num <= 0 or self.den <= 0 or self.num >= self.den:
            raise ValueError(f"kappa must lie strictly between 0 and 1, got {self.num}/{self.den}")

    @classmethod
    def parse(cls, text):
        frac = Fraction(str(text).strip())
        return cls(frac.numerator, frac.denominator)

    def __str__(self):
        return f"{self.num}/{self.den}"


DEFAULT_KAPPA = Kappa()


@dataclass
class BlockSumPyramid:
    """Block sums of a field at every dyadic level.

    ``level_sums[n]`` has shape ``(2**n, 2**n)`` and is indexed ``[i, j]``
    like the squares ``S_n^{i,j}`` (first index along ``x1``).
    """

    n_exp: int
    level_sums: list

    def block_count(self, n):
        """Number of grid points in one square at level ``n``."""
        return 1 << (2 * (self.n_exp - n))


def build_pyramid(f):
    n_exp = f.n_exp
    # values are [j, i]; the pyramid is indexed [i, j]
    top = np.asarray(f.values, dtype=np.int64).T.copy()
    levels = [None] * (n_exp + 1)
    levels[n_exp] = top
    for n in range(n_exp - 1, -1, -1):
        child = levels[n + 1]
        k = 1 << n
        levels[n] = child.reshape(k, 2, k, 2).sum(axis=(1, 3))
    return BlockSumPyramid(n_exp, levels)


def _level_ok(sums, count, kappa, sup_norm):
    # den * |sum| <= num * sup * count, elementwise, in exact integers
    bound = kappa.num * sup_norm * count
    if bound >= 2**62 or np.abs(sums).max(initial=0) >= 2**62 // kappa.den:
        return all(kappa.den * abs(int(s)) <= bound for s in np.ravel(sums))
    return bool(np.all(kappa.den * np.abs(sums) <= bound))


def is_mixed_at_level(p, n, kappa=DEFAULT_KAPPA, sup_norm=1):
    if not 0 <= n <= p.n_exp:
        raise ValueError(f"level {n} outside [0, {p.n_exp}]")
    return _level_ok(p.level_sums[n], p.block_count(n), kappa, sup_norm)


def mixed_levels(p, kappa=DEFAULT_KAPPA, sup_norm=1):
    """List of booleans, one per level ``0..n_exp``."""
    return [is_mixed_at_level(p, n, kappa, sup_norm) for n in range(p.n_exp + 1)]


def exponent_from_flags(flags):
    """Largest mixed level given per-level flags; level 0 must be mixed."""
    if not flags[0]:
        raise DegenerateFieldError("field is not mixed at scale 1 (nonzero mean?)")
    return max(n for n, ok in enumerate(flags) if ok)


def mixing_scale_exponent(p, kappa=DEFAULT_KAPPA, sup_norm=1):
    """Exponent ``n*`` of the mixing scale ``2**-n*`` of the pyramid's field."""
    return exponent_from_flags(mixed_levels(p, kappa, sup_norm))


def field_mixing_exponent(f, kappa=DEFAULT_KAPPA):
    """Mixing-scale exponent of a :class:`~wedgemix.grid.Field`."""
    return mixing_scale_exponent(build_pyramid(f), kappa, f.sup_norm)


def popcount_bounds(m, kappa=DEFAULT_KAPPA):
    """Admissible count of +1 cells in a ``2**m`` square of a +-1 field.

    With ``c = 4**m`` cells and ``P`` of them equal to +1 the block sum is
    ``2P - c``; returns ``(lo, hi)`` with ``lo > hi`` when no count passes.
    """
    c = 1 << (2 * m)
    t = kappa.num * c // kappa.den
    return -((t - c) // 2), (c + t) // 2
