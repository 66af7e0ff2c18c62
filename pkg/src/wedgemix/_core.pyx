# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for grid shears and mixing-level scans.

Byte fields are ``int8[side, side]`` arrays indexed ``[row j, column i]``.
Packed fields are ``uint64[side, side // 64]``; cell ``i`` of a row lives in
word ``i >> 6`` at bit ``i & 63`` (bit set means +1).

Every function here has a numpy twin in ``_fallback.py`` with the same
signature; the two are checked against each other in the test suite.
"""

from libc.stdint cimport int8_t, int64_t, uint64_t
from libc.string cimport memcpy

import numpy as np


cdef extern from *:
    int popcount64 "__builtin_popcountll"(unsigned long long) nogil


cdef uint64_t M1 = 0x5555555555555555ULL
cdef uint64_t M2 = 0x3333333333333333ULL
cdef uint64_t M4 = 0x0F0F0F0F0F0F0F0FULL
cdef uint64_t M8 = 0x00FF00FF00FF00FFULL
cdef uint64_t M16 = 0x0000FFFF0000FFFFULL

cdef uint64_t H4 = 0x8888888888888888ULL
cdef uint64_t H8 = 0x8080808080808080ULL
cdef uint64_t H16 = 0x8000800080008000ULL
cdef uint64_t H32 = 0x8000000080000000ULL

cdef uint64_t R4 = 0x1111111111111111ULL
cdef uint64_t R8 = 0x0101010101010101ULL
cdef uint64_t R16 = 0x0001000100010001ULL
cdef uint64_t R32 = 0x0000000100000001ULL

BACKEND = "cython"


def shear_rows_bytes(const int8_t[:, ::1] src, int8_t[:, ::1] dst,
                     const int64_t[::1] shifts):
    """dst[j, i] = src[j, (i - shifts[j]) mod side]."""
    cdef Py_ssize_t rows = src.shape[0], side = src.shape[1]
    cdef Py_ssize_t j, s
    if dst.shape[0] != rows or dst.shape[1] != side or shifts.shape[0] != rows:
        raise ValueError("shape mismatch")
    with nogil:
        for j in range(rows):
            s = shifts[j] % side
            if s < 0:
                s += side
            memcpy(&dst[j, s], &src[j, 0], side - s)
            if s:
                memcpy(&dst[j, 0], &src[j, side - s], s)


def shear_cols_bytes(const int8_t[:, ::1] src, int8_t[:, ::1] dst,
                     const int64_t[::1] shifts):
    """dst[j, i] = src[(j - shifts[i]) mod side, i]."""
    cdef Py_ssize_t side = src.shape[0], width = src.shape[1]
    cdef Py_ssize_t i, i0, i1, j, r
    cdef int64_t[::1] s = np.empty(width, dtype=np.int64)
    if dst.shape[0] != side or dst.shape[1] != width or shifts.shape[0] != width:
        raise ValueError("shape mismatch")
    with nogil:
        for i in range(width):
            s[i] = shifts[i] % side
            if s[i] < 0:
                s[i] += side
        # 64-column tiles keep the diagonal read pattern inside cache
        i0 = 0
        while i0 < width:
            i1 = i0 + 64
            if i1 > width:
                i1 = width
            for j in range(side):
                for i in range(i0, i1):
                    r = j - s[i]
                    if r < 0:
                        r += side
                    dst[j, i] = src[r, i]
            i0 = i1


def shear_rows_packed(const uint64_t[:, ::1] src, uint64_t[:, ::1] dst,
                      const int64_t[::1] shifts):
    """Rotate every packed row j towards higher cell indices by shifts[j]."""
    cdef Py_ssize_t rows = src.shape[0], nw = src.shape[1]
    cdef Py_ssize_t side = nw * 64
    cdef Py_ssize_t j, k, q, r, s, a, b
    if dst.shape[0] != rows or dst.shape[1] != nw or shifts.shape[0] != rows:
        raise ValueError("shape mismatch")
    with nogil:
        for j in range(rows):
            s = shifts[j] % side
            if s < 0:
                s += side
            q = s >> 6
            r = s & 63
            if r == 0:
                for k in range(nw):
                    a = k - q
                    if a < 0:
                        a += nw
                    dst[j, k] = src[j, a]
            else:
                for k in range(nw):
                    a = k - q
                    if a < 0:
                        a += nw
                    b = a - 1
                    if b < 0:
                        b += nw
                    dst[j, k] = (src[j, a] << r) | (src[j, b] >> (64 - r))


cdef inline void _swap_stage(uint64_t* a, int j, uint64_t m) noexcept nogil:
    cdef int k0, k
    cdef uint64_t t
    k0 = 0
    while k0 < 64:
        for k in range(k0, k0 + j):
            t = ((a[k] >> j) ^ a[k + j]) & m
            a[k + j] ^= t
            a[k] ^= t << j
        k0 += 2 * j


cdef inline void _transpose64(uint64_t* a) noexcept nogil:
    # recursive block swap: a[r] bit c <-> a[c] bit r
    _swap_stage(a, 32, 0x00000000FFFFFFFFULL)
    _swap_stage(a, 16, 0x0000FFFF0000FFFFULL)
    _swap_stage(a, 8, 0x00FF00FF00FF00FFULL)
    _swap_stage(a, 4, 0x0F0F0F0F0F0F0F0FULL)
    _swap_stage(a, 2, 0x3333333333333333ULL)
    _swap_stage(a, 1, 0x5555555555555555ULL)


def transpose_packed(const uint64_t[:, ::1] src, uint64_t[:, ::1] dst):
    """dst cell (row x, column y) = src cell (row y, column x)."""
    cdef Py_ssize_t side = src.shape[0], nw = src.shape[1]
    cdef Py_ssize_t by, bx, r
    cdef uint64_t buf[64]
    if nw * 64 != side or dst.shape[0] != side or dst.shape[1] != nw:
        raise ValueError("packed transpose needs a square side x side/64 array")
    with nogil:
        # one 64-row output strip at a time: writes stay inside 64 lines,
        # strided reads are served from the outer cache levels
        for bx in range(nw):
            for by in range(nw):
                for r in range(64):
                    buf[r] = src[by * 64 + r, bx]
                _transpose64(buf)
                for r in range(64):
                    dst[bx * 64 + r, by] = buf[r]


cdef inline bint _fields_in(uint64_t acc, uint64_t hmask, uint64_t lo,
                            uint64_t hi) noexcept nogil:
    # Every field of acc lies in [lo, hi]; fields are below half their range.
    cdef uint64_t ge = ((acc | hmask) - lo) & hmask
    cdef uint64_t le = ((hi | hmask) - acc) & hmask
    return (ge & le) == hmask


def packed_level_scan(const uint64_t[:, ::1] src, lo, hi, int64_t[:, ::1] counts):
    """Scan the five finest dyadic levels of a packed +-1 field.

    ``lo[m]``/``hi[m]`` give the admissible popcount range for a block of
    side ``2**m`` (m = 1..5; a range with lo > hi marks a level that can
    never pass). Returns a list ``ok`` with ``ok[m]`` true iff every block
    of side ``2**m`` has its popcount inside the range, and fills ``counts``
    with the popcounts of the 64x64 blocks.
    """
    cdef Py_ssize_t side = src.shape[0], nw = src.shape[1]
    cdef Py_ssize_t sy, c, r, row
    cdef uint64_t x, p2, p4, p8, p16, p32
    cdef uint64_t a1a = 0, a1b = 0, a2a = 0, a2b = 0, a3 = 0, a4 = 0, a5 = 0
    cdef int64_t a6
    cdef bint alive1, alive2, alive3, alive4, alive5
    cdef uint64_t lo1, hi1, lo2, hi2, lo3, hi3, lo4, hi4, lo5, hi5
    if side % 64 or nw * 64 != side:
        raise ValueError("packed scan needs side >= 64")
    if counts.shape[0] != side // 64 or counts.shape[1] != nw:
        raise ValueError("counts has the wrong shape")
    alive1 = lo[1] <= hi[1]
    alive2 = lo[2] <= hi[2]
    alive3 = lo[3] <= hi[3]
    alive4 = lo[4] <= hi[4]
    alive5 = lo[5] <= hi[5]
    lo1 = R4 * <uint64_t>max(lo[1], 0)
    hi1 = R4 * <uint64_t>min(max(hi[1], 0), 4)
    lo2 = R8 * <uint64_t>max(lo[2], 0)
    hi2 = R8 * <uint64_t>min(max(hi[2], 0), 16)
    lo3 = R8 * <uint64_t>max(lo[3], 0)
    hi3 = R8 * <uint64_t>min(max(hi[3], 0), 64)
    lo4 = R16 * <uint64_t>max(lo[4], 0)
    hi4 = R16 * <uint64_t>min(max(hi[4], 0), 256)
    lo5 = R32 * <uint64_t>max(lo[5], 0)
    hi5 = R32 * <uint64_t>min(max(hi[5], 0), 1024)
    with nogil:
        for sy in range(side // 64):
            for c in range(nw):
                a6 = 0
                for r in range(64):
                    x = src[sy * 64 + r, c]
                    a6 += popcount64(x)
                    if not (alive1 or alive2 or alive3 or alive4 or alive5):
                        continue
                    p2 = x - ((x >> 1) & M1)
                    if alive1:
                        a1a += p2 & M2
                        a1b += (p2 >> 2) & M2
                        if r & 1:
                            if not (_fields_in(a1a, H4, lo1, hi1)
                                    and _fields_in(a1b, H4, lo1, hi1)):
                                alive1 = False
                            a1a = 0
                            a1b = 0
                    p4 = (p2 & M2) + ((p2 >> 2) & M2)
                    if alive2:
                        a2a += p4 & M4
                        a2b += (p4 >> 4) & M4
                        if (r & 3) == 3:
                            if not (_fields_in(a2a, H8, lo2, hi2)
                                    and _fields_in(a2b, H8, lo2, hi2)):
                                alive2 = False
                            a2a = 0
                            a2b = 0
                    p8 = (p4 + (p4 >> 4)) & M4
                    if alive3:
                        a3 += p8
                        if (r & 7) == 7:
                            if not _fields_in(a3, H8, lo3, hi3):
                                alive3 = False
                            a3 = 0
                    p16 = (p8 + (p8 >> 8)) & M8
                    if alive4:
                        a4 += p16
                        if (r & 15) == 15:
                            if not _fields_in(a4, H16, lo4, hi4):
                                alive4 = False
                            a4 = 0
                    if alive5:
                        p32 = (p16 + (p16 >> 16)) & M16
                        a5 += p32
                        if (r & 31) == 31:
                            if not _fields_in(a5, H32, lo5, hi5):
                                alive5 = False
                            a5 = 0
                counts[sy, c] = a6
    return [True, bool(alive1), bool(alive2), bool(alive3), bool(alive4), bool(alive5)]
