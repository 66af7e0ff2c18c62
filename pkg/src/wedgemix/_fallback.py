"""Pure numpy versions of the kernels in ``_core.pyx``.

Same signatures and layouts as the compiled module. Work is done in row
strips so memory stays bounded at large grid sizes, but these are meant for
correctness and portability, not speed.
"""

import numpy as np

BACKEND = "numpy"

_STRIP = 256


def shear_rows_bytes(src, dst, shifts):
    """dst[j, i] = src[j, (i - shifts[j]) mod side]."""
    rows, side = src.shape
    if dst.shape != src.shape or len(shifts) != rows:
        raise ValueError("shape mismatch")
    cols = np.arange(side, dtype=np.int64)
    for j0 in range(0, rows, _STRIP):
        j1 = min(j0 + _STRIP, rows)
        idx = (cols[None, :] - np.asarray(shifts[j0:j1])[:, None]) % side
        dst[j0:j1] = np.take_along_axis(np.asarray(src[j0:j1]), idx, axis=1)


def shear_cols_bytes(src, dst, shifts):
    """dst[j, i] = src[(j - shifts[i]) mod side, i]."""
    side, width = src.shape
    if dst.shape != src.shape or len(shifts) != width:
        raise ValueError("shape mismatch")
    src = np.asarray(src)
    shifts = np.asarray(shifts, dtype=np.int64)
    cols = np.arange(width)
    for j0 in range(0, side, _STRIP):
        j1 = min(j0 + _STRIP, side)
        rows = (np.arange(j0, j1, dtype=np.int64)[:, None] - shifts[None, :]) % side
        dst[j0:j1] = src[rows, cols[None, :]]


def shear_rows_packed(src, dst, shifts):
    """Rotate every packed row j towards higher cell indices by shifts[j]."""
    rows, nw = src.shape
    side = nw * 64
    if dst.shape != src.shape or len(shifts) != rows:
        raise ValueError("shape mismatch")
    src = np.asarray(src)
    words = np.arange(nw, dtype=np.int64)
    for j0 in range(0, rows, _STRIP):
        j1 = min(j0 + _STRIP, rows)
        s = np.asarray(shifts[j0:j1], dtype=np.int64) % side
        q = (s >> 6)[:, None]
        r = (s & 63).astype(np.uint64)[:, None]
        block = src[j0:j1]
        a = np.take_along_axis(block, (words[None, :] - q) % nw, axis=1)
        b = np.take_along_axis(block, (words[None, :] - q - 1) % nw, axis=1)
        # numpy shifts by 64 are undefined, so the r == 0 rows are patched
        low = np.where(r == 0, np.uint64(0), b >> (np.uint64(64) - np.maximum(r, np.uint64(1))))
        dst[j0:j1] = (a << r) | low


def _unpack_rows(words):
    # (rows, nw) uint64 -> (rows, nw * 64) uint8 bits, cell i at column i
    as_bytes = np.ascontiguousarray(words).astype("<u8", copy=False).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")


def _pack_rows(bits):
    packed = np.packbits(np.ascontiguousarray(bits, dtype=np.uint8), axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def transpose_packed(src, dst):
    """dst cell (row x, column y) = src cell (row y, column x)."""
    side, nw = src.shape
    if nw * 64 != side or dst.shape != src.shape:
        raise ValueError("packed transpose needs a square side x side/64 array")
    for by in range(nw):
        bits = _unpack_rows(np.asarray(src[by * 64:(by + 1) * 64]))
        dst[:, by] = _pack_rows(bits.T)[:, 0]


def packed_level_scan(src, lo, hi, counts):
    """Numpy twin of the compiled scan; see ``_core.packed_level_scan``."""
    side, nw = src.shape
    if side % 64 or nw * 64 != side:
        raise ValueError("packed scan needs side >= 64")
    if counts.shape != (side // 64, nw):
        raise ValueError("counts has the wrong shape")
    ok = [True] + [lo[m] <= hi[m] for m in range(1, 6)]
    for sy in range(side // 64):
        bits = _unpack_rows(np.asarray(src[sy * 64:(sy + 1) * 64])).astype(np.int64)
        for m in range(1, 7):
            b = 1 << m
            sums = bits.reshape(64 // b, b, side // b, b).sum(axis=(1, 3))
            if m == 6:
                counts[sy, :] = sums[0]
            elif ok[m]:
                ok[m] = bool(np.all((sums >= lo[m]) & (sums <= hi[m])))
    return ok
