"""Hot numeric kernels, each with a jitted loop form and a numpy form.

Every public function dispatches to one of two implementations chosen at
import time (see :mod:`scriptura.accel`). Both forms compute bit-identical
results; the parity is covered by tests and the benchmark script.

Images are 2D uint8 arrays with ink pixels equal to 1 and background 0.
"""

from __future__ import annotations

import math

import numpy as np

from .accel import NUMBA_ENABLED, jit

__all__ = [
    "rotate_nn",
    "shear_rows",
    "shear_shifts",
    "label_components",
    "levenshtein_codes",
]


# ---------------------------------------------------------------------------
# nearest-neighbor rotation

def _rotate_core_loop(bits, out_h, out_w, cos_t, sin_t, cx, cy, ocx, ocy):
    h, w = bits.shape
    out = np.zeros((out_h, out_w), np.uint8)
    for r in range(out_h):
        dy = r - ocy
        for c in range(out_w):
            dx = c - ocx
            sx = cos_t * dx + sin_t * dy + cx
            sy = -sin_t * dx + cos_t * dy + cy
            ix = int(math.floor(sx + 0.5))
            iy = int(math.floor(sy + 0.5))
            if 0 <= ix < w and 0 <= iy < h:
                out[r, c] = bits[iy, ix]
    return out


_rotate_core_jit = jit(_rotate_core_loop)


def _rotate_core_numpy(bits, out_h, out_w, cos_t, sin_t, cx, cy, ocx, ocy):
    h, w = bits.shape
    dy = np.arange(out_h, dtype=np.float64)[:, None] - ocy
    dx = np.arange(out_w, dtype=np.float64)[None, :] - ocx
    sx = cos_t * dx + sin_t * dy + cx
    sy = -sin_t * dx + cos_t * dy + cy
    ix = np.floor(sx + 0.5).astype(np.int64)
    iy = np.floor(sy + 0.5).astype(np.int64)
    valid = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    out = np.zeros((out_h, out_w), np.uint8)
    out[valid] = bits[iy[valid], ix[valid]]
    return out


def _rotate_canvas(h: int, w: int, cos_t: float, sin_t: float) -> tuple[int, int]:
    ac, as_ = abs(cos_t), abs(sin_t)
    out_w = max(1, int(math.ceil(w * ac + h * as_)))
    out_h = max(1, int(math.ceil(h * ac + w * as_)))
    return out_h, out_w


def rotate_nn(bits: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate a binary image by ``degrees`` with nearest-neighbor sampling.

    The canvas grows to hold the rotated bounding box; uncovered output
    pixels are background.
    """
    if degrees == 0.0:
        return bits.copy()
    rad = math.radians(degrees)
    cos_t, sin_t = math.cos(rad), math.sin(rad)
    h, w = bits.shape
    out_h, out_w = _rotate_canvas(h, w, cos_t, sin_t)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    ocx, ocy = (out_w - 1) / 2.0, (out_h - 1) / 2.0
    core = _rotate_core_jit if NUMBA_ENABLED else _rotate_core_numpy
    return core(np.ascontiguousarray(bits), out_h, out_w, cos_t, sin_t, cx, cy, ocx, ocy)


# ---------------------------------------------------------------------------
# horizontal shear by integer per-row shifts

def shear_shifts(height: int, degrees: float) -> np.ndarray:
    """Integer column shift per row for a shear of ``degrees`` about the center row."""
    t = math.tan(math.radians(degrees))
    cy = (height - 1) / 2.0
    return np.rint(t * (np.arange(height) - cy)).astype(np.int64)


def _shear_core_loop(bits, shifts, base, out_w):
    h, w = bits.shape
    out = np.zeros((h, out_w), np.uint8)
    for r in range(h):
        off = shifts[r] + base
        for c in range(w):
            out[r, off + c] = bits[r, c]
    return out


_shear_core_jit = jit(_shear_core_loop)


def _shear_core_numpy(bits, shifts, base, out_w):
    h, w = bits.shape
    out = np.zeros((h, out_w), np.uint8)
    cols = np.arange(w)[None, :] + (shifts + base)[:, None]
    rows = np.broadcast_to(np.arange(h)[:, None], cols.shape)
    out[rows, cols] = bits
    return out


def shear_rows(bits: np.ndarray, degrees: float) -> np.ndarray:
    """Shear a binary image horizontally; each row shifts by a whole pixel count.

    Row-wise integer shifts make the operation an exact permutation, so ink
    counts are preserved and shearing by the opposite angle undoes it up to
    the padded margins.
    """
    h, w = bits.shape
    shifts = shear_shifts(h, degrees)
    base = int(-shifts.min())
    out_w = w + int(shifts.max() - shifts.min())
    core = _shear_core_jit if NUMBA_ENABLED else _shear_core_numpy
    return core(np.ascontiguousarray(bits), shifts, base, out_w)


# ---------------------------------------------------------------------------
# 8-connected components

def _label_core_loop(bits):
    h, w = bits.shape
    labels = np.zeros((h, w), np.int32)
    stack = np.empty(h * w, np.int64)
    count = 0
    for y0 in range(h):
        for x0 in range(w):
            if bits[y0, x0] != 0 and labels[y0, x0] == 0:
                count += 1
                labels[y0, x0] = count
                stack[0] = y0 * w + x0
                top = 1
                while top > 0:
                    top -= 1
                    p = stack[top]
                    y = p // w
                    x = p % w
                    for dy in range(-1, 2):
                        for dx in range(-1, 2):
                            ny = y + dy
                            nx = x + dx
                            if 0 <= ny < h and 0 <= nx < w:
                                if bits[ny, nx] != 0 and labels[ny, nx] == 0:
                                    labels[ny, nx] = count
                                    stack[top] = ny * w + nx
                                    top += 1
    return labels, count


_label_core_jit = jit(_label_core_loop)


def _canonicalize(labels: np.ndarray, count: int) -> tuple[np.ndarray, int]:
    # Renumber so label k's first pixel precedes label k+1's in scan order.
    if count == 0:
        return labels, 0
    flat = labels.ravel()
    idx = np.flatnonzero(flat)
    first = np.full(count + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat[idx], idx)
    order = np.argsort(first[1:], kind="stable")
    remap = np.zeros(count + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, count + 1, dtype=np.int32)
    return remap[labels], count


def _label_core_scipy(bits):
    from scipy import ndimage

    labels, count = ndimage.label(bits, structure=np.ones((3, 3), dtype=bool))
    return _canonicalize(labels.astype(np.int32), int(count))


def label_components(bits: np.ndarray) -> tuple[np.ndarray, int]:
    """Label 8-connected ink components.

    Returns ``(labels, count)`` with labels 1..count assigned in scan order
    of each component's first pixel.
    """
    if NUMBA_ENABLED:
        return _label_core_jit(np.ascontiguousarray(bits))
    return _label_core_scipy(bits)


# ---------------------------------------------------------------------------
# edit distance over integer code arrays

def _levenshtein_loop(a, b):
    na, nb = a.shape[0], b.shape[0]
    prev = np.arange(nb + 1, dtype=np.int64)
    cur = np.empty(nb + 1, dtype=np.int64)
    for i in range(1, na + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, nb + 1):
            cost = 0 if ai == b[j - 1] else 1
            best = prev[j - 1] + cost
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return prev[nb]


_levenshtein_jit = jit(_levenshtein_loop)


def _levenshtein_numpy(a, b):
    na, nb = a.shape[0], b.shape[0]
    ar = np.arange(nb + 1, dtype=np.int64)
    prev = ar.copy()
    for i in range(1, na + 1):
        cur = np.empty(nb + 1, dtype=np.int64)
        cur[0] = i
        cur[1:] = np.minimum(prev[:-1] + (b != a[i - 1]), prev[1:] + 1)
        # Insertions chain left to right, resolved with a running minimum.
        cur = np.minimum.accumulate(cur - ar) + ar
        prev = cur
    return int(prev[nb])


def levenshtein_codes(a: np.ndarray, b: np.ndarray) -> int:
    """Edit distance between two int32 code arrays (unit costs)."""
    if a.shape[0] == 0:
        return int(b.shape[0])
    if b.shape[0] == 0:
        return int(a.shape[0])
    if NUMBA_ENABLED:
        return int(_levenshtein_jit(a, b))
    return _levenshtein_numpy(a, b)
