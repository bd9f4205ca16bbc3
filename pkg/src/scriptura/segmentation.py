"""Character over-segmentation of word images.

Two segmenters produce the small ink pieces the transcription lattice is
built from. ``over_segment`` cuts at local minima of the column ink
profile. ``polygonal_segment`` works per connected component, cutting
along straight lines that join upper-contour valleys to lower-contour
peaks, so touching characters can still come apart.

Segments carry boolean masks in the word's coordinate frame. Both
segmenters partition the ink exactly: masks are disjoint and their union
is the input ink.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import EmptyImageError
from .kernels import label_components

__all__ = [
    "Segment",
    "Contour",
    "ink_profile",
    "plateau_minima",
    "plateau_maxima",
    "over_segment",
    "contours",
    "polygonal_segment",
    "group_image",
]

CONTOUR_SMOOTH_WINDOW = 3


@dataclass(frozen=True)
class Segment:
    """One ink piece: a mask over the word frame plus its column extent."""

    id: int
    left: int
    right: int  # exclusive
    centroid_x: int
    mask: np.ndarray

    @property
    def ink_count(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class Contour:
    """Smoothed top and bottom ink rows of one component, per column.

    Arrays run over the component's column range ``first_col`` onward and
    are defined only where the component has ink (every column in range,
    since 8-connected components span contiguous columns).
    """

    first_col: int
    upper: np.ndarray
    lower: np.ndarray


def ink_profile(word: np.ndarray) -> np.ndarray:
    """Ink count per column."""
    return word.sum(axis=0, dtype=np.int64)


def _plateau_runs(values: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of equal values as half-open (start, stop) pairs."""
    n = len(values)
    runs = []
    start = 0
    for i in range(1, n + 1):
        if i == n or values[i] != values[start]:
            runs.append((start, i))
            start = i
    return runs


def plateau_minima(values: np.ndarray) -> list[int]:
    """Leftmost index of each interior plateau bounded by strictly larger values."""
    n = len(values)
    out = []
    for start, stop in _plateau_runs(values):
        if start == 0 or stop == n:
            continue
        if values[start - 1] > values[start] and values[stop] > values[start]:
            out.append(start)
    return out


def plateau_maxima(values: np.ndarray) -> list[int]:
    """Leftmost index of each interior plateau bounded by strictly smaller values."""
    n = len(values)
    out = []
    for start, stop in _plateau_runs(values):
        if start == 0 or stop == n:
            continue
        if values[start - 1] < values[start] and values[stop] < values[start]:
            out.append(start)
    return out


def _centroid_x(mask: np.ndarray) -> int:
    xs = np.nonzero(mask)[1]
    return int(np.floor(xs.mean()))


def _make_segment(seg_id: int, mask: np.ndarray) -> Segment:
    cols = np.flatnonzero(mask.any(axis=0))
    return Segment(
        id=seg_id,
        left=int(cols[0]),
        right=int(cols[-1]) + 1,
        centroid_x=_centroid_x(mask),
        mask=mask,
    )


def over_segment(word: np.ndarray) -> list[Segment]:
    """Cut the word at interior local minima of its column ink profile.

    Plateau minima cut at their leftmost column. Boundary columns open a
    new segment, so cuts at columns b1 < b2 < ... give column spans
    [0, b1), [b1, b2) and so on.
    """
    if not word.any():
        raise EmptyImageError("cannot segment a blank word")
    profile = ink_profile(word)
    bounds = plateau_minima(profile)
    edges = [0] + bounds + [word.shape[1]]
    segments: list[Segment] = []
    for a, b in zip(edges[:-1], edges[1:]):
        mask = np.zeros_like(word, dtype=bool)
        mask[:, a:b] = word[:, a:b] > 0
        if mask.any():
            segments.append(_make_segment(len(segments), mask))
    return segments


def _smooth(values: np.ndarray, window: int = CONTOUR_SMOOTH_WINDOW) -> np.ndarray:
    """Centered moving average, window truncated at the ends."""
    n = len(values)
    half = window // 2
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out[i] = values[lo:hi].sum() / (hi - lo)
    return out


def contours(mask: np.ndarray) -> Contour:
    """Smoothed upper and lower contour rows of a single component mask."""
    cols = np.flatnonzero(mask.any(axis=0))
    if cols.size == 0:
        raise EmptyImageError("component mask has no ink")
    first, last = int(cols[0]), int(cols[-1])
    sub = mask[:, first : last + 1]
    h = sub.shape[0]
    upper = np.argmax(sub, axis=0).astype(np.int64)
    lower = (h - 1 - np.argmax(sub[::-1, :], axis=0)).astype(np.int64)
    return Contour(first, _smooth(upper), _smooth(lower))


def _cut_lines(mask: np.ndarray) -> list[tuple[float, float, float, float]]:
    """Straight cut lines for one component, ordered left to right.

    Candidate cut columns are where the upper contour dips lowest (row
    maxima of the smoothed upper contour) and where the lower contour
    rises highest (row minima of the smoothed lower contour). Each upper
    candidate connects to the nearest lower candidate, ties going left.
    """
    ct = contours(mask)
    upper_cuts = plateau_maxima(ct.upper)
    lower_cuts = plateau_minima(ct.lower)
    if not upper_cuts or not lower_cuts:
        return []
    lines = []
    for u in upper_cuts:
        l = min(lower_cuts, key=lambda c: (abs(c - u), c))
        lines.append(
            (
                float(u + ct.first_col),
                float(ct.upper[u]),
                float(l + ct.first_col),
                float(ct.lower[l]),
            )
        )
    lines.sort(key=lambda ln: (ln[0], ln[2]))
    return lines


def _left_of_line(line, xs, ys):
    """Side test: True where pixels fall left of the line or exactly on it."""
    x1, y1, x2, y2 = line
    dx = x2 - x1
    dy = y2 - y1
    if dy == 0.0:
        # Degenerate (point or horizontal) line: treat as vertical at x1.
        return xs <= x1
    cross = dx * (ys - y1) - dy * (xs - x1)
    return cross >= 0.0 if dy > 0.0 else cross <= 0.0


def polygonal_segment(word: np.ndarray) -> list[Segment]:
    """Per-component contour cutting; the fine-grained segmenter.

    Within each 8-connected component, cut lines partition the ink by a
    left-to-right sweep: a pixel belongs to the first line that keeps it
    on the left (pixels exactly on a line go left), and past the last
    line to the final region. Components with no candidate cuts stay
    whole. Segments from all components are merged and ordered by
    centroid, then leftmost column, then topmost row.
    """
    if not word.any():
        raise EmptyImageError("cannot segment a blank word")
    labels, count = label_components(word)
    masks: list[np.ndarray] = []
    for comp in range(1, count + 1):
        mask = labels == comp
        lines = _cut_lines(mask)
        if not lines:
            masks.append(mask)
            continue
        ys, xs = np.nonzero(mask)
        region = np.full(len(xs), len(lines), dtype=np.int64)
        for j in reversed(range(len(lines))):
            region[_left_of_line(lines[j], xs, ys)] = j
        for r in range(len(lines) + 1):
            sel = region == r
            if not sel.any():
                continue
            piece = np.zeros_like(mask)
            piece[ys[sel], xs[sel]] = True
            masks.append(piece)
    keyed = sorted(
        (_make_segment(0, m) for m in masks),
        key=lambda s: (s.centroid_x, s.left, int(np.nonzero(s.mask)[0].min())),
    )
    return [
        Segment(i, s.left, s.right, s.centroid_x, s.mask) for i, s in enumerate(keyed)
    ]


def group_image(segments: list[Segment]) -> np.ndarray:
    """Union of a contiguous segment run, cropped to its bounding box."""
    if not segments:
        raise ValueError("group needs at least one segment")
    ids = [s.id for s in segments]
    if ids != list(range(ids[0], ids[0] + len(ids))):
        raise ValueError("group must be a contiguous run of segments")
    union = np.zeros_like(segments[0].mask, dtype=bool)
    for seg in segments:
        union |= seg.mask
    ys, xs = np.nonzero(union)
    return union[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1].astype(np.uint8)
