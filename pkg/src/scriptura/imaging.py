"""Page preprocessing: binarization, cropping, geometry fixes, line and word extraction.

Grayscale images are 2D uint8 arrays (0 = black). Binary images are 2D
uint8 arrays with ink = 1 and background = 0; ink is whatever falls on
the dark side of the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import label_components, rotate_nn, shear_rows

__all__ = [
    "EmptyImageError",
    "WordImage",
    "otsu_threshold",
    "binarize",
    "ink_bbox",
    "crop_margins",
    "remove_specks",
    "deskew",
    "deslant",
    "split_lines",
    "split_words",
    "load_gray",
    "load_binary_png",
    "save_binary_png",
]

DESKEW_RANGE_DEG = 5.0
DESKEW_STEP_DEG = 0.1
DESLANT_RANGE_DEG = 30.0
DESLANT_STEP_DEG = 1.0
MIN_COMPONENT_PX = 4


class EmptyImageError(ValueError):
    """Raised when an operation needs ink and the image has none."""


@dataclass(frozen=True)
class WordImage:
    """A margin-cropped binary word image with its position on the page."""

    image: np.ndarray
    page_id: str
    line_index: int
    word_index: int

    @property
    def word_id(self) -> str:
        return f"{self.page_id}_{self.line_index:03d}_{self.word_index:03d}"

    @property
    def width(self) -> int:
        return int(self.image.shape[1])


def otsu_threshold(gray: np.ndarray) -> int:
    """Threshold maximizing between-class variance; smallest maximizer wins.

    Pixels strictly below the returned value count as ink. A uniform image
    yields threshold 0, which marks nothing as ink.
    """
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    if total == 0:
        raise EmptyImageError("cannot threshold a zero-size image")
    # Class 0 holds intensities < t for each candidate t in 0..255.
    w0 = np.concatenate(([0.0], np.cumsum(hist)[:-1]))
    w1 = total - w0
    levels = np.arange(256, dtype=np.float64)
    sum0 = np.concatenate(([0.0], np.cumsum(hist * levels)[:-1]))
    sum_all = float((hist * levels).sum())
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(w0 > 0, sum0 / w0, 0.0)
        mu1 = np.where(w1 > 0, (sum_all - sum0) / w1, 0.0)
    variance = w0 * w1 * (mu0 - mu1) ** 2
    return int(np.argmax(variance))


def binarize(gray: np.ndarray) -> np.ndarray:
    """Binarize with Otsu's threshold, darker pixels becoming ink.

    A uniform image produces an all-background result, which downstream
    steps treat as the empty-page flag.
    """
    threshold = otsu_threshold(gray)
    return (gray < threshold).astype(np.uint8)


def ink_bbox(bits: np.ndarray) -> tuple[int, int, int, int]:
    """Inclusive bounding box (top, bottom, left, right) of the ink."""
    rows = np.flatnonzero(bits.any(axis=1))
    if rows.size == 0:
        raise EmptyImageError("image contains no ink")
    cols = np.flatnonzero(bits.any(axis=0))
    return int(rows[0]), int(rows[-1]), int(cols[0]), int(cols[-1])


def crop_margins(bits: np.ndarray) -> np.ndarray:
    """Crop to the ink bounding box. Raises :class:`EmptyImageError` on blank input."""
    top, bottom, left, right = ink_bbox(bits)
    return bits[top : bottom + 1, left : right + 1].copy()


def remove_specks(bits: np.ndarray, min_size: int = MIN_COMPONENT_PX) -> np.ndarray:
    """Drop 8-connected components smaller than ``min_size`` pixels.

    Line splitting relies on strictly blank rows, so stray specks must go
    before it runs.
    """
    labels, count = label_components(bits)
    if count == 0:
        return bits.copy()
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    keep = sizes >= min_size
    keep[0] = False
    return keep[labels].astype(np.uint8)


def _row_profile_variance(bits: np.ndarray) -> float:
    """Deskew objective: variance of per-row ink counts over the ink extent."""
    try:
        cropped = crop_margins(bits)
    except EmptyImageError:
        return -1.0
    return float(np.var(cropped.sum(axis=1)))


def deskew(
    bits: np.ndarray,
    max_degrees: float = DESKEW_RANGE_DEG,
    step: float = DESKEW_STEP_DEG,
) -> tuple[np.ndarray, float]:
    """Straighten a page by the rotation maximizing the row-profile variance.

    Candidate angles span the symmetric range in fixed steps. The 0 angle
    is the baseline; another angle is taken only on a strict improvement,
    earlier (more negative) candidates winning ties between themselves.
    Returns the rotated image cropped to its margins and the chosen angle.
    """
    steps = int(round(max_degrees / step))
    best_angle = 0.0
    best_score = _row_profile_variance(bits)
    for k in range(-steps, steps + 1):
        angle = k * step
        if angle == 0.0:
            continue
        score = _row_profile_variance(rotate_nn(bits, angle))
        if score > best_score:
            best_score = score
            best_angle = angle
    rotated = bits.copy() if best_angle == 0.0 else rotate_nn(bits, best_angle)
    return crop_margins(rotated), best_angle


def _column_sq_sum(bits: np.ndarray) -> int:
    """Deslant objective: sum of squared per-column ink counts."""
    sums = bits.sum(axis=0, dtype=np.int64)
    return int((sums * sums).sum())


def deslant(
    bits: np.ndarray,
    max_degrees: float = DESLANT_RANGE_DEG,
    step: float = DESLANT_STEP_DEG,
) -> tuple[np.ndarray, float]:
    """Remove slant with the shear maximizing the squared column profile.

    Same search scheme as :func:`deskew`: symmetric angle grid, strict
    improvement over the 0 baseline. Returns the cropped sheared image
    and the chosen angle.
    """
    steps = int(round(max_degrees / step))
    best_angle = 0.0
    best_score = _column_sq_sum(bits)
    for k in range(-steps, steps + 1):
        angle = k * step
        if angle == 0.0:
            continue
        score = _column_sq_sum(shear_rows(bits, angle))
        if score > best_score:
            best_score = score
            best_angle = angle
    sheared = bits.copy() if best_angle == 0.0 else shear_rows(bits, best_angle)
    return crop_margins(sheared), best_angle


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as half-open (start, stop) pairs."""
    padded = np.concatenate(([False], mask, [False]))
    diff = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(diff == 1)
    stops = np.flatnonzero(diff == -1)
    return list(zip(starts.tolist(), stops.tolist()))


def split_lines(page: np.ndarray) -> list[np.ndarray]:
    """Split a page at blank rows into cropped line images, top to bottom."""
    inked = page.any(axis=1)
    return [crop_margins(page[a:b]) for a, b in _runs(inked)]


def split_words(
    line: np.ndarray,
    gap: int = 7,
    page_id: str = "",
    line_index: int = 0,
) -> list[WordImage]:
    """Split a line into words at blank column runs of at least ``gap``.

    Shorter blank runs stay inside a word; every piece is margin-cropped.
    """
    if gap < 1:
        raise ValueError("gap must be at least 1")
    blank = ~line.any(axis=0)
    separators = [(a, b) for a, b in _runs(blank) if b - a >= gap]
    words: list[WordImage] = []
    start = 0
    for a, b in separators + [(line.shape[1], line.shape[1])]:
        piece = line[:, start:a]
        if piece.any():
            words.append(
                WordImage(crop_margins(piece), page_id, line_index, len(words))
            )
        start = b
    return words


# ---------------------------------------------------------------------------
# PNG input and output

def load_gray(path) -> np.ndarray:
    """Load any PIL-readable image as 8-bit grayscale."""
    from PIL import Image

    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def load_binary_png(path) -> np.ndarray:
    """Load a bitonal PNG; pixels below mid-gray count as ink."""
    return (load_gray(path) < 128).astype(np.uint8)


def save_binary_png(bits: np.ndarray, path) -> None:
    """Write a binary image as a 1-bit PNG with ink rendered black."""
    from PIL import Image

    arr = np.where(bits > 0, 0, 255).astype(np.uint8)
    Image.fromarray(arr, "L").convert("1", dither=Image.NONE).save(path)
