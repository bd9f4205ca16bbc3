"""Character classification over a fixed 23-class symbol alphabet.

Classes are 22 letter shapes plus one non-character class for ink
groups that are not a single letter. Two letter shapes may share a
transcription character (tall and round d both read as "d"), which is
why classes carry both a shape name and a text character.

Classifiers consume binary images of any size; inputs are normalized to
a 56 by 56 frame first. The reference model is multinomial logistic
regression on the raw normalized pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .imaging import EmptyImageError

__all__ = [
    "NON_CHARACTER",
    "SAMPLE_SIDE",
    "SymbolAlphabet",
    "LabeledSample",
    "validate_distribution",
    "normalize_sample",
    "transform_sample",
    "augment",
    "balance_training_set",
    "LogisticClassifier",
    "train_reference",
    "TableClassifier",
    "image_hash",
    "save_classifier",
    "load_classifier",
    "write_manifest",
    "load_manifest",
]

NON_CHARACTER = "non-character"
SAMPLE_SIDE = 56
N_FEATURES = SAMPLE_SIDE * SAMPLE_SIDE + 1  # raw pixels plus a bias term

AUGMENT_ROTATION_DEG = 5.0
AUGMENT_ZOOM = 0.1
AUGMENT_SHEAR = 0.1
AUGMENT_SHIFT_PX = 3.0
AUGMENT_MAX_RETRIES = 10

_DEFAULT_CLASSES: tuple[tuple[str, str], ...] = (
    ("a", "a"),
    ("b", "b"),
    ("c", "c"),
    ("d", "d"),
    ("d-tall", "d"),
    ("e", "e"),
    ("f", "f"),
    ("g", "g"),
    ("h", "h"),
    ("i", "i"),
    ("l", "l"),
    ("m", "m"),
    ("n", "n"),
    ("o", "o"),
    ("p", "p"),
    ("q", "q"),
    ("r", "r"),
    ("s", "s"),
    ("s-long", "s"),
    ("t", "t"),
    ("u", "u"),
    ("x", "x"),
    (NON_CHARACTER, ""),
)

DISTRIBUTION_ATOL = 1e-9


@dataclass(frozen=True)
class SymbolAlphabet:
    """Ordered class list: shape names paired with transcription characters."""

    names: tuple[str, ...]
    chars: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.names) != len(self.chars):
            raise ValueError("names and chars must align")
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")
        if self.names.count(NON_CHARACTER) != 1:
            raise ValueError("exactly one non-character class is required")
        for name, char in zip(self.names, self.chars):
            if (name == NON_CHARACTER) != (char == ""):
                raise ValueError("only the non-character class may lack a character")

    @classmethod
    def default(cls) -> "SymbolAlphabet":
        names, chars = zip(*_DEFAULT_CLASSES)
        return cls(names, chars)

    @classmethod
    def from_file(cls, path) -> "SymbolAlphabet":
        with open(path, encoding="utf-8") as fh:
            rows = json.load(fh)
        return cls(
            tuple(r["name"] for r in rows),
            tuple(r["char"] for r in rows),
        )

    def to_file(self, path) -> None:
        rows = [{"name": n, "char": c} for n, c in zip(self.names, self.chars)]
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, ensure_ascii=False, indent=1)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def non_char_index(self) -> int:
        return self.names.index(NON_CHARACTER)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown class name {name!r}") from None

    def text_chars(self) -> str:
        """Distinct transcription characters, sorted."""
        return "".join(sorted({c for c in self.chars if c}))


@dataclass(frozen=True)
class LabeledSample:
    """A normalized training image with its class index and provenance."""

    image: np.ndarray
    label: int
    origin: str = "seed"  # seed | augmented | crowd


def validate_distribution(probs: np.ndarray, n_classes: int) -> None:
    """Check a class distribution: correct size, non-negative, sums to one."""
    probs = np.asarray(probs)
    if probs.shape != (n_classes,):
        raise ValueError(f"distribution must have {n_classes} entries")
    if (probs < 0).any():
        raise ValueError("distribution has negative entries")
    if abs(float(probs.sum()) - 1.0) > DISTRIBUTION_ATOL:
        raise ValueError("distribution does not sum to 1")


# ---------------------------------------------------------------------------
# geometry normalization

def _box_weights(n_in: int, n_out: int) -> np.ndarray:
    """Overlap lengths between output cells and input pixels along one axis."""
    weights = np.zeros((n_out, n_in), dtype=np.float64)
    scale = n_in / n_out
    for j in range(n_out):
        lo = j * scale
        hi = (j + 1) * scale
        k0 = int(np.floor(lo))
        k1 = min(n_in, int(np.ceil(hi)))
        for k in range(k0, k1):
            weights[j, k] = min(hi, k + 1) - max(lo, k)
    return weights


def _area_resample(bits: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Exact box-filter resampling; returns the ink fraction per output cell."""
    h, w = bits.shape
    wy = _box_weights(h, out_h)
    wx = _box_weights(w, out_w)
    integral = wy @ bits.astype(np.float64) @ wx.T
    cell_area = (h / out_h) * (w / out_w)
    return integral / cell_area


def normalize_sample(bits: np.ndarray, side: int = SAMPLE_SIDE) -> np.ndarray:
    """Scale into a ``side`` square preserving aspect, centered on padding.

    Resampling is an exact box filter re-binarized by majority, ties
    counting as ink. Already-square inputs of the target size pass
    through unchanged.
    """
    if not bits.any():
        raise EmptyImageError("cannot normalize a blank sample")
    h, w = bits.shape
    scale = min(side / w, side / h)
    new_w = max(1, min(side, round(w * scale)))
    new_h = max(1, min(side, round(h * scale)))
    scaled = (_area_resample(bits, new_h, new_w) >= 0.5).astype(np.uint8)
    out = np.zeros((side, side), dtype=np.uint8)
    top = (side - new_h) // 2
    left = (side - new_w) // 2
    out[top : top + new_h, left : left + new_w] = scaled
    return out


def transform_sample(
    bits: np.ndarray,
    rotation_deg: float = 0.0,
    zoom: float = 1.0,
    shear: float = 0.0,
    shift_x: float = 0.0,
    shift_y: float = 0.0,
) -> np.ndarray:
    """Affine warp about the center with nearest-neighbor sampling.

    The frame size is preserved. Identity parameters reproduce the input
    exactly.
    """
    h, w = bits.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rad = np.radians(rotation_deg)
    cos_t, sin_t = np.cos(rad), np.sin(rad)
    # Forward map: rotate, zoom, shear, then shift. Sampling inverts it.
    fwd = np.array(
        [[cos_t, -sin_t], [sin_t, cos_t]]
    ) @ (zoom * np.array([[1.0, shear], [0.0, 1.0]]))
    inv = np.linalg.inv(fwd)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    dx = xs - cx - shift_x
    dy = ys - cy - shift_y
    sx = inv[0, 0] * dx + inv[0, 1] * dy + cx
    sy = inv[1, 0] * dx + inv[1, 1] * dy + cy
    ix = np.floor(sx + 0.5).astype(np.int64)
    iy = np.floor(sy + 0.5).astype(np.int64)
    valid = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    out = np.zeros_like(bits)
    out[valid] = bits[iy[valid], ix[valid]]
    return out


def augment(sample: LabeledSample, rng: np.random.Generator) -> LabeledSample:
    """Random small warp of a sample: rotation, zoom, shear, shift.

    Draws are retried (up to a small bound) if every ink pixel falls off
    the frame.
    """
    for _ in range(AUGMENT_MAX_RETRIES):
        out = transform_sample(
            sample.image,
            rotation_deg=rng.uniform(-AUGMENT_ROTATION_DEG, AUGMENT_ROTATION_DEG),
            zoom=rng.uniform(1.0 - AUGMENT_ZOOM, 1.0 + AUGMENT_ZOOM),
            shear=rng.uniform(-AUGMENT_SHEAR, AUGMENT_SHEAR),
            shift_x=rng.uniform(-AUGMENT_SHIFT_PX, AUGMENT_SHIFT_PX),
            shift_y=rng.uniform(-AUGMENT_SHIFT_PX, AUGMENT_SHIFT_PX),
        )
        if out.any():
            return LabeledSample(out, sample.label, origin="augmented")
    raise ValueError("augmentation emptied the sample repeatedly")


def balance_training_set(
    samples: list[LabeledSample],
    alphabet: SymbolAlphabet,
    target: int = 1000,
    rng: np.random.Generator | None = None,
) -> list[LabeledSample]:
    """Equalize class counts: subsample the frequent, augment the rare.

    Every class must be represented by at least one sample. The result
    holds exactly ``target`` samples per class, grouped by class order.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    by_class: dict[int, list[LabeledSample]] = {i: [] for i in range(len(alphabet))}
    for s in samples:
        by_class[s.label].append(s)
    out: list[LabeledSample] = []
    for idx in range(len(alphabet)):
        pool = by_class[idx]
        if not pool:
            raise ValueError(f"class {alphabet.names[idx]!r} has no samples")
        if len(pool) > target:
            chosen = rng.choice(len(pool), size=target, replace=False)
            out.extend(pool[int(k)] for k in chosen)
        else:
            out.extend(pool)
            for _ in range(target - len(pool)):
                out.append(augment(pool[int(rng.integers(len(pool)))], rng))
    return out


# ---------------------------------------------------------------------------
# reference model: multinomial logistic regression

def _features(image: np.ndarray) -> np.ndarray:
    flat = image.reshape(-1).astype(np.float64)
    return np.concatenate([flat, [1.0]])


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class LogisticClassifier:
    """Softmax regression over raw normalized pixels."""

    alphabet: SymbolAlphabet
    weights: np.ndarray  # (N_FEATURES, n_classes)

    def classify(self, bits: np.ndarray) -> np.ndarray:
        """Class distribution for a binary image of any size."""
        x = _features(normalize_sample(bits))
        return _softmax(x @ self.weights)

    def classify_normalized(self, image: np.ndarray) -> np.ndarray:
        return _softmax(_features(image) @ self.weights)


def train_reference(
    samples: list[LabeledSample],
    alphabet: SymbolAlphabet,
    epochs: int = 30,
    learning_rate: float = 0.5,
    batch_size: int = 128,
    rng: np.random.Generator | None = None,
) -> LogisticClassifier:
    """Train the reference classifier with mini-batch gradient descent.

    The shuffle order is the only randomness, so a fixed generator seed
    reproduces the weights bit for bit.
    """
    if not samples:
        raise ValueError("no training samples")
    rng = rng if rng is not None else np.random.default_rng(0)
    n_classes = len(alphabet)
    x = np.stack([_features(s.image) for s in samples])
    y = np.zeros((len(samples), n_classes), dtype=np.float64)
    for i, s in enumerate(samples):
        if not 0 <= s.label < n_classes:
            raise ValueError(f"label {s.label} outside the alphabet")
        y[i, s.label] = 1.0
    weights = np.zeros((x.shape[1], n_classes), dtype=np.float64)
    for _ in range(epochs):
        order = rng.permutation(len(samples))
        for start in range(0, len(samples), batch_size):
            batch = order[start : start + batch_size]
            xb, yb = x[batch], y[batch]
            probs = _softmax(xb @ weights)
            grad = xb.T @ (probs - yb) / len(batch)
            weights -= learning_rate * grad
    return LogisticClassifier(alphabet, weights)


# ---------------------------------------------------------------------------
# hash-table classifier for fixtures and replayable runs

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def image_hash(bits: np.ndarray) -> int:
    """64-bit FNV-1a over the image dimensions and row-major 0/1 bytes."""
    h, w = bits.shape
    data = (
        int(w).to_bytes(4, "little")
        + int(h).to_bytes(4, "little")
        + (bits > 0).astype(np.uint8).tobytes()
    )
    acc = FNV_OFFSET
    for byte in data:
        acc = ((acc ^ byte) * FNV_PRIME) & _U64
    return acc


@dataclass
class TableClassifier:
    """Maps exact image hashes to stored distributions; unknowns get the fallback."""

    alphabet: SymbolAlphabet
    table: dict[int, np.ndarray]
    fallback: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.alphabet)
        for dist in self.table.values():
            validate_distribution(dist, n)
        validate_distribution(self.fallback, n)

    def classify(self, bits: np.ndarray) -> np.ndarray:
        return self.table.get(image_hash(bits), self.fallback).copy()


# ---------------------------------------------------------------------------
# model file format

_MODEL_MAGIC = b"scriptura-classifier v1\n"


def save_classifier(model: LogisticClassifier, path) -> None:
    """Write the flat binary model file: magic, JSON header, little-endian weights."""
    header = {
        "names": list(model.alphabet.names),
        "chars": list(model.alphabet.chars),
        "features": int(model.weights.shape[0]),
        "classes": int(model.weights.shape[1]),
    }
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(json.dumps(header, ensure_ascii=False).encode("utf-8") + b"\n")
        fh.write(model.weights.astype("<f8").tobytes(order="C"))


def load_classifier(path) -> LogisticClassifier:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MODEL_MAGIC))
        if magic != _MODEL_MAGIC:
            raise ValueError("not a classifier model file")
        header = json.loads(fh.readline().decode("utf-8"))
        alphabet = SymbolAlphabet(tuple(header["names"]), tuple(header["chars"]))
        n = header["features"] * header["classes"]
        raw = fh.read(n * 8)
        if len(raw) != n * 8:
            raise ValueError("classifier model file is truncated")
        weights = np.frombuffer(raw, dtype="<f8").reshape(
            header["features"], header["classes"]
        )
    return LogisticClassifier(alphabet, weights.copy())


# ---------------------------------------------------------------------------
# labeled-sample manifests (the bridge from crowd labeling to training)

def write_manifest(samples: list[LabeledSample], alphabet: SymbolAlphabet, out_dir) -> str:
    """Write sample PNGs plus a JSON-lines manifest; returns the manifest path."""
    import os

    from .imaging import save_binary_png

    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for i, s in enumerate(samples):
            rel = f"sample_{i:06d}.png"
            save_binary_png(s.image, os.path.join(out_dir, rel))
            fh.write(
                json.dumps(
                    {"path": rel, "label": alphabet.names[s.label], "origin": s.origin},
                    ensure_ascii=False,
                )
                + "\n"
            )
    return manifest_path


def load_manifest(manifest_path, alphabet: SymbolAlphabet) -> list[LabeledSample]:
    """Read a manifest back into normalized labeled samples."""
    import os

    from .imaging import load_binary_png

    base = os.path.dirname(os.path.abspath(manifest_path))
    samples = []
    with open(manifest_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            image = load_binary_png(os.path.join(base, row["path"]))
            if image.shape != (SAMPLE_SIDE, SAMPLE_SIDE):
                image = normalize_sample(image)
            samples.append(
                LabeledSample(image, alphabet.index_of(row["label"]), row.get("origin", "crowd"))
            )
    return samples
