"""Independent oracles and fixture builders shared across the test modules.

Everything here recomputes expected values from first principles; none of
it calls into the package internals it is meant to check, except where a
builder deliberately drives the public API to construct a fixture.
"""

from __future__ import annotations

from collections import deque
from functools import lru_cache

import numpy as np

from scriptura.classifier import SymbolAlphabet, TableClassifier, image_hash
from scriptura.langmodel import CharLM, train
from scriptura.lattice import Edge, Lattice, LatticeParams
from scriptura.segmentation import Segment, group_image, polygonal_segment


# ---------------------------------------------------------------------------
# imaging oracles

def otsu_oracle(gray: np.ndarray) -> int:
    """Brute-force Otsu: smallest t maximizing between-class variance.

    Class 0 holds pixels strictly below t, matching the ink convention.
    """
    flat = gray.ravel().astype(np.float64)
    best_t, best_v = 0, -1.0
    for t in range(256):
        lo = flat[flat < t]
        hi = flat[flat >= t]
        if lo.size == 0 or hi.size == 0:
            v = 0.0
        else:
            w0 = lo.size / flat.size
            w1 = hi.size / flat.size
            v = w0 * w1 * (lo.mean() - hi.mean()) ** 2
        if v > best_v:
            best_t, best_v = t, v
    return best_t


def flood_components(bits: np.ndarray) -> list[set[tuple[int, int]]]:
    """8-connected components as pixel sets, by scan order of first pixel."""
    h, w = bits.shape
    seen = np.zeros((h, w), dtype=bool)
    comps: list[set[tuple[int, int]]] = []
    for y0 in range(h):
        for x0 in range(w):
            if not bits[y0, x0] or seen[y0, x0]:
                continue
            comp = set()
            queue = deque([(y0, x0)])
            seen[y0, x0] = True
            while queue:
                y, x = queue.popleft()
                comp.add((y, x))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w:
                            if bits[ny, nx] and not seen[ny, nx]:
                                seen[ny, nx] = True
                                queue.append((ny, nx))
            comps.append(comp)
    return comps


def blank_run_spans(mask: np.ndarray, min_len: int) -> list[tuple[int, int]]:
    """Half-open spans of consecutive True of at least ``min_len``."""
    spans = []
    start = None
    for i, v in enumerate(list(mask) + [False]):
        if v and start is None:
            start = i
        elif not v and start is not None:
            if i - start >= min_len:
                spans.append((start, i))
            start = None
    return spans


# ---------------------------------------------------------------------------
# segmentation oracles

def plateau_minima_oracle(values) -> list[int]:
    """Leftmost columns of interior equal-value runs below both neighbors."""
    values = list(values)
    n = len(values)
    out = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if i > 0 and j < n - 1 and values[i - 1] > values[i] and values[j + 1] > values[i]:
            out.append(i)
        i = j + 1
    return out


def plateau_maxima_oracle(values) -> list[int]:
    return plateau_minima_oracle([-v for v in values])


def smooth_oracle(values, window: int = 3) -> list[float]:
    """Centered moving average with the window truncated at the ends."""
    n = len(values)
    half = window // 2
    return [
        sum(values[max(0, i - half) : min(n, i + half + 1)])
        / (min(n, i + half + 1) - max(0, i - half))
        for i in range(n)
    ]


def segmentation_is_partition(word: np.ndarray, segments: list[Segment]) -> bool:
    """Masks must cover the ink exactly and never overlap."""
    union = np.zeros_like(word, dtype=np.int32)
    for seg in segments:
        union += seg.mask.astype(np.int32)
    return bool(((union == 1) == (word > 0)).all())


# ---------------------------------------------------------------------------
# edit distance oracle

def recursive_levenshtein(a: str, b: str) -> int:
    """Textbook recursion with memoization; the edit distance oracle."""

    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        cost = 0 if a[i - 1] == b[j - 1] else 1
        return min(rec(i - 1, j) + 1, rec(i, j - 1) + 1, rec(i - 1, j - 1) + cost)

    return rec(len(a), len(b))


def all_strings(chars: str, max_len: int) -> list[str]:
    out = [""]
    frontier = [""]
    for _ in range(max_len):
        frontier = [s + c for s in frontier for c in chars]
        out.extend(frontier)
    return out


# ---------------------------------------------------------------------------
# lattice oracles

def all_paths_oracle(lattice: Lattice) -> list[tuple[str, tuple]]:
    """Every origin-to-sink path with every label combination, no pruning."""
    out: dict[int, list[Edge]] = {}
    for e in lattice.edges:
        out.setdefault(e.source, []).append(e)
    results: list[tuple[str, tuple]] = []

    def rec(vertex: int, text: str, path: tuple) -> None:
        edges = out.get(vertex)
        if not edges:
            if path:
                results.append((text, path))
            return
        for edge in sorted(edges, key=lambda e: e.target):
            for char, _ in edge.labels:
                rec(edge.target, text + char, path + ((edge.source, edge.target, char),))

    rec(0, "", ())
    return results


def random_lattice(rng: np.random.Generator, chars: str = "ab", max_vertices: int = 8) -> Lattice:
    """A random small DAG in the lattice shape, for oracle comparisons."""
    n = int(rng.integers(2, max_vertices + 1))
    xs = (0, *sorted(int(v) for v in rng.choice(np.arange(1, 120), size=n - 1, replace=False)))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.45:
                k = int(rng.integers(1, min(3, len(chars)) + 1))
                picked = sorted(rng.choice(list(chars), size=k, replace=False))
                labels = tuple((str(c), float(rng.uniform(0.2, 1.0))) for c in picked)
                edges.append(Edge(i, j, labels))
    return Lattice(xs, tuple(edges))


class HashPeakClassifier:
    """Deterministic stand-in classifier: peaks on a hash-chosen class.

    Gives varied but reproducible distributions without any training,
    good enough to exercise lattice construction invariants.
    """

    def __init__(self, alphabet: SymbolAlphabet, peak: float = 0.85):
        self.alphabet = alphabet
        self.peak = peak

    def classify(self, bits: np.ndarray) -> np.ndarray:
        n = len(self.alphabet)
        probs = np.full(n, (1.0 - self.peak) / (n - 1))
        probs[image_hash(bits) % n] = self.peak
        return probs / probs.sum()


# ---------------------------------------------------------------------------
# the seven-stroke word fixture
#
# Seven disconnected one-column strokes; a table classifier labels nine
# chosen segment groups as letters and everything else as non-character,
# so the lattice has a known exact shape and exactly four readings.

DATO_COLUMNS = (2, 10, 18, 26, 34, 42, 50)
DATO_LABELED_GROUPS = (
    ((0, 1), "d"),
    ((2, 3), "a"),
    ((2,), "i"),
    ((4, 5), "t"),
    ((4,), "i"),
    ((3, 4), "i"),
    ((3, 4, 5), "t"),
    ((5, 6), "d"),
    ((6,), "o"),
)
DATO_EXPECTED_TEXTS = frozenset({"dato", "daid", "diid", "dito"})
# (source vertex, target vertex, char) with vertices indexing
# xs = (0, 2, 10, 18, 26, 34, 42, 50).
DATO_EXPECTED_EDGES = frozenset(
    {
        (0, 2, "d"),
        (2, 4, "a"),
        (2, 3, "i"),
        (4, 6, "t"),
        (4, 5, "i"),
        (3, 5, "i"),
        (3, 6, "t"),
        (5, 7, "d"),
        (6, 7, "o"),
    }
)


def dato_word_image(height: int = 12, width: int = 53) -> np.ndarray:
    """Seven isolated strokes of distinct heights at fixed columns."""
    img = np.zeros((height, width), dtype=np.uint8)
    for k, x in enumerate(DATO_COLUMNS):
        img[1 : 4 + k, x] = 1
    return img


def dato_classifier(alphabet: SymbolAlphabet) -> TableClassifier:
    """Exact-match table over the nine labeled groups; fallback is non-character."""
    segments = polygonal_segment(dato_word_image())
    assert [s.centroid_x for s in segments] == list(DATO_COLUMNS)
    n = len(alphabet)
    table: dict[int, np.ndarray] = {}
    for ids, char in DATO_LABELED_GROUPS:
        crop = group_image([segments[i] for i in ids])
        dist = np.zeros(n)
        dist[alphabet.chars.index(char)] = 1.0
        key = image_hash(crop)
        assert key not in table, "fixture group images must hash uniquely"
        table[key] = dist
    fallback = np.zeros(n)
    fallback[alphabet.non_char_index] = 1.0
    return TableClassifier(alphabet, table, fallback)


def dato_lm() -> CharLM:
    """Tiny model where "dato" outscores the other three readings."""
    return train(["dato"] * 4 + ["dito", "daid", "diid"], q=3)


def dato_params() -> LatticeParams:
    return LatticeParams()
