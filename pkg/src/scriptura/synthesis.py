"""Synthetic manuscript generation with known ground truth.

Words are assembled by stitching glyph templates left to right, with a
one-pixel vertical jitter per glyph. Neighboring letters whose edges
reach down to the baseline band sometimes fuse through a thin connecting
stroke, the way handwritten letters do. Pages stack words into lines
with enough blank space for the splitter to recover them. Because every
rendered glyph's extent is known, the same machinery yields labeled
classifier samples: segment groups that line up with one glyph take its
class, groups that straddle two glyphs become non-character examples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import LabeledSample, SymbolAlphabet, normalize_sample
from .glyphs import GLYPH_HEIGHT, X_BOT, glyph_bank, shapes_for_char
from .imaging import crop_margins
from .segmentation import group_image, polygonal_segment

__all__ = [
    "LEXICON",
    "RenderedWord",
    "render_word",
    "synth_generate",
    "harvest_samples",
    "seed_samples",
    "build_corpus_words",
    "default_exemplars",
]

LIGATURE_PROB = 0.45
LIGATURE_ROW = X_BOT - 4
# Letters whose joined edge is a plain stroke. Letters with an interior
# contour valley (u, x, s) or a bowl edge (o, b, p, c, e) stay detached:
# a connecting stroke next to a valley gets cut diagonally across the
# letter body, which no amount of segment grouping can undo.
LIGATURE_SAFE = frozenset(
    ("a", "d", "d-tall", "g", "h", "i", "l", "m", "n", "q", "r", "t")
)
JITTER_PX = 1
LINE_GAP_ROWS = 14
PAGE_MARGIN = 10
WORDS_PER_LINE = 4
LINES_PER_PAGE = 5
BOUND_TOLERANCE_PX = 2

LEXICON: tuple[str, ...] = (
    "amor", "amoris", "anno", "ante", "apud", "aqua", "aquam", "bellum",
    "belli", "casa", "casam", "dato", "datum", "dei", "deo", "deus",
    "diem", "dies", "domini", "domino", "dominus", "dona", "donum",
    "esse", "est", "filia", "filius", "gratia", "gratias", "hostis",
    "inde", "inter", "intra", "lucis", "lux", "manum", "manus", "mater",
    "matris", "mundi", "mundus", "noctis", "nox", "pacis", "pater",
    "patris", "pax", "populi", "populus", "regina", "regis", "rex",
    "rosa", "rosam", "sancta", "sanctus", "sunt", "super", "templum",
    "terra",
)


@dataclass(frozen=True)
class RenderedWord:
    """A rendered word image plus the column extent of every glyph in it."""

    text: str
    image: np.ndarray
    # (class index, left, right-exclusive) per character, in image columns.
    glyph_bounds: tuple[tuple[int, int, int], ...]


def _pick_shape(
    alphabet: SymbolAlphabet, char: str, rng: np.random.Generator
) -> int:
    shapes = shapes_for_char(alphabet, char)
    if len(shapes) == 1:
        return shapes[0]
    return shapes[int(rng.integers(len(shapes)))]


def _ligature_anchor(glyph: np.ndarray, side: str) -> int | None:
    """Outermost glyph column whose ink reaches the ligature row band.

    Letters ending in a bowl have no ink near the baseline at their
    edge, so they cannot carry a connecting stroke; those return None.
    """
    band = glyph[LIGATURE_ROW : LIGATURE_ROW + 3, :]
    cols = np.flatnonzero(glyph.any(axis=0))
    if side == "right":
        candidates = (int(cols[-1]), int(cols[-1]) - 1)
    else:
        candidates = (int(cols[0]), int(cols[0]) + 1)
    for c in candidates:
        if 0 <= c < band.shape[1] and band[:, c].any():
            return c
    return None


def render_word(
    text: str,
    alphabet: SymbolAlphabet,
    bank: dict[str, np.ndarray] | None = None,
    rng: np.random.Generator | None = None,
    shape_overrides: dict[int, int] | None = None,
) -> RenderedWord:
    """Stitch glyph templates into a cropped word image.

    Consecutive letters either sit one blank column apart or, when both
    edges reach the ligature band, fuse through a thin connecting stroke
    just above the baseline. ``shape_overrides`` maps character positions
    to forced class indices, used for fixtures that deliberately draw a
    confusable letter form.
    """
    if not text:
        raise ValueError("cannot render an empty word")
    bank = bank if bank is not None else glyph_bank(alphabet)
    rng = rng if rng is not None else np.random.default_rng(0)
    glyphs: list[tuple[int, np.ndarray]] = []
    for pos, char in enumerate(text):
        if shape_overrides and pos in shape_overrides:
            cls = shape_overrides[pos]
        else:
            cls = _pick_shape(alphabet, char, rng)
        glyphs.append((cls, bank[alphabet.names[cls]]))

    total_w = sum(g.shape[1] for _, g in glyphs) + 4 * len(glyphs)
    canvas = np.zeros((GLYPH_HEIGHT + 2 * JITTER_PX, total_w), dtype=np.uint8)
    bounds: list[tuple[int, int, int]] = []
    x = 0
    prev_dy = JITTER_PX
    prev_glyph: np.ndarray | None = None
    prev_x = 0
    for k, (cls, glyph) in enumerate(glyphs):
        # Jitter drifts one row at most between neighbors so ligatures
        # stay within the band the segmenter can cut.
        dy = int(np.clip(prev_dy + rng.integers(-1, 2), 0, 2 * JITTER_PX))
        ligate = False
        if k > 0:
            right = _ligature_anchor(prev_glyph, "right")
            left = _ligature_anchor(glyph, "left")
            ligate = (
                right is not None
                and left is not None
                and alphabet.names[bounds[-1][0]] in LIGATURE_SAFE
                and alphabet.names[cls] in LIGATURE_SAFE
                and rng.random() < LIGATURE_PROB
            )
            # Template edges carry one blank margin column each; the
            # offset below leaves `gap` blank ink columns between letters.
            gap = int(rng.integers(2, 4)) if ligate else int(rng.integers(1, 3))
            x -= 2 - gap
        h, w = glyph.shape
        canvas[dy : dy + h, x : x + w] |= glyph
        if k > 0 and ligate:
            top = min(prev_dy, dy) + LIGATURE_ROW
            bottom = max(prev_dy, dy) + LIGATURE_ROW + 2
            canvas[top:bottom, prev_x + right : x + left + 1] = 1
        bounds.append((cls, x, x + w))
        prev_dy, prev_glyph, prev_x = dy, glyph, x
        x += w

    image = crop_margins(canvas)
    shift = int(np.flatnonzero(canvas.any(axis=0))[0])
    adjusted = tuple(
        (cls, left - shift, right - shift) for cls, left, right in bounds
    )
    return RenderedWord(text, image, adjusted)


def synth_generate(
    lexicon: tuple[str, ...],
    n: int,
    alphabet: SymbolAlphabet,
    rng: np.random.Generator,
    gap: int = 7,
    words_per_line: int = WORDS_PER_LINE,
    lines_per_page: int = LINES_PER_PAGE,
    bank: dict[str, np.ndarray] | None = None,
) -> tuple[list[tuple[str, np.ndarray]], dict[str, str]]:
    """Render ``n`` lexicon words onto pages; returns pages and ground truth.

    Pages are binary images. Truth maps word ids, keyed the same way the
    page pipeline keys them (page id, line index, word index), to the
    intended text.
    """
    if n < 1:
        raise ValueError("need at least one word")
    bank = bank if bank is not None else glyph_bank(alphabet)
    words = [
        render_word(lexicon[int(rng.integers(len(lexicon)))], alphabet, bank, rng)
        for _ in range(n)
    ]
    pages: list[tuple[str, np.ndarray]] = []
    truth: dict[str, str] = {}
    per_page = words_per_line * lines_per_page
    spacing = gap + 4
    for p0 in range(0, len(words), per_page):
        page_id = f"page{len(pages):03d}"
        chunk = words[p0 : p0 + per_page]
        line_imgs = []
        for l0 in range(0, len(chunk), words_per_line):
            line_words = chunk[l0 : l0 + words_per_line]
            height = max(w.image.shape[0] for w in line_words)
            width = sum(w.image.shape[1] for w in line_words) + spacing * (
                len(line_words) - 1
            )
            line = np.zeros((height, width), dtype=np.uint8)
            x = 0
            for wi, word in enumerate(line_words):
                h, w = word.image.shape
                line[:h, x : x + w] = word.image
                truth[f"{page_id}_{l0 // words_per_line:03d}_{wi:03d}"] = word.text
                x += w + spacing
            line_imgs.append(line)
        page_w = max(li.shape[1] for li in line_imgs) + 2 * PAGE_MARGIN
        page_h = (
            sum(li.shape[0] for li in line_imgs)
            + LINE_GAP_ROWS * (len(line_imgs) - 1)
            + 2 * PAGE_MARGIN
        )
        page = np.zeros((page_h, page_w), dtype=np.uint8)
        y = PAGE_MARGIN
        for li in line_imgs:
            page[y : y + li.shape[0], PAGE_MARGIN : PAGE_MARGIN + li.shape[1]] = li
            y += li.shape[0] + LINE_GAP_ROWS
        pages.append((page_id, page))
    return pages, truth


def _span_label(
    span: tuple[int, int],
    bounds: tuple[tuple[int, int, int], ...],
    tolerance: int = BOUND_TOLERANCE_PX,
) -> int | str | None:
    """Class index for a glyph-aligned span, "junk" for a straddler, else None."""
    left, right = span
    for cls, gl, gr in bounds:
        if abs(left - gl) <= tolerance and abs(right - gr) <= tolerance:
            return cls
    cores_hit = 0
    for _, gl, gr in bounds:
        core_l, core_r = gl + tolerance + 1, gr - tolerance - 1
        if core_r > core_l and left < core_r and right > core_l:
            cores_hit += 1
    return "junk" if cores_hit >= 2 else None


def harvest_samples(
    word: RenderedWord,
    alphabet: SymbolAlphabet,
    max_span_px: int = 40,
) -> list[LabeledSample]:
    """Labeled classifier samples from one rendered word.

    Contiguous segment-group crops that line up with a single glyph get
    that glyph's class; crops clearly covering the cores of two or more
    glyphs become non-character samples. Ambiguous fragments are skipped.
    """
    segments = polygonal_segment(word.image)
    non_char = alphabet.non_char_index
    out: list[LabeledSample] = []
    for i in range(len(segments)):
        for j in range(i, len(segments)):
            run = segments[i : j + 1]
            left = min(s.left for s in run)
            right = max(s.right for s in run)
            if right - left > max_span_px:
                break
            verdict = _span_label((left, right), word.glyph_bounds)
            if verdict is None:
                continue
            label = non_char if verdict == "junk" else int(verdict)
            out.append(
                LabeledSample(normalize_sample(group_image(run)), label, origin="seed")
            )
    return out


def seed_samples(
    alphabet: SymbolAlphabet,
    rng: np.random.Generator,
    n_words: int = 200,
    per_class: int = 4,
) -> list[LabeledSample]:
    """A harvested training set with every class guaranteed present.

    Random lexicon words supply the bulk. On top of that, each glyph
    class gets forced single-glyph renders, and the non-character class
    gets crops spanning the joint of two fused glyphs.
    """
    bank = glyph_bank(alphabet)
    out: list[LabeledSample] = []
    for _ in range(n_words):
        word = LEXICON[int(rng.integers(len(LEXICON)))]
        out.extend(harvest_samples(render_word(word, alphabet, bank, rng), alphabet))
    names = [n for n in alphabet.names if n in bank]
    for name in names:
        cls = alphabet.index_of(name)
        char = alphabet.chars[cls]
        for _ in range(per_class):
            rendered = render_word(char, alphabet, bank, rng, shape_overrides={0: cls})
            out.extend(harvest_samples(rendered, alphabet))
    non_char = alphabet.non_char_index
    for _ in range(per_class * 2):
        a, b = rng.choice(len(names), size=2, replace=False)
        pair = render_word(
            "xx",
            alphabet,
            bank,
            rng,
            shape_overrides={
                0: alphabet.index_of(names[int(a)]),
                1: alphabet.index_of(names[int(b)]),
            },
        )
        (_, al, ar), (_, bl, br) = pair.glyph_bounds
        crop = pair.image[:, (al + ar) // 2 : (bl + br) // 2]
        if crop.any():
            out.append(
                LabeledSample(normalize_sample(crop), non_char, origin="seed")
            )
    return out


def default_exemplars(
    alphabet: SymbolAlphabet,
    seed: int = 0,
    per_kind: int = 3,
) -> dict[str, dict[str, list[np.ndarray]]]:
    """Reference images for labeling tasks, per symbol name.

    Positives are jittered copies of the symbol's template; negatives are
    templates of other symbols. The non-character class gets straddler
    crops (two fused glyphs) as positives and clean glyphs as negatives.
    """
    from .classifier import augment

    rng = np.random.default_rng(seed)
    bank = glyph_bank(alphabet)
    names = [n for n in alphabet.names if n in bank]
    out: dict[str, dict[str, list[np.ndarray]]] = {}

    def jittered(name: str) -> np.ndarray:
        sample = LabeledSample(normalize_sample(bank[name]), 0, origin="seed")
        return augment(sample, rng).image

    for k, name in enumerate(alphabet.names):
        if k == alphabet.non_char_index:
            positives = []
            for _ in range(per_kind):
                a, b = rng.choice(len(names), size=2, replace=False)
                word = render_word(
                    "xx",
                    alphabet,
                    bank,
                    rng,
                    shape_overrides={0: alphabet.index_of(names[int(a)]),
                                     1: alphabet.index_of(names[int(b)])},
                )
                mid = word.image.shape[1] // 2
                crop = word.image[:, max(0, mid - 14) : mid + 14]
                positives.append(normalize_sample(crop))
            negatives = [
                normalize_sample(bank[names[int(rng.integers(len(names)))]])
                for _ in range(per_kind)
            ]
        else:
            positives = [normalize_sample(bank[name])] + [
                jittered(name) for _ in range(per_kind - 1)
            ]
            others = [n for n in names if n != name]
            picks = rng.choice(len(others), size=min(per_kind, len(others)), replace=False)
            negatives = [normalize_sample(bank[others[int(p)]]) for p in picks]
        out[name] = {"positive": positives, "negative": negatives}
    return out


def build_corpus_words(
    lexicon: tuple[str, ...],
    repeats: int = 8,
) -> list[str]:
    """A frequency-weighted word stream for language model training.

    Earlier lexicon entries repeat more often, giving the model a mildly
    skewed but deterministic unigram profile.
    """
    words: list[str] = []
    for k, word in enumerate(lexicon):
        words.extend([word] * (repeats + (len(lexicon) - k) // 6))
    return words
