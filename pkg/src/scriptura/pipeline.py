"""End-to-end transcription: page in, ranked word readings out.

A page is binarized, despeckled, deskewed, split into lines (each line
deslanted on its own), and split into words. Every word runs through
segmentation, lattice construction, candidate enumeration, the length
filter, ranking, and counterpart decoding. Word failures are isolated:
a word that raises or times out is reported untranscribed rather than
sinking the page.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import imaging
from .classifier import load_classifier
from .decoding import CounterpartSets, DecodedEntry, decode
from .imaging import WordImage
from .langmodel import CharLM
from .lattice import (
    LatticeParams,
    build_lattice,
    enumerate_candidates,
    length_filter,
    rank_candidates,
)
from .segmentation import over_segment, polygonal_segment

__all__ = [
    "PipelineConfig",
    "TranscriptionEngine",
    "WordResult",
    "transcribe_word",
    "transcribe_page",
    "preprocess_page",
    "write_results_jsonl",
    "read_results_jsonl",
]

logger = logging.getLogger(__name__)

SEGMENTATION_METHODS = ("polygonal", "over")


@dataclass(frozen=True)
class PipelineConfig:
    """File-backed runtime configuration for the transcription engine."""

    classifier_path: str
    lm_path: str
    counterpart_path: str | None = None
    method: str = "polygonal"
    gap: int = 7
    parallelism: int = 1
    q: int | None = None
    lattice: LatticeParams = field(default_factory=LatticeParams)

    def __post_init__(self) -> None:
        if self.method not in SEGMENTATION_METHODS:
            raise ValueError(f"unknown segmentation method {self.method!r}")
        if self.gap < 1:
            raise ValueError("gap must be at least 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        lattice = LatticeParams(**raw.pop("lattice", {}))
        return cls(lattice=lattice, **raw)

    def to_json(self, path) -> None:
        raw = {
            "classifier_path": self.classifier_path,
            "lm_path": self.lm_path,
            "counterpart_path": self.counterpart_path,
            "method": self.method,
            "gap": self.gap,
            "parallelism": self.parallelism,
            "q": self.q,
            "lattice": self.lattice.__dict__,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(raw, fh, indent=1)


@dataclass
class TranscriptionEngine:
    """Loaded models plus parameters; the unit the pipeline functions consume."""

    classifier: object
    lm: CharLM
    counterparts: CounterpartSets
    params: LatticeParams = field(default_factory=LatticeParams)
    method: str = "polygonal"
    gap: int = 7
    parallelism: int = 1

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "TranscriptionEngine":
        classifier = load_classifier(config.classifier_path)
        lm = CharLM.load(config.lm_path)
        if config.q is not None:
            lm = lm.clamp_order(config.q)
        if config.counterpart_path:
            with open(config.counterpart_path, encoding="utf-8") as fh:
                counterparts = CounterpartSets.from_json(fh.read())
        else:
            counterparts = CounterpartSets.default()
        return cls(
            classifier=classifier,
            lm=lm,
            counterparts=counterparts,
            params=config.lattice,
            method=config.method,
            gap=config.gap,
            parallelism=config.parallelism,
        )

    def with_params(self, **changes) -> "TranscriptionEngine":
        return replace(self, params=replace(self.params, **changes))


@dataclass(frozen=True)
class WordResult:
    """Ranked readings of one word; empty plus a flag when nothing survived."""

    word_id: str
    width: int
    transcriptions: tuple[DecodedEntry, ...]
    timing_ms: float
    untranscribed: bool

    def to_json_dict(self) -> dict:
        return {
            "word_id": self.word_id,
            "width": self.width,
            "untranscribed": self.untranscribed,
            "timing_ms": self.timing_ms,
            "candidates": [
                {
                    "rank": k + 1,
                    "text": t.text,
                    "log_word_prob": t.log_word_prob,
                    "decoded": t.revised,
                }
                for k, t in enumerate(self.transcriptions)
            ],
        }

    @classmethod
    def from_json_dict(cls, raw: dict) -> "WordResult":
        entries = tuple(
            DecodedEntry(
                c["text"], float(c["log_word_prob"]), bool(c.get("decoded", False))
            )
            for c in raw.get("candidates", [])
        )
        return cls(
            word_id=raw["word_id"],
            width=int(raw.get("width", 0)),
            transcriptions=entries,
            timing_ms=float(raw.get("timing_ms", 0.0)),
            untranscribed=bool(raw.get("untranscribed", not entries)),
        )


def transcribe_word(
    word: WordImage,
    engine: TranscriptionEngine,
    deadline: float | None = None,
) -> WordResult:
    """Run the whole reading stack on one word image."""
    t0 = time.perf_counter()
    segment = polygonal_segment if engine.method == "polygonal" else over_segment
    # One blank column on the left keeps every centroid strictly past the
    # lattice start vertex; a tight crop could otherwise put the first
    # segment's centroid on column zero, where no group can reach it.
    segments = segment(np.pad(word.image, ((0, 0), (1, 0))))
    lattice = build_lattice(segments, engine.classifier, engine.params)
    candidates = enumerate_candidates(lattice, engine.lm, engine.params, deadline)
    candidates = length_filter(candidates, word.width, engine.params)
    ranked = rank_candidates(candidates, engine.params.m)
    readings = tuple(decode(ranked, engine.lm, engine.counterparts, engine.params.m))
    elapsed = (time.perf_counter() - t0) * 1000.0
    return WordResult(
        word_id=word.word_id,
        width=word.width,
        transcriptions=readings,
        timing_ms=elapsed,
        untranscribed=not readings,
    )


def _safe_transcribe(word: WordImage, engine: TranscriptionEngine, timeout_s: float | None):
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    t0 = time.perf_counter()
    try:
        return transcribe_word(word, engine, deadline)
    except TimeoutError:
        logger.warning("word %s timed out", word.word_id)
    except Exception:
        logger.exception("word %s failed", word.word_id)
    elapsed = (time.perf_counter() - t0) * 1000.0
    return WordResult(word.word_id, word.width, (), elapsed, True)


def preprocess_page(
    gray: np.ndarray,
    gap: int = 7,
    page_id: str = "page",
) -> list[WordImage]:
    """Binarize and geometry-correct a page, returning its word images in order."""
    bits = imaging.binarize(gray)
    bits = imaging.remove_specks(bits)
    if not bits.any():
        return []
    bits, _ = imaging.deskew(imaging.crop_margins(bits))
    words: list[WordImage] = []
    for line_index, line in enumerate(imaging.split_lines(bits)):
        line, _ = imaging.deslant(line)
        words.extend(
            imaging.split_words(line, gap=gap, page_id=page_id, line_index=line_index)
        )
    return words


def transcribe_page(
    gray: np.ndarray,
    engine: TranscriptionEngine,
    page_id: str = "page",
    timeout_s: float | None = None,
) -> list[WordResult]:
    """Transcribe every word on a page, in reading order."""
    words = preprocess_page(gray, gap=engine.gap, page_id=page_id)
    if engine.parallelism > 1:
        with ThreadPoolExecutor(max_workers=engine.parallelism) as pool:
            return list(
                pool.map(lambda w: _safe_transcribe(w, engine, timeout_s), words)
            )
    return [_safe_transcribe(w, engine, timeout_s) for w in words]


def write_results_jsonl(results: list[WordResult], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps(r.to_json_dict(), ensure_ascii=False) + "\n")


def read_results_jsonl(path) -> list[WordResult]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(WordResult.from_json_dict(json.loads(line)))
    return out
