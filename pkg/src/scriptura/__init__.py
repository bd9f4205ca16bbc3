"""Transcription of handwritten words from page scans.

The pipeline: clean and split a scanned page into word images, cut each
word into character-sized segments, score segment groups with a letter
classifier, assemble the scores into a reading lattice, walk the lattice
under a character gram language model, and finally swap confusable
letter shapes for their counterparts to recover readings the writing
alone cannot settle.
"""

from .classifier import (
    NON_CHARACTER,
    LabeledSample,
    LogisticClassifier,
    SymbolAlphabet,
    TableClassifier,
    load_classifier,
    normalize_sample,
    save_classifier,
    train_reference,
)
from .decoding import CounterpartSets, DecodedEntry, brute_force_decode, decode
from .evaluation import EvalReport, compute_report, levenshtein, reciprocal_rank, sweep
from .imaging import WordImage, binarize, deskew, deslant, split_lines, split_words
from .langmodel import CharLM, tokenize, train
from .lattice import (
    Candidate,
    Lattice,
    LatticeParams,
    build_lattice,
    enumerate_candidates,
    rank_candidates,
)
from .pipeline import (
    PipelineConfig,
    TranscriptionEngine,
    WordResult,
    preprocess_page,
    transcribe_page,
    transcribe_word,
)
from .segmentation import Segment, over_segment, polygonal_segment

__version__ = "0.1.0"

__all__ = [
    "NON_CHARACTER",
    "LabeledSample",
    "LogisticClassifier",
    "SymbolAlphabet",
    "TableClassifier",
    "load_classifier",
    "normalize_sample",
    "save_classifier",
    "train_reference",
    "CounterpartSets",
    "DecodedEntry",
    "brute_force_decode",
    "decode",
    "EvalReport",
    "compute_report",
    "levenshtein",
    "reciprocal_rank",
    "sweep",
    "WordImage",
    "binarize",
    "deskew",
    "deslant",
    "split_lines",
    "split_words",
    "CharLM",
    "tokenize",
    "train",
    "Candidate",
    "Lattice",
    "LatticeParams",
    "build_lattice",
    "enumerate_candidates",
    "rank_candidates",
    "PipelineConfig",
    "TranscriptionEngine",
    "WordResult",
    "preprocess_page",
    "transcribe_page",
    "transcribe_word",
    "Segment",
    "over_segment",
    "polygonal_segment",
    "__version__",
]
