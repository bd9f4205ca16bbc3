"""Shared fixtures: the expensive trained models are session-scoped."""

from __future__ import annotations

import time

import numpy as np
import pytest

from scriptura.classifier import (
    SymbolAlphabet,
    balance_training_set,
    train_reference,
)
from scriptura.decoding import CounterpartSets
from scriptura.glyphs import glyph_bank
from scriptura.langmodel import train
from scriptura.lattice import LatticeParams
from scriptura.pipeline import TranscriptionEngine
from scriptura.synthesis import LEXICON, build_corpus_words, seed_samples, synth_generate

SYNTH_WORDS = 200
SYNTH_SEED = 7
TRAIN_SEED = 11
BALANCE_TARGET = 1000


@pytest.fixture(scope="session")
def alphabet() -> SymbolAlphabet:
    return SymbolAlphabet.default()


@pytest.fixture(scope="session")
def bank(alphabet):
    return glyph_bank(alphabet)


@pytest.fixture(scope="session")
def char_lm():
    return train(build_corpus_words(LEXICON), q=6)


@pytest.fixture(scope="session")
def trained(alphabet):
    """Reference classifier trained once per session; reports its wall time."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(TRAIN_SEED)
    raw = seed_samples(alphabet, rng, n_words=SYNTH_WORDS)
    balanced = balance_training_set(raw, alphabet, target=BALANCE_TARGET, rng=rng)
    model = train_reference(balanced, alphabet, rng=rng)
    elapsed = time.perf_counter() - t0
    return {
        "classifier": model,
        "balanced": balanced,
        "train_seconds": elapsed,
    }


@pytest.fixture(scope="session")
def engine(trained, char_lm) -> TranscriptionEngine:
    return TranscriptionEngine(
        classifier=trained["classifier"],
        lm=char_lm,
        counterparts=CounterpartSets.default(),
        params=LatticeParams(),
    )


@pytest.fixture(scope="session")
def synth_pages(alphabet):
    """Ten clean synthetic pages with ground truth, 200 words."""
    rng = np.random.default_rng(SYNTH_SEED)
    pages, truth = synth_generate(LEXICON, SYNTH_WORDS, alphabet, rng)
    return pages, truth
