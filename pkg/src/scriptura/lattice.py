"""Transcription lattices over segment groups.

Vertices are the distinct segment centroids plus a start vertex at x=0.
Every centroid pair no further apart than ``sigma`` becomes a candidate
edge: the segments between them are merged, classified, and either
dropped (too likely a non-character) or labeled with a few plausible
characters. Words are read off as label sequences along paths from the
start vertex to any sink, scored by a character language model.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .classifier import SymbolAlphabet, validate_distribution
from .langmodel import CharLM
from .segmentation import Segment, group_image

__all__ = [
    "LatticeParams",
    "Edge",
    "Lattice",
    "Candidate",
    "select_labels",
    "build_lattice",
    "enumerate_candidates",
    "length_filter",
    "rank_candidates",
]

MAX_LABELS_PER_EDGE = 3


@dataclass(frozen=True)
class LatticeParams:
    """Lattice construction and search knobs.

    sigma: widest centroid span an edge may cover, in pixels.
    eta: edges whose non-character probability reaches this are dropped.
    theta1: probability mass the selected labels must reach.
    theta2: floor below which a label cannot be selected.
    beta: prefix substring-probability pruning threshold for enumeration.
    m: how many ranked transcriptions to keep.
    avg_char_px: assumed character width for the candidate length filter.
    min_len_ratio: fraction of the word width candidates must plausibly cover.
    """

    sigma: int = 25
    eta: float = 0.1
    theta1: float = 0.8
    theta2: float = 0.1
    beta: float = 1e-16
    m: int = 10
    avg_char_px: int = 19
    min_len_ratio: float = 0.9

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if not 0.0 < self.theta1 <= 1.0:
            raise ValueError("theta1 must lie in (0, 1]")
        if not 0.0 <= self.theta2 <= 1.0:
            raise ValueError("theta2 must lie in [0, 1]")
        if self.beta < 0.0 or self.beta > 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.avg_char_px <= 0:
            raise ValueError("avg_char_px must be positive")
        if not 0.0 < self.min_len_ratio <= 1.0:
            raise ValueError("min_len_ratio must lie in (0, 1]")


@dataclass(frozen=True)
class Edge:
    """A labeled hop between two vertices; labels pair characters with scores."""

    source: int
    target: int
    labels: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class Lattice:
    """Start vertex plus centroid vertices (xs[0] == 0) and labeled edges."""

    xs: tuple[int, ...]
    edges: tuple[Edge, ...]

    def outgoing(self, vertex: int) -> list[Edge]:
        return [e for e in self.edges if e.source == vertex]


@dataclass(frozen=True)
class Candidate:
    """One full reading of a word: text, log word score, and the path taken."""

    text: str
    log_word_prob: float
    path: tuple[tuple[int, int, str], ...]


def select_labels(
    probs: np.ndarray,
    theta1: float,
    theta2: float,
    non_char_index: int,
    max_labels: int = MAX_LABELS_PER_EDGE,
) -> list[tuple[int, float]] | None:
    """Pick the classes worth keeping as edge labels.

    Classes are taken in descending probability (index order on ties)
    while each stays at or above ``theta2``, stopping once the running
    mass reaches ``theta1``; if the mass never gets there, every class at
    or above ``theta2`` is taken. Returns None when the non-character
    class makes the cut, meaning the edge must be dropped. At most
    ``max_labels`` labels survive.
    """
    validate_distribution(probs, len(probs))
    order = np.argsort(-probs, kind="stable")
    chosen: list[tuple[int, float]] = []
    mass = 0.0
    for idx in order:
        p = float(probs[idx])
        if p < theta2:
            break
        chosen.append((int(idx), p))
        mass += p
        if mass >= theta1:
            break
    if any(idx == non_char_index for idx, _ in chosen):
        return None
    return chosen[:max_labels]


def build_lattice(
    segments: list[Segment],
    classifier,
    params: LatticeParams,
) -> Lattice:
    """Classify every admissible segment group and keep the labeled edges.

    ``classifier`` must expose an ``alphabet`` and a ``classify`` method
    over binary images. Duplicate characters on one edge (two shapes
    reading as the same letter) collapse to the strongest score.
    """
    alphabet: SymbolAlphabet = classifier.alphabet
    non_char = alphabet.non_char_index
    cents = [s.centroid_x for s in segments]
    if any(b < a for a, b in zip(cents, cents[1:])):
        raise ValueError("segments must be ordered by centroid")
    xs = sorted({0, *cents})
    edges: list[Edge] = []
    for i, xi in enumerate(xs):
        for j in range(i + 1, len(xs)):
            xj = xs[j]
            if xj - xi > params.sigma:
                break
            # Groups take the centroids in (xi, xj], except from the start
            # vertex, whose interval is closed on the left: a segment whose
            # centroid falls on column zero would otherwise be unreachable.
            group = [
                s
                for s in segments
                if (xi < s.centroid_x or (i == 0 and s.centroid_x == xi))
                and s.centroid_x <= xj
            ]
            if not group:
                continue
            dist = classifier.classify(group_image(group))
            if float(dist[non_char]) >= params.eta:
                continue
            picked = select_labels(dist, params.theta1, params.theta2, non_char)
            if not picked:
                continue
            merged: dict[str, float] = {}
            for idx, p in picked:
                char = alphabet.chars[idx]
                if char not in merged or p > merged[char]:
                    merged[char] = p
            labels = tuple(sorted(merged.items(), key=lambda kv: (-kv[1], kv[0])))
            edges.append(Edge(i, j, labels))
    return Lattice(tuple(xs), tuple(edges))


def enumerate_candidates(
    lattice: Lattice,
    lm: CharLM,
    params: LatticeParams,
    deadline: float | None = None,
) -> list[Candidate]:
    """Depth-first path enumeration with substring-probability pruning.

    A prefix whose substring probability drops below ``beta`` is cut off
    together with everything behind it. Paths must end on a sink (a
    vertex with no outgoing edges). ``deadline`` is an absolute
    ``time.monotonic`` stamp; passing it raises TimeoutError.
    """
    out: dict[int, list[Edge]] = {}
    for e in lattice.edges:
        out.setdefault(e.source, []).append(e)
    for src in out:
        out[src] = sorted(out[src], key=lambda e: e.target)
    log_beta = np.log(params.beta) if params.beta > 0.0 else -np.inf
    results: list[Candidate] = []

    def walk(vertex: int, text: str, log_sub: float, path: tuple) -> None:
        if deadline is not None and time.monotonic() > deadline:
            raise TimeoutError("candidate enumeration ran out of time")
        edges = out.get(vertex)
        if not edges:
            if path:
                results.append(Candidate(text, lm.log_word_prob(text), path))
            return
        for edge in edges:
            for char, _ in edge.labels:
                step = lm.log_cond_prob(text[-(lm.q - 1) :] if text else "", char)
                nxt = log_sub + step
                if nxt < log_beta:
                    continue
                walk(
                    edge.target,
                    text + char,
                    nxt,
                    path + ((edge.source, edge.target, char),),
                )

    walk(0, "", 0.0, ())
    return results


def length_filter(
    candidates: list[Candidate],
    word_width: int,
    params: LatticeParams,
) -> list[Candidate]:
    """Drop readings too short to plausibly cover the word's width."""
    needed = params.min_len_ratio * word_width
    return [c for c in candidates if params.avg_char_px * len(c.text) >= needed]


def rank_candidates(candidates: list[Candidate], m: int) -> list[Candidate]:
    """Best ``m`` candidates by word probability, ties broken alphabetically."""
    return sorted(candidates, key=lambda c: (-c.log_word_prob, c.text))[:m]
