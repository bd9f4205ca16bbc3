"""Counterpart decoding: rescue words misread between look-alike letters.

Certain letter pairs are written so similarly that the classifier's best
guess is routinely the other one. Treating the lattice output as the
observation and the intended letters as hidden states, with a uniform
emission over each confusable group, the most likely hidden word is just
the highest language-model-probability member of the Cartesian variant
set. ``decode`` exploits that shortcut; ``brute_force_decode`` keeps the
direct hidden-sequence search around as an oracle.
"""

from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass

from .langmodel import CharLM
from .lattice import Candidate

__all__ = [
    "CounterpartSets",
    "DecodedEntry",
    "counterpart_variants",
    "decode",
    "brute_force_decode",
]

VARIANT_CAP = 4096
BRUTE_FORCE_LIMIT = 10**6

_DEFAULT_GROUPS = (("i", "r"), ("o", "d"), ("n", "m"), ("l", "f"), ("c", "e"))


@dataclass(frozen=True)
class CounterpartSets:
    """Disjoint groups of mutually confusable characters."""

    groups: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for group in self.groups:
            if len(group) < 2:
                raise ValueError("a counterpart group needs at least two characters")
            for char in group:
                if len(char) != 1:
                    raise ValueError(f"counterpart entries are single characters, got {char!r}")
                if char in seen:
                    raise ValueError(f"character {char!r} appears in two groups")
                seen.add(char)

    @classmethod
    def default(cls) -> "CounterpartSets":
        return cls(_DEFAULT_GROUPS)

    @classmethod
    def from_json(cls, text: str) -> "CounterpartSets":
        groups = json.loads(text)
        return cls(tuple(tuple(g) for g in groups))

    def to_json(self) -> str:
        return json.dumps([list(g) for g in self.groups])

    def group_of(self, char: str) -> tuple[str, ...]:
        """The confusable group containing ``char``, or just ``char`` itself."""
        for group in self.groups:
            if char in group:
                return tuple(sorted(group))
        return (char,)


@dataclass(frozen=True)
class DecodedEntry:
    """A decoded transcription; revised entries were not in the input list."""

    text: str
    log_word_prob: float
    revised: bool


def counterpart_variants(
    text: str,
    sets: CounterpartSets,
    cap: int = VARIANT_CAP,
    lm: CharLM | None = None,
) -> list[str]:
    """All per-position counterpart substitutions of ``text``.

    The input itself is always among the variants. When the full product
    would exceed ``cap``, enumeration switches to best-first by language
    model score and stops at ``cap`` strings, which needs ``lm``.
    """
    options = [sets.group_of(c) for c in text]
    total = 1
    for opt in options:
        total *= len(opt)
        if total > cap:
            break
    if total <= cap:
        return ["".join(chars) for chars in itertools.product(*options)]
    if lm is None:
        raise ValueError("variant space exceeds the cap; a language model is required")
    collected: list[str] = [text]
    seen = {text}
    # Best-first over prefixes by substring score; counter breaks score ties.
    counter = itertools.count()
    heap: list[tuple[float, int, str]] = [(0.0, next(counter), "")]
    while heap and len(collected) < cap:
        neg_lp, _, prefix = heapq.heappop(heap)
        if len(prefix) == len(text):
            if prefix not in seen:
                seen.add(prefix)
                collected.append(prefix)
            continue
        for char in options[len(prefix)]:
            step = lm.log_cond_prob(prefix[-(lm.q - 1) :] if prefix else "", char)
            heapq.heappush(heap, (neg_lp - step, next(counter), prefix + char))
    return collected


def decode(
    candidates: list[Candidate],
    lm: CharLM,
    sets: CounterpartSets,
    m: int = 10,
) -> list[DecodedEntry]:
    """Rescore every candidate's variant set and keep the best ``m`` readings.

    Output is sorted by word probability with alphabetical tie-breaks
    and never scores below the best input candidate, since each input is
    its own variant.
    """
    input_texts = {c.text for c in candidates}
    scored: dict[str, float] = {}
    for cand in candidates:
        for variant in counterpart_variants(cand.text, sets, lm=lm):
            if variant not in scored:
                scored[variant] = lm.log_word_prob(variant)
    ordered = sorted(scored.items(), key=lambda kv: (-kv[1], kv[0]))[:m]
    return [
        DecodedEntry(text, lp, revised=text not in input_texts)
        for text, lp in ordered
    ]


def brute_force_decode(
    observed: str,
    lm: CharLM,
    sets: CounterpartSets,
    limit: int = BRUTE_FORCE_LIMIT,
) -> str:
    """Direct argmax over hidden counterpart sequences; the decoding oracle.

    Hidden characters range over the observed character's group (groups
    are symmetric, so observation and hidden state share one). Ties go to
    the alphabetically smallest sequence. Refuses hidden spaces larger
    than ``limit``.
    """
    options = [sets.group_of(c) for c in observed]
    total = 1
    for opt in options:
        total *= len(opt)
    if total > limit:
        raise ValueError(f"hidden space of {total} sequences exceeds the limit")
    best_text = None
    best_lp = -float("inf")
    for chars in itertools.product(*options):
        hidden = "".join(chars)
        lp = lm.log_word_prob(hidden)
        if lp > best_lp:
            best_text, best_lp = hidden, lp
    assert best_text is not None
    return best_text
