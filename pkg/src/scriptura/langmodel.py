"""Character q-gram language models with word-boundary markers.

Words are scored between a start marker ``$`` and an end marker ``^``.
Conditioning contexts are character suffixes of length 0 to q-1; the
start marker is the leftmost context symbol and nothing extends past it.
Substring scores use the same conditionals but ignore both markers, so
they can rate word fragments during lattice enumeration.

Counts live in plain nested dicts keyed by context string. Probabilities
are either maximum likelihood or stupid backoff (an unnormalized score
that backs off to shorter contexts with a constant discount, grounded in
an add-one unigram).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable

__all__ = [
    "START",
    "END",
    "DEFAULT_TEXT_SYMBOLS",
    "CharLM",
    "train",
    "tokenize",
]

START = "$"
END = "^"
DEFAULT_TEXT_SYMBOLS = "abcdefghilmnopqrstux"
DEFAULT_Q = 6
MAX_Q = 8
BACKOFF_ALPHA = 0.4

_TOKEN_RE = re.compile(r"[^a-z]+")


def tokenize(text: str) -> tuple[list[str], int]:
    """Lowercase and split raw text into letter runs, folding v to u and j to i.

    Returns the tokens plus a count of characters that were dropped for
    falling outside the default symbol set.
    """
    lowered = text.lower().replace("v", "u").replace("j", "i")
    tokens = []
    dropped = 0
    for raw in _TOKEN_RE.split(lowered):
        if not raw:
            continue
        kept = "".join(c for c in raw if c in DEFAULT_TEXT_SYMBOLS)
        dropped += len(raw) - len(kept)
        if kept:
            tokens.append(kept)
    return tokens, dropped


@dataclass
class CharLM:
    """Counts plus scoring rules for one gram order and smoothing mode."""

    q: int
    smoothing: str  # "none" or "stupid-backoff"
    alpha: float
    symbols: str
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    dropped_symbols: int = 0
    _totals: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not 2 <= self.q <= MAX_Q:
            raise ValueError(f"gram order must be between 2 and {MAX_Q}")
        if self.smoothing not in ("none", "stupid-backoff"):
            raise ValueError(f"unknown smoothing {self.smoothing!r}")
        if self.smoothing == "stupid-backoff" and not 0.0 < self.alpha < 1.0:
            raise ValueError("backoff discount must lie in (0, 1)")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("symbol set has duplicates")
        for marker in (START, END):
            if marker in self.symbols:
                raise ValueError("boundary markers cannot be plain symbols")

    # -- training ----------------------------------------------------------

    def observe(self, word: str) -> None:
        """Add one word's q-gram events.

        Each in-word character and the end marker is counted under every
        context suffix from length 0 up to q-1, stopping at the start
        marker. The end marker stays out of the empty-context pool so
        fragment scores range over in-word characters only.
        """
        seq = START + word + END
        for i in range(1, len(seq)):
            target = seq[i]
            max_len = min(self.q - 1, i)
            for length in range(0, max_len + 1):
                if target == END and length == 0:
                    continue
                context = seq[i - length : i]
                slot = self.counts.setdefault(context, {})
                slot[target] = slot.get(target, 0) + 1
        self._totals.clear()

    # -- probabilities -----------------------------------------------------

    def _total(self, context: str) -> int:
        cached = self._totals.get(context)
        if cached is None:
            cached = sum(self.counts.get(context, {}).values())
            self._totals[context] = cached
        return cached

    def _check_symbol(self, symbol: str) -> None:
        if symbol != END and symbol not in self.symbols:
            raise ValueError(f"symbol {symbol!r} is outside the model alphabet")

    def _trim(self, context: str) -> str:
        return context[-(self.q - 1) :] if self.q > 1 else ""

    def cond_prob(self, context: str, symbol: str) -> float:
        """P(symbol | context), context trimmed to the last q-1 characters."""
        self._check_symbol(symbol)
        ctx = self._trim(context)
        if self.smoothing == "none":
            total = self._total(ctx)
            if total == 0:
                return 0.0
            return self.counts[ctx].get(symbol, 0) / total
        return self._backoff(ctx, symbol)

    def _backoff(self, ctx: str, symbol: str) -> float:
        count = self.counts.get(ctx, {}).get(symbol, 0)
        if count > 0:
            return count / self._total(ctx)
        if ctx:
            return self.alpha * self._backoff(ctx[1:], symbol)
        # Ground: add-one over everything this model can predict.
        vocab = len(self.symbols) + 1
        return (self.counts.get("", {}).get(symbol, 0) + 1) / (self._total("") + vocab)

    def log_cond_prob(self, context: str, symbol: str) -> float:
        p = self.cond_prob(context, symbol)
        return math.log(p) if p > 0.0 else -math.inf

    def word_prob(self, text: str) -> float:
        """Probability of a whole word, both boundary markers included."""
        if not text:
            raise ValueError("cannot score an empty word")
        for c in text:
            self._check_symbol(c)
        seq = START + text + END
        p = 1.0
        for i in range(1, len(seq)):
            p *= self.cond_prob(seq[max(0, i - (self.q - 1)) : i], seq[i])
        return p

    def log_word_prob(self, text: str) -> float:
        if not text:
            raise ValueError("cannot score an empty word")
        for c in text:
            self._check_symbol(c)
        seq = START + text + END
        acc = 0.0
        for i in range(1, len(seq)):
            acc += self.log_cond_prob(seq[max(0, i - (self.q - 1)) : i], seq[i])
        return acc

    def substring_prob(self, text: str) -> float:
        """Probability of a fragment with no boundary markers on either side."""
        if not text:
            return 1.0
        p = 1.0
        for i in range(len(text)):
            p *= self.cond_prob(text[max(0, i - (self.q - 1)) : i], text[i])
        return p

    def log_substring_prob(self, text: str) -> float:
        acc = 0.0
        for i in range(len(text)):
            acc += self.log_cond_prob(text[max(0, i - (self.q - 1)) : i], text[i])
        return acc

    def clamp_order(self, q: int) -> "CharLM":
        """View of the same counts evaluated at a lower gram order."""
        if q > self.q:
            raise ValueError("cannot raise the order of a trained model")
        return CharLM(
            q=q,
            smoothing=self.smoothing,
            alpha=self.alpha,
            symbols=self.symbols,
            counts=self.counts,
            dropped_symbols=self.dropped_symbols,
        )

    # -- serialization -----------------------------------------------------

    def serialize(self) -> bytes:
        """Line-oriented text form: one header, then context/symbol/count rows."""
        smoothing = (
            "none" if self.smoothing == "none" else f"stupid-backoff({self.alpha!r})"
        )
        rows = []
        for context in sorted(self.counts):
            for symbol in sorted(self.counts[context]):
                rows.append(f"{context}\t{symbol}\t{self.counts[context][symbol]}")
        header = (
            f"charlm v1 q={self.q} smoothing={smoothing} "
            f"alphabet={self.symbols} rows={len(rows)}"
        )
        return ("\n".join([header] + rows) + "\n").encode("utf-8")

    @classmethod
    def deserialize(cls, data: bytes) -> "CharLM":
        text = data.decode("utf-8")
        lines = text.split("\n")
        if not lines or not lines[0]:
            raise ValueError("empty language model file")
        head = lines[0].split(" ")
        if len(head) < 3 or head[0] != "charlm":
            raise ValueError("not a language model file")
        if head[1] != "v1":
            raise ValueError(f"unsupported language model version {head[1]!r}")
        fields = dict(part.split("=", 1) for part in head[2:] if "=" in part)
        for key in ("q", "smoothing", "alphabet", "rows"):
            if key not in fields:
                raise ValueError(f"language model header lacks {key}")
        smoothing_field = fields["smoothing"]
        if smoothing_field == "none":
            smoothing, alpha = "none", BACKOFF_ALPHA
        elif smoothing_field.startswith("stupid-backoff(") and smoothing_field.endswith(")"):
            smoothing = "stupid-backoff"
            alpha = float(smoothing_field[len("stupid-backoff(") : -1])
        else:
            raise ValueError(f"unknown smoothing {smoothing_field!r}")
        try:
            n_rows = int(fields["rows"])
        except ValueError:
            raise ValueError("corrupt row count in language model header") from None
        body = [ln for ln in lines[1:] if ln != ""]
        if len(body) != n_rows:
            raise ValueError(
                f"language model file holds {len(body)} rows, header says {n_rows}"
            )
        lm = cls(
            q=int(fields["q"]),
            smoothing=smoothing,
            alpha=alpha,
            symbols=fields["alphabet"],
        )
        for ln in body:
            parts = ln.split("\t")
            if len(parts) != 3:
                raise ValueError(f"malformed language model row {ln!r}")
            context, symbol, count = parts
            slot = lm.counts.setdefault(context, {})
            slot[symbol] = slot.get(symbol, 0) + int(count)
        return lm

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.serialize())

    @classmethod
    def load(cls, path) -> "CharLM":
        with open(path, "rb") as fh:
            return cls.deserialize(fh.read())


def train(
    words: Iterable[str],
    q: int = DEFAULT_Q,
    smoothing: str = "stupid-backoff",
    alpha: float = BACKOFF_ALPHA,
    symbols: str = DEFAULT_TEXT_SYMBOLS,
) -> CharLM:
    """Count q-grams over a word stream.

    Characters outside the symbol set are dropped and tallied on the
    model; words emptied by that cleanup are skipped. An effectively
    empty corpus is an error.
    """
    lm = CharLM(q=q, smoothing=smoothing, alpha=alpha, symbols=symbols)
    seen = 0
    for word in words:
        kept = "".join(c for c in word if c in lm.symbols)
        lm.dropped_symbols += len(word) - len(kept)
        if not kept:
            continue
        lm.observe(kept)
        seen += 1
    if seen == 0:
        raise ValueError("corpus is empty after cleanup")
    return lm
