"""Transcription quality metrics and parameter sweeps.

The headline numbers: mean reciprocal rank of the truth within the
ranked readings, mean per-word transcription time, coverage of the truth
within the top m for several m, and two histograms (edit distance of the
best reading, rank of the truth with -1 for missing). A sweep reruns the
word set over a parameter grid and tabulates the same numbers per point.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from dataclasses import dataclass

import numpy as np

from .imaging import WordImage
from .kernels import levenshtein_codes
from .pipeline import TranscriptionEngine, WordResult, _safe_transcribe

__all__ = [
    "levenshtein",
    "reciprocal_rank",
    "EvalReport",
    "compute_report",
    "sweep",
    "write_sweep_csv",
    "load_truth_tsv",
    "write_truth_tsv",
]

DEFAULT_M_VALUES = (1, 3, 5, 10)
SWEEP_TIMEOUT_S = 120.0
SWEEP_AXES = ("eta", "theta1", "theta2", "beta", "q")


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance between two strings."""
    ca = np.array([ord(c) for c in a], dtype=np.int32)
    cb = np.array([ord(c) for c in b], dtype=np.int32)
    return levenshtein_codes(ca, cb)


def _truth_rank(result: WordResult, truth: str) -> int:
    """1-based rank of the exact truth among the readings, 0 when absent."""
    for k, entry in enumerate(result.transcriptions):
        if entry.text == truth:
            return k + 1
    return 0


def reciprocal_rank(result: WordResult, truth: str) -> float:
    """1/rank of the exact truth in the ranked readings, 0 when absent."""
    rank = _truth_rank(result, truth)
    return 1.0 / rank if rank else 0.0


@dataclass(frozen=True)
class EvalReport:
    """Aggregate metrics over one result set."""

    n_words: int
    mrr: float
    mwpt_ms: float
    m_precision: dict[int, float]
    ed_histogram: dict[int, float]
    rank_histogram: dict[int, float]

    def to_json_dict(self) -> dict:
        return {
            "n_words": self.n_words,
            "mrr": self.mrr,
            "mwpt_ms": self.mwpt_ms,
            "m_precision": {str(k): v for k, v in sorted(self.m_precision.items())},
            "ed_histogram": {str(k): v for k, v in sorted(self.ed_histogram.items())},
            "rank_histogram": {
                str(k): v for k, v in sorted(self.rank_histogram.items())
            },
        }


def compute_report(
    results: list[WordResult],
    truth: dict[str, str],
    timings_ms: list[float] | None = None,
    m_values: tuple[int, ...] = DEFAULT_M_VALUES,
) -> EvalReport:
    """Score results against ground truth.

    Every result's word id must appear in the truth table. The edit
    distance histogram covers words with at least one reading; the rank
    histogram covers all words, bucketing the truth's rank and counting
    missing truths under -1. Both normalize to unit mass.
    """
    if not results:
        raise ValueError("no results to score")
    for r in results:
        if r.word_id not in truth:
            raise KeyError(f"word {r.word_id!r} missing from ground truth")
    if timings_ms is None:
        timings_ms = [r.timing_ms for r in results]
    rr_values = []
    ed_counts: dict[int, int] = {}
    rank_counts: dict[int, int] = {}
    hits_at = {m: 0 for m in m_values}
    scored_top1 = 0
    for r in results:
        expected = truth[r.word_id]
        rank = _truth_rank(r, expected)
        rr_values.append(1.0 / rank if rank else 0.0)
        bucket = rank if rank else -1
        rank_counts[bucket] = rank_counts.get(bucket, 0) + 1
        for m in m_values:
            if 1 <= rank <= m:
                hits_at[m] += 1
        if r.transcriptions:
            scored_top1 += 1
            d = levenshtein(r.transcriptions[0].text, expected)
            ed_counts[d] = ed_counts.get(d, 0) + 1
    n = len(results)
    return EvalReport(
        n_words=n,
        mrr=float(np.mean(rr_values)),
        mwpt_ms=float(np.mean(timings_ms)),
        m_precision={m: hits_at[m] / n for m in m_values},
        ed_histogram={
            d: c / scored_top1 for d, c in sorted(ed_counts.items())
        }
        if scored_top1
        else {},
        rank_histogram={b: c / n for b, c in sorted(rank_counts.items())},
    )


def sweep(
    grid: dict[str, list],
    words: list[WordImage],
    truth: dict[str, str],
    engine: TranscriptionEngine,
    timeout_s: float = SWEEP_TIMEOUT_S,
    m_values: tuple[int, ...] = DEFAULT_M_VALUES,
) -> list[dict]:
    """Re-transcribe the word set across a parameter grid.

    Grid axes: eta, theta1, theta2, beta (lattice knobs) and q (gram
    order, clamping the engine's model). Words exceeding ``timeout_s``
    on one grid point count as untranscribed there. Returns one row of
    parameters plus metrics per grid point, in grid order.
    """
    for axis in grid:
        if axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {axis!r}")
    axes = sorted(grid)
    rows = []
    for values in itertools.product(*(grid[a] for a in axes)):
        point = dict(zip(axes, values))
        q = point.pop("q", None)
        run = engine.with_params(**point)
        if q is not None:
            run = TranscriptionEngine(
                classifier=run.classifier,
                lm=run.lm.clamp_order(q),
                counterparts=run.counterparts,
                params=run.params,
                method=run.method,
                gap=run.gap,
                parallelism=run.parallelism,
            )
        results = [_safe_transcribe(w, run, timeout_s) for w in words]
        report = compute_report(results, truth, m_values=m_values)
        row = dict(zip(axes, values))
        row.update(
            {
                "mrr": report.mrr,
                "mwpt_ms": report.mwpt_ms,
                "top1": report.m_precision.get(1, 0.0),
                "untranscribed": sum(r.untranscribed for r in results) / len(results),
            }
        )
        rows.append(row)
    return rows


def write_sweep_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValueError("empty sweep table")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def load_truth_tsv(path) -> dict[str, str]:
    """Read a two-column word id / transcription table."""
    truth: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"malformed truth row {line_no}: {line!r}")
            truth[parts[0]] = parts[1]
    return truth


def write_truth_tsv(truth: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word_id in sorted(truth):
            fh.write(f"{word_id}\t{truth[word_id]}\n")


def time_call(fn, *args, **kwargs) -> tuple[float, object]:
    """Wall-clock one call; returns (milliseconds, result)."""
    t0 = time.perf_counter()
    result = fn(*args, **kwargs)
    return (time.perf_counter() - t0) * 1000.0, result
