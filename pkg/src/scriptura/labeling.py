"""Crowd labeling of segment images: task grids, vote tallies, finalization.

Workers see one symbol at a time next to a grid of candidate images and
tick the ones that match. Every tick adds one vote for that symbol on
that image. Once an image has enough votes in total, it is finalized to
the majority symbol when the lead is clear, and to the non-character
class otherwise. Finalized items become normalized training samples.

All state changes go through one lock and an append-only journal, so a
store reloaded from its journal matches the live one.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

import numpy as np

from .classifier import (
    NON_CHARACTER,
    LabeledSample,
    SymbolAlphabet,
    normalize_sample,
)

__all__ = [
    "GRID_SIZE",
    "DEFAULT_QUORUM",
    "DEFAULT_MARGIN",
    "PoolItem",
    "LabelingTask",
    "DuplicateVoteError",
    "UnknownItemError",
    "LabelingStore",
]

GRID_SIZE = 40
DEFAULT_QUORUM = 3
DEFAULT_MARGIN = 2


class DuplicateVoteError(RuntimeError):
    """A worker already submitted votes for this task."""


class UnknownItemError(KeyError):
    """A vote referenced an item outside the task grid."""


@dataclass
class PoolItem:
    item_id: str
    image: np.ndarray
    tallies: dict[str, int] = field(default_factory=dict)
    appearances: int = 0
    finalized_label: str | None = None

    @property
    def total_votes(self) -> int:
        return sum(self.tallies.values())


@dataclass(frozen=True)
class LabelingTask:
    task_id: str
    symbol: str
    grid: tuple[str, ...]


class LabelingStore:
    """In-memory pool plus tasks and votes, journaled to JSON lines."""

    def __init__(
        self,
        alphabet: SymbolAlphabet,
        items: dict[str, np.ndarray],
        journal_path: str | None = None,
        seed: int = 0,
        grid_size: int = GRID_SIZE,
        exemplars: dict[str, dict[str, list[np.ndarray]]] | None = None,
    ) -> None:
        self.alphabet = alphabet
        self.grid_size = grid_size
        self.seed = seed
        self.exemplars = exemplars or {}
        self._lock = threading.Lock()
        self._pool: dict[str, PoolItem] = {
            item_id: PoolItem(item_id, image) for item_id, image in sorted(items.items())
        }
        self._tasks: dict[str, LabelingTask] = {}
        self._submissions: set[tuple[str, str]] = set()
        self._journal_path = journal_path
        self._journal_fh = None
        if journal_path and os.path.exists(journal_path):
            self._replay(journal_path)
        if journal_path:
            self._journal_fh = open(journal_path, "a", encoding="utf-8")

    # -- journal -----------------------------------------------------------

    def _append(self, event: dict) -> None:
        if self._journal_fh is not None:
            self._journal_fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            self._journal_fh.flush()

    def _replay(self, path: str) -> None:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = json.loads(line)
                kind = event["event"]
                if kind == "task":
                    task = LabelingTask(
                        event["task_id"], event["symbol"], tuple(event["grid"])
                    )
                    self._tasks[task.task_id] = task
                    for item_id in task.grid:
                        self._pool[item_id].appearances += 1
                elif kind == "votes":
                    self._apply_votes(
                        event["task_id"], event["worker_id"], event["selected"]
                    )
                elif kind == "finalize":
                    for item_id, label in event["labels"].items():
                        self._pool[item_id].finalized_label = label
                else:
                    raise ValueError(f"unknown journal event {kind!r}")

    def close(self) -> None:
        if self._journal_fh is not None:
            self._journal_fh.close()
            self._journal_fh = None

    # -- tasks and votes ----------------------------------------------------

    def symbol_names(self) -> list[str]:
        return list(self.alphabet.names)

    def create_task(self, symbol: str) -> LabelingTask:
        """Draw a grid for ``symbol``, least-shown items first.

        Within the appearance count where the grid fills up, items are
        drawn uniformly without replacement. Grids are reproducible: the
        draw is seeded by the store seed and the task ordinal.
        """
        self.alphabet.index_of(symbol)
        with self._lock:
            open_items = [
                it for it in self._pool.values() if it.finalized_label is None
            ]
            if not open_items:
                raise ValueError("no unfinalized items left to label")
            rng = np.random.default_rng((self.seed, len(self._tasks)))
            chosen: list[PoolItem] = []
            for count in sorted({it.appearances for it in open_items}):
                bucket = sorted(
                    (it for it in open_items if it.appearances == count),
                    key=lambda it: it.item_id,
                )
                room = self.grid_size - len(chosen)
                if room <= 0:
                    break
                if len(bucket) <= room:
                    chosen.extend(bucket)
                else:
                    picks = rng.choice(len(bucket), size=room, replace=False)
                    chosen.extend(bucket[int(k)] for k in picks)
            grid_ids = [it.item_id for it in chosen]
            order = rng.permutation(len(grid_ids))
            grid = tuple(grid_ids[int(k)] for k in order)
            task = LabelingTask(f"t{len(self._tasks):06d}", symbol, grid)
            self._tasks[task.task_id] = task
            for item_id in grid:
                self._pool[item_id].appearances += 1
            self._append(
                {
                    "event": "task",
                    "task_id": task.task_id,
                    "symbol": symbol,
                    "grid": list(grid),
                }
            )
            return task

    def get_task(self, task_id: str) -> LabelingTask:
        try:
            return self._tasks[task_id]
        except KeyError:
            raise KeyError(f"unknown task {task_id!r}") from None

    def _apply_votes(self, task_id: str, worker_id: str, selected: list[str]) -> None:
        task = self._tasks[task_id]
        key = (task_id, worker_id)
        if key in self._submissions:
            raise DuplicateVoteError(
                f"worker {worker_id!r} already voted on task {task_id}"
            )
        grid = set(task.grid)
        bad = [s for s in selected if s not in grid]
        if bad:
            raise UnknownItemError(f"items not in task grid: {bad}")
        if len(set(selected)) != len(selected):
            raise UnknownItemError("duplicate items in selection")
        self._submissions.add(key)
        for item_id in selected:
            item = self._pool[item_id]
            item.tallies[task.symbol] = item.tallies.get(task.symbol, 0) + 1

    def submit_votes(self, task_id: str, worker_id: str, selected: list[str]) -> None:
        """Record one worker's ticks for a task. Empty selections count too."""
        if not worker_id:
            raise ValueError("worker_id required")
        with self._lock:
            self.get_task(task_id)
            self._apply_votes(task_id, worker_id, list(selected))
            self._append(
                {
                    "event": "votes",
                    "task_id": task_id,
                    "worker_id": worker_id,
                    "selected": list(selected),
                }
            )

    # -- finalization and export ---------------------------------------------

    def finalize(
        self, quorum: int = DEFAULT_QUORUM, margin: int = DEFAULT_MARGIN
    ) -> dict[str, str]:
        """Label every item with enough votes; returns the newly fixed labels.

        The top symbol wins when it leads the runner-up by at least
        ``margin`` votes; otherwise the item is labeled non-character.
        Items short of ``quorum`` total votes stay pending.
        """
        if quorum < 1:
            raise ValueError("quorum must be at least 1")
        if margin < 1:
            raise ValueError("margin must be at least 1")
        with self._lock:
            fixed: dict[str, str] = {}
            for item in self._pool.values():
                if item.finalized_label is not None:
                    continue
                if item.total_votes < quorum:
                    continue
                ordered = sorted(item.tallies.items(), key=lambda kv: (-kv[1], kv[0]))
                top_symbol, top_votes = ordered[0]
                runner_up = ordered[1][1] if len(ordered) > 1 else 0
                label = top_symbol if top_votes - runner_up >= margin else NON_CHARACTER
                item.finalized_label = label
                fixed[item.item_id] = label
            if fixed:
                self._append(
                    {
                        "event": "finalize",
                        "quorum": quorum,
                        "margin": margin,
                        "labels": fixed,
                    }
                )
            return fixed

    def status(self) -> dict:
        with self._lock:
            items = list(self._pool.values())
            return {
                "total_items": len(items),
                "finalized": sum(it.finalized_label is not None for it in items),
                "pending": sum(it.finalized_label is None for it in items),
                "votes": sum(it.total_votes for it in items),
                "tasks": len(self._tasks),
                "submissions": len(self._submissions),
            }

    def item_image(self, item_id: str) -> np.ndarray:
        return self._pool[item_id].image

    def items(self) -> list[PoolItem]:
        return list(self._pool.values())

    def export_samples(self) -> list[LabeledSample]:
        """Finalized items as normalized training samples."""
        out = []
        for item in self._pool.values():
            if item.finalized_label is None:
                continue
            out.append(
                LabeledSample(
                    normalize_sample(item.image),
                    self.alphabet.index_of(item.finalized_label),
                    origin="crowd",
                )
            )
        return out

    def export_manifest_lines(self) -> list[str]:
        """JSON-lines manifest of finalized items, image paths relative to the service."""
        lines = []
        for item in sorted(self._pool.values(), key=lambda it: it.item_id):
            if item.finalized_label is None:
                continue
            lines.append(
                json.dumps(
                    {
                        "path": f"img/{item.item_id}.png",
                        "label": item.finalized_label,
                        "origin": "crowd",
                        "tallies": item.tallies,
                    },
                    ensure_ascii=False,
                )
            )
        return lines
