"""Labeling store logic and the HTTP layer over it."""

from __future__ import annotations

import io
import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from scriptura.classifier import (
    NON_CHARACTER,
    SAMPLE_SIDE,
    SymbolAlphabet,
    load_manifest,
    train_reference,
    validate_distribution,
)
from scriptura.imaging import save_binary_png
from scriptura.labeling import (
    DuplicateVoteError,
    LabelingStore,
    UnknownItemError,
)
from scriptura.server import create_app


def _alphabet() -> SymbolAlphabet:
    return SymbolAlphabet(("top", "bottom", NON_CHARACTER), ("a", "b", ""))


def _items(n: int) -> dict[str, np.ndarray]:
    out = {}
    for k in range(n):
        img = np.zeros((8, 8), dtype=np.uint8)
        img[1 : 3 + (k % 5), 2:6] = 1
        out[f"i{k:04d}"] = img
    return out


def _store(n_items: int = 3, **kwargs) -> LabelingStore:
    return LabelingStore(_alphabet(), _items(n_items), **kwargs)


def _push_votes(store, symbol, item_id, n, tag=""):
    """Give ``item_id`` n votes for ``symbol`` through n fresh tasks."""
    for k in range(n):
        task = store.create_task(symbol)
        assert item_id in task.grid
        store.submit_votes(task.task_id, f"{symbol}{tag}-w{k}", [item_id])


class TestGrids:
    def test_small_pool_fits_in_one_grid(self):
        store = _store(3)
        task = store.create_task("top")
        assert task.task_id == "t000000"
        assert sorted(task.grid) == sorted(_items(3))
        assert len(set(task.grid)) == len(task.grid)

    def test_least_shown_items_come_first(self):
        store = _store(12, grid_size=8)
        first = store.create_task("top")
        assert len(first.grid) == 8
        unseen = set(_items(12)) - set(first.grid)
        second = store.create_task("top")
        assert len(second.grid) == 8
        assert unseen <= set(second.grid)

    def test_grids_are_reproducible_for_a_seed(self):
        a = _store(12, grid_size=8, seed=5)
        b = _store(12, grid_size=8, seed=5)
        assert a.create_task("top").grid == b.create_task("top").grid

    def test_unknown_symbol_is_rejected(self):
        with pytest.raises(KeyError):
            _store().create_task("zz")

    def test_exhausted_pool_is_an_error(self):
        store = _store(1)
        _push_votes(store, "top", "i0000", 3)
        store.finalize()
        with pytest.raises(ValueError, match="no unfinalized"):
            store.create_task("top")

    def test_finalized_items_leave_the_grids(self):
        store = _store(3)
        _push_votes(store, "top", "i0000", 3)
        store.finalize()
        task = store.create_task("bottom")
        assert "i0000" not in task.grid
        assert sorted(task.grid) == ["i0001", "i0002"]

    def test_unknown_task_lookup(self):
        with pytest.raises(KeyError, match="unknown task"):
            _store().get_task("t999999")


class TestVotes:
    def test_ticks_tally_under_the_task_symbol(self):
        store = _store(3)
        task = store.create_task("top")
        store.submit_votes(task.task_id, "w1", ["i0000", "i0002"])
        tallies = {it.item_id: dict(it.tallies) for it in store.items()}
        assert tallies == {"i0000": {"top": 1}, "i0001": {}, "i0002": {"top": 1}}

    def test_empty_selection_still_counts_as_a_submission(self):
        store = _store(3)
        task = store.create_task("top")
        store.submit_votes(task.task_id, "w1", [])
        assert store.status()["submissions"] == 1
        with pytest.raises(DuplicateVoteError):
            store.submit_votes(task.task_id, "w1", [])

    def test_one_submission_per_worker_per_task(self):
        store = _store(3)
        task = store.create_task("top")
        store.submit_votes(task.task_id, "w1", ["i0000"])
        with pytest.raises(DuplicateVoteError):
            store.submit_votes(task.task_id, "w1", ["i0001"])
        store.submit_votes(task.task_id, "w2", ["i0001"])  # other workers fine
        other = store.create_task("top")
        store.submit_votes(other.task_id, "w1", ["i0001"])  # other tasks fine

    def test_selection_must_come_from_the_grid(self):
        store = _store(3)
        task = store.create_task("top")
        with pytest.raises(UnknownItemError, match="not in task grid"):
            store.submit_votes(task.task_id, "w1", ["nope"])
        with pytest.raises(UnknownItemError, match="duplicate"):
            store.submit_votes(task.task_id, "w1", ["i0000", "i0000"])

    def test_worker_id_and_task_validation(self):
        store = _store(3)
        task = store.create_task("top")
        with pytest.raises(ValueError, match="worker_id"):
            store.submit_votes(task.task_id, "", ["i0000"])
        with pytest.raises(KeyError):
            store.submit_votes("t999999", "w1", ["i0000"])

    def test_fifty_concurrent_submissions_conserve_every_vote(self, tmp_path):
        n = 10
        store = _store(n, journal_path=str(tmp_path / "journal.jsonl"))
        task = store.create_task("top")
        workers = [(f"w{k:02d}", [f"i{k % n:04d}"]) for k in range(50)]

        def submit(args):
            worker, selected = args
            store.submit_votes(task.task_id, worker, selected)

        with ThreadPoolExecutor(max_workers=16) as pool:
            list(pool.map(submit, workers))
        tallies = {it.item_id: it.tallies.get("top", 0) for it in store.items()}
        assert tallies == {f"i{j:04d}": 5 for j in range(n)}
        assert store.status()["votes"] == 50
        assert store.status()["submissions"] == 50


class TestFinalize:
    def test_clear_majority_takes_the_symbol(self):
        store = _store(3)
        _push_votes(store, "top", "i0000", 5)
        _push_votes(store, "bottom", "i0000", 1)
        fixed = store.finalize(quorum=3, margin=2)
        assert fixed == {"i0000": "top"}

    def test_narrow_or_tied_votes_become_non_character(self):
        store = _store(3)
        _push_votes(store, "top", "i0000", 3)
        _push_votes(store, "bottom", "i0000", 3)
        fixed = store.finalize(quorum=3, margin=2)
        assert fixed == {"i0000": NON_CHARACTER}

    def test_margin_boundary_is_inclusive(self):
        store = _store(3)
        _push_votes(store, "top", "i0000", 3)
        _push_votes(store, "bottom", "i0000", 1)
        assert store.finalize(quorum=3, margin=2) == {"i0000": "top"}

    def test_items_short_of_quorum_stay_pending(self):
        store = _store(3)
        _push_votes(store, "top", "i0000", 1)
        assert store.finalize(quorum=3, margin=2) == {}
        assert store.status()["pending"] == 3

    def test_second_pass_reports_nothing_new(self):
        store = _store(3)
        _push_votes(store, "top", "i0000", 3)
        assert store.finalize() == {"i0000": "top"}
        assert store.finalize() == {}

    def test_parameter_validation(self):
        store = _store(3)
        with pytest.raises(ValueError, match="quorum"):
            store.finalize(quorum=0)
        with pytest.raises(ValueError, match="margin"):
            store.finalize(margin=0)


class TestJournal:
    def _drive(self, store):
        _push_votes(store, "top", "i0000", 3)
        _push_votes(store, "bottom", "i0001", 2, tag="x")
        store.finalize()
        task = store.create_task("bottom")
        store.submit_votes(task.task_id, "replay-w", [])
        return task

    def test_replay_reproduces_the_live_store(self, tmp_path):
        path = str(tmp_path / "journal.jsonl")
        live = LabelingStore(_alphabet(), _items(4), journal_path=path)
        task = self._drive(live)
        live.close()
        back = LabelingStore(_alphabet(), _items(4), journal_path=path)
        assert back.status() == live.status()
        assert back.get_task(task.task_id) == task
        tallies = lambda s: {it.item_id: dict(it.tallies) for it in s.items()}
        labels = lambda s: {it.item_id: it.finalized_label for it in s.items()}
        assert tallies(back) == tallies(live)
        assert labels(back) == labels(live)

    def test_duplicate_guard_survives_a_restart(self, tmp_path):
        path = str(tmp_path / "journal.jsonl")
        live = LabelingStore(_alphabet(), _items(4), journal_path=path)
        task = self._drive(live)
        live.close()
        back = LabelingStore(_alphabet(), _items(4), journal_path=path)
        with pytest.raises(DuplicateVoteError):
            back.submit_votes(task.task_id, "replay-w", [])

    def test_restarted_store_continues_the_task_sequence(self, tmp_path):
        path = str(tmp_path / "journal.jsonl")
        live = LabelingStore(_alphabet(), _items(4), journal_path=path)
        live.create_task("top")
        live.close()
        back = LabelingStore(_alphabet(), _items(4), journal_path=path)
        assert back.create_task("top").task_id == "t000001"

    def test_unknown_journal_events_are_rejected(self, tmp_path):
        path = tmp_path / "journal.jsonl"
        path.write_text('{"event": "bogus"}\n')
        with pytest.raises(ValueError, match="journal event"):
            LabelingStore(_alphabet(), _items(2), journal_path=str(path))


class TestExport:
    def _finalized_store(self):
        store = _store(3)
        _push_votes(store, "top", "i0000", 3)
        _push_votes(store, "bottom", "i0001", 3)
        _push_votes(store, "top", "i0002", 1)  # stays pending
        store.finalize()
        return store

    def test_samples_are_normalized_crowd_labels(self):
        store = self._finalized_store()
        samples = store.export_samples()
        assert len(samples) == 2
        assert [s.label for s in samples] == [0, 1]
        assert all(s.origin == "crowd" for s in samples)
        assert all(s.image.shape == (SAMPLE_SIDE, SAMPLE_SIDE) for s in samples)

    def test_manifest_lines_cover_only_finalized_items(self):
        store = self._finalized_store()
        rows = [json.loads(line) for line in store.export_manifest_lines()]
        assert [r["path"] for r in rows] == ["img/i0000.png", "img/i0001.png"]
        assert [r["label"] for r in rows] == ["top", "bottom"]
        assert all(r["origin"] == "crowd" for r in rows)
        assert rows[0]["tallies"] == {"top": 3}

    def test_exported_manifest_feeds_training(self, tmp_path):
        store = self._finalized_store()
        (tmp_path / "img").mkdir()
        for item in store.items():
            if item.finalized_label is not None:
                save_binary_png(item.image, tmp_path / "img" / f"{item.item_id}.png")
        manifest = tmp_path / "manifest.jsonl"
        manifest.write_text("\n".join(store.export_manifest_lines()) + "\n")
        samples = load_manifest(manifest, store.alphabet)
        assert len(samples) == 2
        model = train_reference(
            samples, store.alphabet, epochs=1, rng=np.random.default_rng(0)
        )
        probs = model.classify(np.ones((6, 6), dtype=np.uint8))
        validate_distribution(probs, 3)


@pytest.fixture()
def client(tmp_path):
    exemplars = {
        "top": {
            "positive": [np.eye(5, dtype=np.uint8)],
            "negative": [np.ones((3, 3), dtype=np.uint8)],
        }
    }
    store = LabelingStore(
        _alphabet(),
        _items(5),
        journal_path=str(tmp_path / "journal.jsonl"),
        exemplars=exemplars,
    )
    app = create_app(store)
    with TestClient(app) as tc:
        tc.store = store
        yield tc


class TestHTTP:
    def test_symbols_list_names_chars_and_exemplars(self, client):
        body = client.get("/api/symbols").json()
        assert [s["name"] for s in body] == ["top", "bottom", NON_CHARACTER]
        assert [s["char"] for s in body] == ["a", "b", ""]
        assert body[0]["exemplars"]["positive"] == ["/img/exemplar/top/positive/0.png"]
        assert body[1]["exemplars"]["positive"] == []

    def test_task_flow(self, client):
        created = client.post("/api/tasks", params={"symbol": "top"})
        assert created.status_code == 200
        payload = created.json()
        assert payload["symbol"] == "top"
        assert len(payload["items"]) == 5
        fetched = client.get(f"/api/tasks/{payload['task_id']}")
        assert fetched.json() == payload
        item = payload["items"][0]
        png = client.get(item["url"])
        assert png.status_code == 200
        assert png.headers["content-type"] == "image/png"
        assert png.content.startswith(b"\x89PNG")

    def test_item_png_renders_ink_as_black(self, client):
        payload = client.post("/api/tasks", params={"symbol": "top"}).json()
        item = payload["items"][0]
        png = client.get(item["url"]).content
        gray = np.array(Image.open(io.BytesIO(png)).convert("L"))
        bits = client.store.item_image(item["id"])
        np.testing.assert_array_equal(gray == 0, bits.astype(bool))

    def test_unknown_symbol_and_task_errors(self, client):
        assert client.post("/api/tasks", params={"symbol": "zz"}).status_code == 400
        assert client.get("/api/tasks/t999999").status_code == 404

    def test_vote_endpoint_and_error_codes(self, client):
        payload = client.post("/api/tasks", params={"symbol": "top"}).json()
        task_id = payload["task_id"]
        first = payload["items"][0]["id"]
        ok = client.post(
            f"/api/tasks/{task_id}/votes",
            json={"worker_id": "w1", "selected": [first]},
        )
        assert ok.status_code == 200
        assert ok.json()["ok"] is True
        dup = client.post(
            f"/api/tasks/{task_id}/votes",
            json={"worker_id": "w1", "selected": []},
        )
        assert dup.status_code == 409
        bad_item = client.post(
            f"/api/tasks/{task_id}/votes",
            json={"worker_id": "w2", "selected": ["nope"]},
        )
        assert bad_item.status_code == 400
        empty_worker = client.post(
            f"/api/tasks/{task_id}/votes",
            json={"worker_id": "", "selected": []},
        )
        assert empty_worker.status_code == 400
        missing = client.post(
            "/api/tasks/t999999/votes",
            json={"worker_id": "w3", "selected": []},
        )
        assert missing.status_code == 404

    def test_status_finalize_and_export(self, client):
        for k in range(3):
            payload = client.post("/api/tasks", params={"symbol": "top"}).json()
            target = next(i["id"] for i in payload["items"] if i["id"] == "i0000")
            client.post(
                f"/api/tasks/{payload['task_id']}/votes",
                json={"worker_id": f"w{k}", "selected": [target]},
            )
        status = client.get("/api/pool/status").json()
        assert status["votes"] == 3
        done = client.post("/api/finalize", params={"quorum": 3, "margin": 2})
        assert done.status_code == 200
        assert done.json()["finalized"] == {"i0000": "top"}
        assert done.json()["status"]["finalized"] == 1
        assert client.post("/api/finalize", params={"quorum": 0}).status_code == 400
        export = client.get("/api/export")
        assert export.status_code == 200
        rows = [json.loads(line) for line in export.text.strip().splitlines()]
        assert rows == [
            {
                "path": "img/i0000.png",
                "label": "top",
                "origin": "crowd",
                "tallies": {"top": 3},
            }
        ]

    def test_exemplar_images(self, client):
        ok = client.get("/img/exemplar/top/positive/0.png")
        assert ok.status_code == 200
        assert ok.content.startswith(b"\x89PNG")
        assert client.get("/img/exemplar/top/positive/1.png").status_code == 404
        assert client.get("/img/unknown.png").status_code == 404

    def test_pool_exhaustion_returns_conflict(self, tmp_path):
        store = LabelingStore(_alphabet(), _items(1))
        with TestClient(create_app(store)) as tc:
            for k in range(3):
                payload = tc.post("/api/tasks", params={"symbol": "top"}).json()
                tc.post(
                    f"/api/tasks/{payload['task_id']}/votes",
                    json={"worker_id": f"w{k}", "selected": ["i0000"]},
                )
            tc.post("/api/finalize")
            assert tc.post("/api/tasks", params={"symbol": "top"}).status_code == 409

    def test_static_mount_serves_the_ui(self, tmp_path):
        static = tmp_path / "ui"
        static.mkdir()
        (static / "index.html").write_text("<html><body>labeler</body></html>")
        store = LabelingStore(_alphabet(), _items(2))
        with TestClient(create_app(store, static_dir=str(static))) as tc:
            page = tc.get("/")
            assert page.status_code == 200
            assert "labeler" in page.text
