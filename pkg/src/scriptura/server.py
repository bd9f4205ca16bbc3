"""HTTP service for the crowd labeling workflow.

Thin JSON layer over :class:`scriptura.labeling.LabelingStore` plus PNG
rendering for pool items and exemplars. A static directory, when given,
is served at the root so the labeling UI and the API share one origin.
"""

from __future__ import annotations

import io
from urllib.parse import quote

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image
from pydantic import BaseModel

from .labeling import (
    DEFAULT_MARGIN,
    DEFAULT_QUORUM,
    DuplicateVoteError,
    LabelingStore,
    LabelingTask,
    UnknownItemError,
)

__all__ = ["create_app"]


def _png_bytes(bits: np.ndarray) -> bytes:
    gray = np.where(bits.astype(bool), 0, 255).astype(np.uint8)
    img = Image.fromarray(gray, mode="L").convert("1", dither=Image.Dither.NONE)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


class VoteSubmission(BaseModel):
    worker_id: str
    selected: list[str]


def create_app(store: LabelingStore, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="scriptura labeling service")

    def exemplar_urls(symbol: str) -> dict[str, list[str]]:
        bank = store.exemplars.get(symbol, {})
        return {
            kind: [
                f"/img/exemplar/{quote(symbol)}/{kind}/{idx}.png"
                for idx in range(len(bank.get(kind, [])))
            ]
            for kind in ("positive", "negative")
        }

    def task_payload(task: LabelingTask) -> dict:
        return {
            "task_id": task.task_id,
            "symbol": task.symbol,
            "exemplars": exemplar_urls(task.symbol),
            "items": [
                {"id": item_id, "url": f"/img/{item_id}.png"} for item_id in task.grid
            ],
        }

    @app.get("/api/symbols")
    def list_symbols() -> list[dict]:
        out = []
        for name, char in zip(store.alphabet.names, store.alphabet.chars):
            out.append({"name": name, "char": char, "exemplars": exemplar_urls(name)})
        return out

    @app.post("/api/tasks")
    def create_task(symbol: str) -> dict:
        try:
            task = store.create_task(symbol)
        except KeyError:
            raise HTTPException(status_code=400, detail=f"unknown symbol {symbol!r}")
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return task_payload(task)

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str) -> dict:
        try:
            task = store.get_task(task_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown task {task_id!r}")
        return task_payload(task)

    @app.post("/api/tasks/{task_id}/votes")
    def submit_votes(task_id: str, submission: VoteSubmission) -> dict:
        try:
            store.submit_votes(task_id, submission.worker_id, submission.selected)
        except DuplicateVoteError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except UnknownItemError as exc:
            raise HTTPException(status_code=400, detail=str(exc.args[0]))
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown task {task_id!r}")
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"ok": True, "task_id": task_id}

    @app.get("/api/pool/status")
    def pool_status() -> dict:
        return store.status()

    @app.post("/api/finalize")
    def finalize(quorum: int = DEFAULT_QUORUM, margin: int = DEFAULT_MARGIN) -> dict:
        try:
            labels = store.finalize(quorum=quorum, margin=margin)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"finalized": labels, "status": store.status()}

    @app.get("/api/export", response_class=PlainTextResponse)
    def export_manifest() -> str:
        lines = store.export_manifest_lines()
        return "\n".join(lines) + ("\n" if lines else "")

    @app.get("/img/exemplar/{symbol}/{kind}/{idx}.png")
    def exemplar_image(symbol: str, kind: str, idx: int) -> Response:
        bank = store.exemplars.get(symbol, {}).get(kind, [])
        if not 0 <= idx < len(bank):
            raise HTTPException(status_code=404, detail="no such exemplar")
        return Response(content=_png_bytes(bank[idx]), media_type="image/png")

    @app.get("/img/{item_id}.png")
    def item_image(item_id: str) -> Response:
        try:
            bits = store.item_image(item_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown item {item_id!r}")
        return Response(content=_png_bytes(bits), media_type="image/png")

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
