"""HTTP review service driven by the browser UI.

Routes:
  GET  /api/queue?offset&limit          page of pending flagged records
  GET  /api/record/{id}                 full record, image URLs, mask RLE
  POST /api/record/{id}/decision        {action, manual_box?, reviewer}
  GET  /api/stats                       flag counts and queue depth
  /images/source/*, /images/fg/*        static image trees
  /                                     review UI static assets (if built)

Decision writes are serialized under one lock; a decision on a record that
already settled returns 409, an unknown id returns 404.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .images import load_image
from .manifest import BoundingBox, DatasetManifest, ReviewState, save_manifest
from .pipeline import PipelineConfig
from .qa import enqueue_flagged, flag_counts
from .review import (
    DecisionConflict,
    DecisionInvalid,
    DecisionLog,
    RecordNotFound,
    ReviewDecision,
    apply_decision,
    stamp,
)


class BoxPayload(BaseModel):
    x: int
    y: int
    w: int
    h: int


class DecisionPayload(BaseModel):
    action: str
    manual_box: Optional[BoxPayload] = None
    reviewer: str = "anonymous"


class ReviewStore:
    """Mutable review session: one manifest, one decision log, one lock."""

    def __init__(
        self,
        manifest: DatasetManifest,
        config: PipelineConfig,
        log_path: str | Path,
        manifest_path: Optional[Path] = None,
        write_images: bool = True,
    ):
        self.manifest = manifest
        self.config = config
        self.log = DecisionLog(log_path)
        self.manifest_path = Path(manifest_path) if manifest_path else None
        self.write_images = write_images
        self._lock = threading.Lock()

    def queue_page(self, offset: int, limit: int) -> dict:
        pending = enqueue_flagged(self.manifest)
        page = pending[offset : offset + limit]
        return {
            "total": len(pending),
            "offset": offset,
            "limit": limit,
            "items": [
                {
                    "record_id": rec.record_id,
                    "flags": [f.kind.value for f in rec.flags],
                    "thumbnail_url": f"/images/source/{rec.source_path}",
                }
                for rec in page
            ],
        }

    def record_view(self, record_id: str) -> dict:
        rec = self.manifest.record_by_id(record_id)  # KeyError -> 404 upstream
        image = load_image(self.config.source_root / rec.source_path)
        view = {
            "record": rec.to_obj(),
            "width": image.width,
            "height": image.height,
            "image_url": f"/images/source/{rec.source_path}",
        }
        if rec.fg_path:
            view["fg_url"] = f"/images/fg/{rec.fg_path}"
        return view

    def decide(self, record_id: str, payload: DecisionPayload) -> dict:
        box = None
        if payload.manual_box is not None:
            b = payload.manual_box
            box = BoundingBox(b.x, b.y, b.w, b.h)
        decision = stamp(
            ReviewDecision(record_id, payload.action, box, payload.reviewer)
        )
        with self._lock:
            apply_decision(
                decision, self.manifest, self.config, write_images=self.write_images
            )
            self.log.append(decision)
            if self.manifest_path:
                save_manifest(self.manifest, self.manifest_path)
        return self.record_view(record_id)

    def stats(self) -> dict:
        total = len(self.manifest)
        counts = flag_counts(self.manifest)
        flagged = sum(1 for r in self.manifest.records if r.flags)
        by_review = {
            state.value: sum(1 for r in self.manifest.records if r.review == state)
            for state in ReviewState
        }
        per_split = {}
        for split in ("train", "test"):
            recs = self.manifest.subset(split)
            n_flagged = sum(1 for r in recs if r.flags)
            per_split[split] = {
                "total": len(recs),
                "flagged": n_flagged,
                "flag_rate": n_flagged / len(recs) if recs else 0.0,
            }
        return {
            "dataset": self.manifest.name,
            "total": total,
            "flagged": flagged,
            "flag_rate": flagged / total if total else 0.0,
            "queue_depth": len(enqueue_flagged(self.manifest)),
            "flag_counts": counts,
            "review_counts": by_review,
            "per_split": per_split,
        }


def create_review_app(store: ReviewStore, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="foreground review")

    @app.get("/api/queue")
    def get_queue(offset: int = 0, limit: int = 20):
        return store.queue_page(max(offset, 0), max(min(limit, 200), 1))

    @app.get("/api/stats")
    def get_stats():
        return store.stats()

    @app.post("/api/record/{record_id:path}/decision")
    def post_decision(record_id: str, payload: DecisionPayload):
        try:
            return store.decide(record_id, payload)
        except RecordNotFound:
            raise HTTPException(status_code=404, detail=f"no record {record_id!r}")
        except DecisionConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except DecisionInvalid as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/api/record/{record_id:path}")
    def get_record(record_id: str):
        try:
            return store.record_view(record_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no record {record_id!r}")

    @app.exception_handler(Exception)
    async def unhandled(request, exc):  # pragma: no cover - defensive
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    app.mount(
        "/images/source",
        StaticFiles(directory=str(store.config.source_root)),
        name="source-images",
    )
    out_root = Path(store.config.out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    app.mount("/images/fg", StaticFiles(directory=str(out_root)), name="fg-images")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
