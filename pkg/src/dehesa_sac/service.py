"""Review service: serves segmentation results for a workspace directory
and lets an operator re-segment with overridden parameters and accept
results. State is persisted as JSON sidecar files so restarts are cheap."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import threading
from collections import defaultdict
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .batch import aggregate_report, find_images, process_image
from .raster import RasterError
from .segmentation import SegmentationConfig, UnclassifiableImageError

GT_SUBDIR = "ground_truth"
DERIVED_SUBDIR = "derived"


class SegmentOverrides(BaseModel):
    c: int | None = Field(default=None, ge=2, le=9)
    gamma: float | None = Field(default=None, ge=0.0, le=1.0)
    shrub_threshold_px: int | None = Field(default=None, ge=0)


class Workspace:
    """Image inventory, per-image state and derived rasters for one run."""

    def __init__(self, root, config: SegmentationConfig | None = None,
                 assume_pixel_size: float | None = None):
        self.root = Path(root)
        if not self.root.is_dir():
            raise FileNotFoundError(f"workspace {root} is not a directory")
        self.config = config or SegmentationConfig()
        self.assume_pixel_size = assume_pixel_size
        self.derived = self.root / DERIVED_SUBDIR
        self.derived.mkdir(exist_ok=True)
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    def image_ids(self) -> list[str]:
        return [p.stem for p in find_images(self.root)]

    def image_path(self, image_id: str) -> Path:
        for p in find_images(self.root):
            if p.stem == image_id:
                return p
        raise KeyError(image_id)

    def gt_path(self, image_id: str) -> Path | None:
        candidate = self.root / GT_SUBDIR / f"{image_id}.png"
        return candidate if candidate.exists() else None

    def _state_path(self, image_id: str) -> Path:
        return self.derived / f"{image_id}.state.json"

    def load_state(self, image_id: str) -> dict:
        path = self._state_path(image_id)
        if path.exists():
            return json.loads(path.read_text())
        return {"image_id": image_id, "status": "pending"}

    def save_state(self, state: dict) -> None:
        self._state_path(state["image_id"]).write_text(
            json.dumps(state, indent=2, sort_keys=True) + "\n"
        )

    def _effective_config(self, overrides: SegmentOverrides | None) -> SegmentationConfig:
        cfg = self.config
        if overrides is None:
            return cfg
        gkb = cfg.gkb
        if overrides.c is not None:
            gkb = dataclasses.replace(gkb, c=overrides.c, rho=None)
        if overrides.gamma is not None:
            gkb = dataclasses.replace(gkb, gamma=overrides.gamma)
        cfg = dataclasses.replace(cfg, gkb=gkb)
        if overrides.shrub_threshold_px is not None:
            cfg = dataclasses.replace(cfg, shrub_threshold_px=overrides.shrub_threshold_px)
        return cfg

    @staticmethod
    def _params_key(config: SegmentationConfig) -> str:
        payload = json.dumps(dataclasses.asdict(config), sort_keys=True, default=str)
        return hashlib.sha1(payload.encode()).hexdigest()[:10]

    def segment_image(self, image_id: str,
                      overrides: SegmentOverrides | None = None) -> dict:
        """Run (or reuse) segmentation for one image; re-runs with identical
        parameters return the persisted result unchanged."""
        config = self._effective_config(overrides)
        key = self._params_key(config)
        with self._locks[image_id]:
            state = self.load_state(image_id)
            if state.get("params_key") == key and state.get("entry"):
                return state
            try:
                image_path = self.image_path(image_id)
            except KeyError:
                raise HTTPException(404, f"unknown image {image_id}")
            try:
                entry = process_image(
                    image_path, self.gt_path(image_id), config, self.derived,
                    assume_pixel_size=self.assume_pixel_size,
                )
                status = "needs_review"
            except UnclassifiableImageError as exc:
                entry = {"image_id": image_id, "error": str(exc),
                         "_pixels": 0, "_counts": {"tree": 0, "shrub": 0}}
                status = "needs_review"
            except (RasterError, RuntimeError, ValueError) as exc:
                entry = {"image_id": image_id,
                         "error": f"{type(exc).__name__}: {exc}",
                         "_pixels": 0, "_counts": {"tree": 0, "shrub": 0}}
                status = "error"
            state = {
                "image_id": image_id,
                "status": status,
                "params_key": key,
                "overrides": overrides.model_dump(exclude_none=True) if overrides else {},
                "entry": entry,
            }
            self.save_state(state)
            return state

    def accept(self, image_id: str) -> dict:
        with self._locks[image_id]:
            state = self.load_state(image_id)
            if not state.get("entry"):
                raise HTTPException(409, f"image {image_id} not segmented yet")
            state["status"] = "accepted"
            self.save_state(state)
            return state

    def entries(self) -> list[dict]:
        return [self.load_state(i) for i in self.image_ids()]


def _card(state: dict) -> dict:
    entry = state.get("entry") or {}
    image_id = state["image_id"]
    version = state.get("params_key", "none")
    card = {
        "image_id": image_id,
        "status": state["status"],
        "sac_percent": entry.get("sac_percent"),
        "shrub_percent": entry.get("shrub_percent"),
        "soil_percent": entry.get("soil_percent"),
        "class_count_used": entry.get("class_count_used"),
        "needs_review": entry.get("needs_review", False),
        "error": entry.get("error"),
        "metrics": entry.get("metrics"),
        "overrides": state.get("overrides", {}),
        "overlay_url": f"/api/images/{image_id}/overlay.png?v={version}",
        "mask_url": f"/api/images/{image_id}/mask.png?v={version}",
    }
    if entry.get("metrics") is not None:
        card["diff_url"] = f"/api/images/{image_id}/diff.png?v={version}"
    return card


def create_app(workspace_dir, config: SegmentationConfig | None = None,
               assume_pixel_size: float | None = None,
               segment_on_start: bool = True,
               frontend_dir=None) -> FastAPI:
    ws = Workspace(workspace_dir, config, assume_pixel_size)
    app = FastAPI(title="dehesa-sac review service")
    app.state.workspace = ws

    if segment_on_start:
        for image_id in ws.image_ids():
            ws.segment_image(image_id)

    @app.get("/api/images")
    def list_images():
        return [_card(s) for s in ws.entries()]

    @app.get("/api/images/{image_id}")
    def get_image(image_id: str):
        if image_id not in ws.image_ids():
            raise HTTPException(404, f"unknown image {image_id}")
        return _card(ws.load_state(image_id))

    def _raster(image_id: str, suffix: str) -> FileResponse:
        path = ws.derived / f"{image_id}_{suffix}.png"
        if not path.exists():
            raise HTTPException(404, f"no {suffix} raster for {image_id}")
        return FileResponse(path, media_type="image/png")

    @app.get("/api/images/{image_id}/overlay.png")
    def get_overlay(image_id: str):
        return _raster(image_id, "overlay")

    @app.get("/api/images/{image_id}/mask.png")
    def get_mask(image_id: str):
        return _raster(image_id, "mask")

    @app.get("/api/images/{image_id}/diff.png")
    def get_diff(image_id: str):
        return _raster(image_id, "diff")

    @app.post("/api/images/{image_id}/segment")
    def post_segment(image_id: str, overrides: SegmentOverrides):
        if image_id not in ws.image_ids():
            raise HTTPException(404, f"unknown image {image_id}")
        return _card(ws.segment_image(image_id, overrides))

    @app.post("/api/images/{image_id}/accept")
    def post_accept(image_id: str):
        if image_id not in ws.image_ids():
            raise HTTPException(404, f"unknown image {image_id}")
        return _card(ws.accept(image_id))

    @app.get("/api/report")
    def get_report():
        states = ws.entries()
        entries = [
            s["entry"] for s in states if s.get("entry")
        ]
        return {
            "per_image": [
                {k: v for k, v in e.items() if not k.startswith("_")}
                for e in entries
            ],
            "aggregate": aggregate_report(entries),
            "all_accepted": bool(states)
            and all(s["status"] == "accepted" for s in states),
        }

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app
