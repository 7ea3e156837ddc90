"""HTTP service for the review workflow.

Endpoints mirror the operator's steps: list items, view an image, set the
ROI, run far-wall detection, optionally redraw the axis, run segmentation,
fetch the result.  Errors are flat {code, message} JSON bodies: 400 invalid
input, 404 unknown id, 409 wrong state, 422 ROI too narrow.
"""

from __future__ import annotations

import io
import json

import numpy as np
from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image

from ..errors import CaroSegError, InvalidArgument, RoiTooNarrow
from ..imaging import RegionOfInterest
from ..pipeline import PipelineConfig, contour_document
from ..tiling import PATCH_WIDTH
from . import ops
from .store import SessionStore


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _not_found(item_id: str) -> JSONResponse:
    return _error(404, "unknown-item", f"no item {item_id!r}")


def create_app(
    store: SessionStore,
    provider: ops.PredictorProvider,
    config: PipelineConfig | None = None,
) -> FastAPI:
    config = config or PipelineConfig()
    app = FastAPI(title="carosegd gateway", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _invalid_body(request: Request, exc: RequestValidationError):
        return _error(400, "invalid", str(exc.errors()[:1]))

    @app.exception_handler(CaroSegError)
    async def _domain_error(request: Request, exc: CaroSegError):
        return _error(400, "invalid", str(exc))

    def summary(item: dict) -> dict:
        return {
            "id": item["id"],
            "status": item["status"],
            "roi": item["roi"],
            "has_result": store.load_result(item["id"]) is not None,
        }

    @app.get("/items")
    def list_items():
        return [summary(it) for it in store.list_items()]

    @app.get("/items/{item_id}")
    def get_item(item_id: str):
        item = store.get_item(item_id)
        if item is None:
            return _not_found(item_id)
        return summary(item) | {
            "farwall": item.get("farwall"),
            "manual_axis": item.get("manual_axis"),
            "annotations": sorted(item.get("annotations", {})),
        }

    @app.get("/items/{item_id}/image")
    def get_image(item_id: str):
        item = store.get_item(item_id)
        if item is None:
            return _not_found(item_id)
        img = ops.load_item_image(item)
        pil = Image.fromarray((img.pixels * 255.0 + 0.5).astype(np.uint8), mode="L")
        buf = io.BytesIO()
        pil.save(buf, format="PNG")
        return Response(
            content=buf.getvalue(),
            media_type="image/png",
            headers={
                "X-Pitch-Vertical-Um": f"{img.pitch_vertical_um:g}",
                "X-Pitch-Horizontal-Um": f"{img.pitch_horizontal_um:g}",
            },
        )

    @app.put("/items/{item_id}/roi")
    def put_roi(item_id: str, payload: dict = Body(...)):
        item = store.get_item(item_id)
        if item is None:
            return _not_found(item_id)
        try:
            x_left = int(payload["x_left"])
            x_right = int(payload["x_right"])
        except (KeyError, TypeError, ValueError):
            return _error(400, "invalid", "body must carry integer x_left and x_right")
        if x_left >= x_right or x_left < 0:
            return _error(400, "invalid", f"require 0 <= x_left < x_right, got [{x_left}, {x_right}]")
        roi = RegionOfInterest(x_left, x_right)
        if roi.width < PATCH_WIDTH:
            return _error(
                422,
                "roi-too-narrow",
                f"ROI width {roi.width} px is below the {PATCH_WIDTH} px patch width; widen the ROI",
            )
        img = ops.load_item_image(item)
        try:
            roi.validate_against(img)
        except InvalidArgument as exc:
            return _error(400, "invalid", str(exc))
        with store.lock(item_id):
            item = store.get_item(item_id)
            item["roi"] = {"x_left": x_left, "x_right": x_right}
            item["farwall"] = None
            item["manual_axis"] = None
            store.transition(item, "roi_set")
        return {"id": item_id, "status": item["status"], "roi": item["roi"]}

    @app.post("/items/{item_id}/farwall")
    def post_farwall(item_id: str):
        item = store.get_item(item_id)
        if item is None:
            return _not_found(item_id)
        if not item.get("roi"):
            return _error(409, "wrong-state", "set the ROI before far-wall detection")
        with store.lock(item_id):
            item = store.get_item(item_id)
            try:
                fw_doc = ops.run_farwall(item, provider, config)
            except RoiTooNarrow as exc:
                return _error(422, "roi-too-narrow", str(exc))
            item["farwall"] = fw_doc
            item["manual_axis"] = None
            store.transition(item, "farwall_ok" if fw_doc["status"] == "ok" else "farwall_failed")
        return fw_doc

    @app.put("/items/{item_id}/axis")
    def put_axis(item_id: str, payload: dict = Body(...)):
        item = store.get_item(item_id)
        if item is None:
            return _not_found(item_id)
        if not item.get("roi"):
            return _error(409, "wrong-state", "set the ROI before drawing an axis")
        points = payload.get("control_points")
        if not isinstance(points, list):
            return _error(400, "invalid", "body must carry control_points[]")
        try:
            axis = ops.interpolate_control_points(points)
        except (InvalidArgument, KeyError, TypeError, ValueError) as exc:
            return _error(400, "invalid", f"bad control points: {exc}")
        roi = ops.item_roi(item)
        if axis.x_start > roi.x_left or axis.x_end < roi.x_right:
            return _error(
                400,
                "invalid",
                f"axis [{axis.x_start}, {axis.x_end}] must span the ROI "
                f"[{roi.x_left}, {roi.x_right}]",
            )
        img = ops.load_item_image(item)
        axis_doc = contour_document(axis, img.pitch_vertical_um)
        with store.lock(item_id):
            item = store.get_item(item_id)
            item["manual_axis"] = axis_doc
            item["farwall"] = {
                "status": "manually_corrected",
                "axis": axis_doc,
                "raw_axis": None,
                "diagnostics": {},
            }
            store.transition(item, "farwall_corrected")
        return {"status": "manually_corrected", "axis": axis_doc}

    @app.post("/items/{item_id}/segment")
    def post_segment(item_id: str):
        item = store.get_item(item_id)
        if item is None:
            return _not_found(item_id)
        if item["status"] not in ("farwall_ok", "farwall_corrected", "segmented"):
            return _error(
                409,
                "wrong-state",
                f"item is {item['status']!r}; run far-wall detection or supply an axis first",
            )
        with store.lock(item_id):
            item = store.get_item(item_id)
            manual_axis = ops.axis_from_doc(item.get("manual_axis"))
            data, result = ops.run_full(store, item, provider, config, manual_axis=manual_axis)
            store.transition(item, "segmented" if result.status == "ok" else "farwall_failed")
        return Response(content=data, media_type="application/json")

    @app.get("/items/{item_id}/result")
    def get_result(item_id: str):
        item = store.get_item(item_id)
        if item is None:
            return _not_found(item_id)
        data = store.load_result(item_id)
        if data is None:
            return _error(404, "no-result", f"item {item_id!r} has no stored result")
        # exact stored bytes, so HTTP and CLI outputs are comparable byte-for-byte
        return Response(content=data, media_type="application/json")

    return app
