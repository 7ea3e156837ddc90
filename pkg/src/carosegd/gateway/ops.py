"""Shared run logic behind the CLI and the HTTP service.

Both front ends call the same functions with the same defaults, so a CLI run
and an HTTP run over identical inputs serialize byte-identical result
documents.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import pipeline
from ..errors import CaroSegError, InvalidArgument
from ..geometry import Contour, annotation_contours, pchip_interpolate, read_annotation_csv
from ..imaging import RegionOfInterest, UltrasoundImage, load_image, resample_height
from ..inference import ConstantPredictor, DilatedUnetConfig, UnetPredictor, load_weights
from ..pipeline import PipelineConfig, contour_document
from .store import SessionStore


def load_item_image(item: dict) -> UltrasoundImage:
    return load_image(Path(item["image_path"]), Path(item["meta_path"]))


def item_roi(item: dict) -> RegionOfInterest:
    if not item.get("roi"):
        raise InvalidArgument("item has no ROI set")
    return RegionOfInterest(item["roi"]["x_left"], item["roi"]["x_right"])


def truth_contours(item: dict, expert: str = "A1") -> tuple[Contour, Contour]:
    path = item.get("annotations", {}).get(expert)
    if not path:
        raise InvalidArgument(f"item {item['id']!r} has no {expert} annotations")
    return annotation_contours(read_annotation_csv(Path(path), expert))


def axis_from_doc(doc: dict | None) -> Contour | None:
    if not doc:
        return None
    return Contour(int(doc["x_start"]), np.asarray(doc["ordinates_px"], dtype=np.float64))


def interpolate_control_points(points: list[dict]) -> Contour:
    """Server-side curve through user control points (monotone cubic)."""
    if len(points) < 2:
        raise InvalidArgument("need at least 2 control points")
    pts = [(float(p["x"]), float(p["y"])) for p in points]
    xs = [p[0] for p in pts]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise InvalidArgument("control points must be strictly increasing in x")
    x0 = int(np.ceil(xs[0]))
    x1 = int(np.floor(xs[-1]))
    if x1 < x0:
        raise InvalidArgument("control points span less than one column")
    return pchip_interpolate(pts, np.arange(x0, x1 + 1))


class PredictorProvider:
    """Builds the two stage predictors for a work item."""

    name = "base"

    def build(self, img, roi, item, config):
        raise NotImplementedError


class OracleProvider(PredictorProvider):
    """Truth-mask predictors from an expert's annotations; phantom workflows."""

    name = "oracle"

    def __init__(self, expert: str = "A1"):
        self.expert = expert

    def build(self, img, roi, item, config):
        li, ma = truth_contours(item, self.expert)
        fw = pipeline.farwall_oracle(img, roi, li, ma, config)
        imc = pipeline.imc_oracle(img, roi, li, ma, config)
        return fw, imc


class WeightsProvider(PredictorProvider):
    name = "unet"

    def __init__(self, weights_fw: Path, weights_imc: Path, cfg: DilatedUnetConfig | None = None):
        cfg = cfg or DilatedUnetConfig()
        self.pred_fw = UnetPredictor(load_weights(weights_fw), cfg)
        self.pred_imc = UnetPredictor(load_weights(weights_imc), cfg)

    def build(self, img, roi, item, config):
        return self.pred_fw, self.pred_imc


class ConstantProvider(PredictorProvider):
    """Uniform probability in both stages; degenerate-path testing."""

    name = "constant"

    def __init__(self, value: float):
        self.pred = ConstantPredictor(value)

    def build(self, img, roi, item, config):
        return self.pred, self.pred


def run_farwall(item: dict, provider: PredictorProvider, config: PipelineConfig) -> dict:
    """Stage 1 alone, for the interactive review flow.  Returns the farwall
    document (native-frame axis)."""
    img = load_item_image(item)
    roi = item_roi(item)
    pred_fw, _ = provider.build(img, roi, item, config)
    img_norm = resample_height(img, config.farwall.target_height)
    fw = pipeline.detect_far_wall(img_norm, roi, pred_fw, config.farwall)
    fw_native = fw.rescaled(img.height_px)
    return {
        "status": fw_native.status,
        "axis": contour_document(fw_native.axis, img.pitch_vertical_um),
        "raw_axis": contour_document(fw_native.raw_axis, img.pitch_vertical_um),
        "diagnostics": fw_native.diagnostics,
    }


def run_full(
    store: SessionStore,
    item: dict,
    provider: PredictorProvider,
    config: PipelineConfig,
    manual_axis: Contour | None = None,
    debug_dir: Path | None = None,
) -> tuple[bytes, pipeline.SegmentationResult]:
    """Full pipeline for an item; persists and returns the canonical result
    bytes."""
    img = load_item_image(item)
    roi = item_roi(item)
    pred_fw, pred_imc = provider.build(img, roi, item, config)
    result = pipeline.run(
        img,
        roi,
        pred_fw,
        pred_imc,
        manual_axis=manual_axis,
        config=config,
        debug_dir=debug_dir,
    )
    doc = pipeline.result_document(item["id"], img, roi, result)
    data = pipeline.result_to_json(doc)
    store.save_result(item["id"], data)
    return data, result
