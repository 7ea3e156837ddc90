"""Two-stage segmentation pipeline.

Stage 1 finds the far wall: the image is height-normalized, the ROI is tiled
with full-height patches, fused predictions are binarized, and the upper
boundary of the largest component is smoothed with a cubic fit to give the
median axis.  Stage 2 segments the intima-media complex: the image is
resampled to a 5 um vertical pitch, patches are placed along the axis, and
the fused mask's upper and lower boundaries become the LI and MA contours.
All reported coordinates are native-frame pixels; the frame chain
(height normalization, pitch resampling) is inverted internally.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import InvalidArgument, NoRegion, PatchUnplaceable
from .fusion import (
    FusionMaps,
    fuse_batch,
    largest_component,
    lower_boundary,
    upper_boundary,
)
from .geometry import (
    Contour,
    median_axis,
    polyfit_cubic,
    rasterize_below,
    rasterize_between,
)
from .imaging import (
    RegionOfInterest,
    UltrasoundImage,
    crop_roi,
    resample_height,
    resample_pitch,
    row_scale,
    save_pgm,
)
from .inference.predictors import OraclePredictor, PatchPredictor
from .tiling import extract, tile_along_axis, tile_farwall_inference


@dataclass(frozen=True)
class FarWallParams:
    stride: int = 32
    target_height: int = 512
    threshold: float = 0.5
    max_gap: int = 10
    # failure heuristic: any one firing marks the detection failed
    min_area_fraction: float = 0.05
    min_coverage_fraction: float = 0.60
    max_rms_px: float = 40.0


@dataclass(frozen=True)
class ImcParams:
    stride: int = 32
    target_pitch_um: float = 5.0
    threshold: float = 0.5
    max_gap: int = 10


@dataclass(frozen=True)
class PipelineConfig:
    farwall: FarWallParams = field(default_factory=FarWallParams)
    imc: ImcParams = field(default_factory=ImcParams)

    def to_dict(self) -> dict:
        return {
            "farwall": {
                "stride": self.farwall.stride,
                "target_height": self.farwall.target_height,
                "threshold": self.farwall.threshold,
                "max_gap": self.farwall.max_gap,
                "min_area_fraction": self.farwall.min_area_fraction,
                "min_coverage_fraction": self.farwall.min_coverage_fraction,
                "max_rms_px": self.farwall.max_rms_px,
            },
            "imc": {
                "stride": self.imc.stride,
                "target_pitch_um": self.imc.target_pitch_um,
                "threshold": self.imc.threshold,
                "max_gap": self.imc.max_gap,
            },
        }

    def digest(self) -> str:
        doc = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(doc.encode()).hexdigest()[:12]


@dataclass
class FarWallResult:
    """Stage-1 outcome; contours are in full-image columns, rows in the
    frame of height frame_height."""

    axis: Contour | None
    raw_axis: Contour | None
    status: str  # "ok" | "failed" | "manually_corrected"
    diagnostics: dict
    frame_height: int

    def rescaled(self, native_height: int) -> "FarWallResult":
        """Map contour rows into a frame of a different height."""
        f = row_scale(self.frame_height, native_height)
        return FarWallResult(
            axis=self.axis.scaled_rows(f) if self.axis is not None else None,
            raw_axis=self.raw_axis.scaled_rows(f) if self.raw_axis is not None else None,
            status=self.status,
            diagnostics=self.diagnostics,
            frame_height=native_height,
        )


@dataclass
class SegmentationResult:
    li: Contour | None
    ma: Contour | None
    imt_profile_um: np.ndarray | None
    imt_mean_um: float | None
    status: str  # "ok" | "failed"
    provenance: dict
    diagnostics: dict
    farwall: FarWallResult | None = None


def detect_far_wall(
    img: UltrasoundImage,
    roi: RegionOfInterest,
    predictor: PatchPredictor,
    params: FarWallParams | None = None,
    debug_dir: Path | None = None,
) -> FarWallResult:
    """Stage 1 on a height-normalized image.

    The ROI is tiled with full-height 128-wide patches; fused predictions are
    binarized, the largest component's upper boundary is extracted and
    smoothed with a cubic fit evaluated over the whole ROI span.
    """
    params = params or FarWallParams()
    roi.validate_against(img)
    crop = crop_roi(img, roi)

    specs = tile_farwall_inference(roi.width, params.stride, image_height=crop.height_px)
    batch = extract(crop, specs)
    maps = fuse_batch(crop.shape, batch, predictor)
    binary = maps.binarize(params.threshold)
    if debug_dir is not None:
        debug_dir = Path(debug_dir)
        debug_dir.mkdir(parents=True, exist_ok=True)
        save_pgm(maps.average(), debug_dir / "farwall_average.pgm")
        save_pgm(binary.astype(np.float64), debug_dir / "farwall_mask.pgm")

    def failed(reason, diag):
        diag = dict(diag, failure_reason=reason)
        return FarWallResult(None, None, "failed", diag, img.height_px)

    try:
        region = largest_component(binary)
    except NoRegion:
        return failed("no-region", {"region_area_fraction": 0.0, "coverage_fraction": 0.0})

    area_fraction = float(region.sum()) / (roi.width * crop.height_px)
    raw = upper_boundary(region, params.max_gap)
    coverage = len(raw) / roi.width
    diag = {
        "region_area_fraction": area_fraction,
        "coverage_fraction": coverage,
    }
    if len(raw) < 4:
        return failed("boundary-too-short", diag)

    fit = polyfit_cubic(raw, eval_span=(0, roi.width - 1))
    resid = raw.ordinates - fit.restricted(raw.x_start, raw.x_end).ordinates
    rms = float(np.sqrt(np.mean(resid**2)))
    curvature = float(np.max(np.abs(np.diff(fit.ordinates, 2)))) if len(fit) >= 3 else 0.0
    diag.update(rms_fit_px=rms, axis_curvature_px=curvature)

    axis = fit.shifted(crop.origin_x)
    raw_axis = raw.shifted(crop.origin_x)
    if area_fraction < params.min_area_fraction:
        return failed("region-too-small", diag)
    if coverage < params.min_coverage_fraction:
        return failed("coverage-too-low", diag)
    if rms > params.max_rms_px:
        return failed("boundary-irregular", diag)
    return FarWallResult(axis, raw_axis, "ok", diag, img.height_px)


def segment_imc(
    img: UltrasoundImage,
    axis: Contour,
    predictor: PatchPredictor,
    params: ImcParams | None = None,
    native_height: int | None = None,
    native_pitch_um: float | None = None,
    debug_dir: Path | None = None,
) -> SegmentationResult:
    """Stage 2 on the 5 um-pitch frame.

    axis columns are full-image, rows in img's frame.  When native_height and
    native_pitch_um are given the output contours are mapped back to the
    native frame and the thickness profile uses the native pitch.
    """
    params = params or ImcParams()
    local = axis.shifted(-img.origin_x)
    if local.x_start < 0 or local.x_end > img.width_px - 1:
        raise InvalidArgument(
            f"axis span [{axis.x_start}, {axis.x_end}] falls outside the image columns"
        )

    specs = tile_along_axis(local, img.height_px, mode="inference", stride=params.stride)
    batch = extract(img, specs)
    maps = fuse_batch(img.shape, batch, predictor)
    binary = maps.binarize(params.threshold)
    if debug_dir is not None:
        debug_dir = Path(debug_dir)
        debug_dir.mkdir(parents=True, exist_ok=True)
        save_pgm(maps.average(), debug_dir / "imc_average.pgm")
        save_pgm(binary.astype(np.float64), debug_dir / "imc_mask.pgm")

    provenance = {"predictor_imc": predictor.id, "stride_imc": params.stride}
    try:
        region = largest_component(binary)
    except NoRegion:
        return SegmentationResult(
            None, None, None, None, "failed", provenance, {"failure_reason": "no-region"}
        )

    li_loc = upper_boundary(region, params.max_gap)
    ma_loc = lower_boundary(region, params.max_gap)
    # same covered columns and run selection, so identical spans by construction
    assert li_loc.x_start == ma_loc.x_start and len(li_loc) == len(ma_loc)
    assert np.all(li_loc.ordinates <= ma_loc.ordinates + 1e-9)

    li = li_loc.shifted(img.origin_x)
    ma = ma_loc.shifted(img.origin_x)
    if native_height is not None:
        f = row_scale(img.height_px, native_height)
        li = li.scaled_rows(f)
        ma = ma.scaled_rows(f)
        pitch = native_pitch_um if native_pitch_um is not None else img.pitch_vertical_um
    else:
        pitch = img.pitch_vertical_um

    profile = (ma.ordinates - li.ordinates) * pitch
    diagnostics = {
        "region_area_px": int(region.sum()),
        "columns": len(li),
    }
    return SegmentationResult(
        li=li,
        ma=ma,
        imt_profile_um=profile,
        imt_mean_um=float(profile.mean()),
        status="ok",
        provenance=provenance,
        diagnostics=diagnostics,
    )


def run(
    img: UltrasoundImage,
    roi: RegionOfInterest,
    predictor_fw: PatchPredictor | None,
    predictor_imc: PatchPredictor,
    manual_axis: Contour | None = None,
    config: PipelineConfig | None = None,
    debug_dir: Path | None = None,
) -> SegmentationResult:
    """Full pipeline in native coordinates.

    A manual axis (native frame, spanning the ROI) skips stage 1 entirely and
    marks the result manually corrected.
    """
    config = config or PipelineConfig()
    roi.validate_against(img)

    if manual_axis is not None:
        if manual_axis.x_start > roi.x_left or manual_axis.x_end < roi.x_right:
            raise InvalidArgument(
                f"manual axis [{manual_axis.x_start}, {manual_axis.x_end}] "
                f"does not span the ROI [{roi.x_left}, {roi.x_right}]"
            )
        fw_native = FarWallResult(
            axis=manual_axis.restricted(roi.x_left, roi.x_right),
            raw_axis=None,
            status="manually_corrected",
            diagnostics={},
            frame_height=img.height_px,
        )
    else:
        if predictor_fw is None:
            raise InvalidArgument("far-wall predictor required when no manual axis is given")
        img_norm = resample_height(img, config.farwall.target_height)
        fw = detect_far_wall(img_norm, roi, predictor_fw, config.farwall, debug_dir=debug_dir)
        fw_native = fw.rescaled(img.height_px)

    provenance = {
        "predictor_fw": predictor_fw.id if predictor_fw is not None else None,
        "predictor_imc": predictor_imc.id,
        "config": config.digest(),
        "stride_fw": config.farwall.stride,
        "stride_imc": config.imc.stride,
        "manually_corrected": manual_axis is not None,
        "tool_version": __version__,
    }

    if fw_native.status == "failed":
        return SegmentationResult(
            None,
            None,
            None,
            None,
            "failed",
            provenance,
            dict(fw_native.diagnostics),
            farwall=fw_native,
        )

    crop = crop_roi(img, roi)
    img5 = resample_pitch(crop, config.imc.target_pitch_um)
    axis5 = fw_native.axis.scaled_rows(row_scale(img.height_px, img5.height_px))

    seg = segment_imc(
        img5,
        axis5,
        predictor_imc,
        config.imc,
        native_height=img.height_px,
        native_pitch_um=img.pitch_vertical_um,
        debug_dir=debug_dir,
    )
    seg.provenance = dict(provenance)
    seg.farwall = fw_native
    return seg


def farwall_oracle(
    img: UltrasoundImage,
    roi: RegionOfInterest,
    li: Contour,
    ma: Contour,
    config: PipelineConfig | None = None,
) -> OraclePredictor:
    """Truth-mask predictor for stage 1, built from known LI/MA contours.

    The mask lives in the stage-1 working frame: the ROI crop of the
    height-normalized image, foreground below the median axis.
    """
    config = config or PipelineConfig()
    h = config.farwall.target_height
    axis = median_axis(li, ma).restricted(roi.x_left, roi.x_right)
    axis = axis.scaled_rows(row_scale(img.height_px, h)).shifted(-roi.x_left)
    mask = rasterize_below(axis, (h, roi.width))
    return OraclePredictor(mask, id="oracle:farwall")


def imc_oracle(
    img: UltrasoundImage,
    roi: RegionOfInterest,
    li: Contour,
    ma: Contour,
    config: PipelineConfig | None = None,
) -> OraclePredictor:
    """Truth-mask predictor for stage 2: the band between LI and MA in the
    5 um-pitch ROI crop."""
    config = config or PipelineConfig()
    img5 = resample_pitch(crop_roi(img, roi), config.imc.target_pitch_um)
    f = row_scale(img.height_px, img5.height_px)
    li5 = li.restricted(roi.x_left, roi.x_right).scaled_rows(f).shifted(-roi.x_left)
    ma5 = ma.restricted(roi.x_left, roi.x_right).scaled_rows(f).shifted(-roi.x_left)
    mask = rasterize_between(li5, ma5, (img5.height_px, roi.width))
    return OraclePredictor(mask, id="oracle:imc")


def contour_document(contour: Contour | None, pitch_um: float) -> dict | None:
    if contour is None:
        return None
    px = [float(v) for v in contour.ordinates]
    return {
        "x_start": int(contour.x_start),
        "ordinates_px": px,
        "ordinates_um": [v * pitch_um for v in px],
    }


def result_document(
    image_id: str,
    img: UltrasoundImage,
    roi: RegionOfInterest,
    result: SegmentationResult,
) -> dict:
    """One JSON-ready document per image, native coordinates throughout."""
    pitch = img.pitch_vertical_um
    fw = result.farwall
    doc = {
        "image_id": image_id,
        "roi": {"x_left": roi.x_left, "x_right": roi.x_right},
        "pitch_vertical_um": pitch,
        "pitch_horizontal_um": img.pitch_horizontal_um,
        "status": result.status,
        "farwall": None,
        "li": contour_document(result.li, pitch),
        "ma": contour_document(result.ma, pitch),
        "imt": None,
        "provenance": result.provenance,
        "diagnostics": result.diagnostics,
    }
    if fw is not None:
        doc["farwall"] = {
            "status": fw.status,
            "axis": contour_document(fw.axis, pitch),
            "diagnostics": fw.diagnostics,
        }
    if result.imt_profile_um is not None:
        doc["imt"] = {
            "profile_um": [float(v) for v in result.imt_profile_um],
            "mean_um": result.imt_mean_um,
        }
    return doc


def _rounded(obj):
    if isinstance(obj, float):
        return round(obj, 4)
    if isinstance(obj, (np.floating,)):
        return round(float(obj), 4)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_rounded(v) for v in obj.tolist()]
    return obj


def result_to_json(doc: dict) -> bytes:
    """Canonical serialization: sorted keys, floats rounded to 4 decimals,
    no timestamps, so identical runs are byte-identical."""
    text = json.dumps(_rounded(doc), sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")
