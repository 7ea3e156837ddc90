"""Construction of overlapping patch grids for both pipeline stages.

Stage 1 (far wall): full-height patches of 128-pixel width slide across the
ROI.  Stage 2 (IMC): 128x512 patches are placed along the median axis, three
or more per abscissa depending on the axis tilt.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, PatchUnplaceable, RoiTooNarrow
from .geometry import Contour
from .imaging import UltrasoundImage

PATCH_WIDTH = 128
IMC_PATCH_HEIGHT = 512
TRAINING_OVERLAP = 100
TRAINING_STRIDE = PATCH_WIDTH - TRAINING_OVERLAP  # 28
DEFAULT_INFERENCE_STRIDE = 32


@dataclass(frozen=True)
class PatchSpec:
    """Placement of one patch: top-left corner in parent-image coordinates."""

    origin_x: int
    origin_y: int
    width: int = PATCH_WIDTH
    height: int = IMC_PATCH_HEIGHT

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgument("patch size must be positive")

    @property
    def x_end(self) -> int:
        return self.origin_x + self.width - 1

    @property
    def y_end(self) -> int:
        return self.origin_y + self.height - 1


@dataclass
class PatchBatch:
    specs: list[PatchSpec]
    payloads: list[np.ndarray]
    masks: list[np.ndarray] | None = None

    def __post_init__(self):
        if len(self.specs) != len(self.payloads):
            raise InvalidArgument("specs and payloads must have the same length")
        for i, (s, p) in enumerate(zip(self.specs, self.payloads)):
            if p.shape != (s.height, s.width):
                raise InvalidArgument(
                    f"payload {i} shape {p.shape} does not match spec {(s.height, s.width)}"
                )

    def __len__(self) -> int:
        return len(self.specs)


def _slide_origins(roi_width: int, stride: int) -> list[int]:
    """Left edges at 0, stride, 2*stride, ..., plus a final patch flush with
    the right edge."""
    if roi_width < PATCH_WIDTH:
        raise RoiTooNarrow(
            f"ROI width {roi_width} is narrower than one patch ({PATCH_WIDTH} px); widen the ROI"
        )
    if not 1 <= stride <= PATCH_WIDTH:
        raise InvalidArgument(f"stride must be in [1, {PATCH_WIDTH}], got {stride}")
    last = roi_width - PATCH_WIDTH
    origins = list(range(0, last + 1, stride))
    if origins[-1] != last:
        origins.append(last)
    return origins


def tile_farwall_inference(
    roi_width: int, stride: int = DEFAULT_INFERENCE_STRIDE, image_height: int = 512
) -> list[PatchSpec]:
    """Stage-1 sliding-window placements: full image height, width 128."""
    return [
        PatchSpec(x, 0, PATCH_WIDTH, image_height)
        for x in _slide_origins(roi_width, stride)
    ]


def tile_farwall_training(roi_width: int, image_height: int = 512) -> list[PatchSpec]:
    """Stage-1 training placements: consecutive patches share 100 columns."""
    return [
        PatchSpec(x, 0, PATCH_WIDTH, image_height)
        for x in _slide_origins(roi_width, TRAINING_STRIDE)
    ]


def _clamp_origin_y(center: float, image_h: int) -> int:
    """Top row of a 512-tall patch centered at `center`, shifted to fit.

    Clamping shifts the patch, never shrinks it.
    """
    if image_h < IMC_PATCH_HEIGHT:
        raise PatchUnplaceable(
            f"image height {image_h} cannot hold a {IMC_PATCH_HEIGHT}-tall patch"
        )
    origin = int(round(center)) - IMC_PATCH_HEIGHT // 2
    return min(max(origin, 0), image_h - IMC_PATCH_HEIGHT)


def tile_along_axis(
    axis: Contour,
    image_h: int,
    mode: str = "inference",
    stride: int = DEFAULT_INFERENCE_STRIDE,
) -> list[PatchSpec]:
    """Stage-2 placements of 128x512 patches along the median axis.

    For each abscissa step (same horizontal rule as stage 1), training mode
    emits three patches vertically centered at the mean axis ordinate and
    at +/-128 rows around it; inference mode emits centers stepping 128 rows
    over [min_axis - 128, max_axis + 128] across the patch span, which is at
    least three and more when the axis is tilted.
    """
    if mode not in ("training", "inference"):
        raise InvalidArgument(f"mode must be 'training' or 'inference', got {mode!r}")
    xs = _slide_origins(len(axis), TRAINING_STRIDE if mode == "training" else stride)
    specs: list[PatchSpec] = []
    ys = axis.ordinates
    for x in xs:
        window = ys[x : x + PATCH_WIDTH]
        if mode == "training":
            y_i = float(window.mean())
            centers = [y_i - 128.0, y_i, y_i + 128.0]
        else:
            lo = float(window.min()) - 128.0
            hi = float(window.max()) + 128.0
            n_steps = int(np.floor((hi - lo) / 128.0))
            centers = [lo + 128.0 * k for k in range(n_steps + 1)]
        for c in centers:
            specs.append(
                PatchSpec(axis.x_start + x, _clamp_origin_y(c, image_h),
                          PATCH_WIDTH, IMC_PATCH_HEIGHT)
            )
    return specs


def extract(img: UltrasoundImage, specs: list[PatchSpec]) -> PatchBatch:
    """Copy out the pixel block of every spec, in spec order."""
    h, w = img.shape
    payloads = []
    for i, s in enumerate(specs):
        if s.origin_x < 0 or s.origin_y < 0 or s.x_end >= w or s.y_end >= h:
            raise InvalidArgument(
                f"spec {i} at ({s.origin_x}, {s.origin_y}) size {s.width}x{s.height} "
                f"exceeds image {w}x{h}"
            )
        payloads.append(
            img.pixels[s.origin_y : s.origin_y + s.height,
                       s.origin_x : s.origin_x + s.width].copy()
        )
    return PatchBatch(list(specs), payloads)
