"""Image representation, coordinate conventions, and vertical resampling.

Coordinate convention: row index y grows downward, so the near wall of the
vessel has a smaller y than the far wall, and the lumen-intima interface lies
above (smaller y than) the media-adventitia interface.

All resampling is vertical only.  The horizontal pixel pitch is carried as
metadata for reporting and is never changed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidArgument


@dataclass(frozen=True)
class UltrasoundImage:
    """A grayscale B-mode image with physical pixel size metadata.

    pixels holds intensities in [0, 1], row-major (height, width).
    origin_x records the column offset of this view inside its source frame
    (0 for a full image, the left ROI border after crop_roi).
    """

    pixels: np.ndarray
    pitch_vertical_um: float
    pitch_horizontal_um: float
    origin_x: int = 0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidArgument(f"pixels must be a non-empty 2-D grid, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise InvalidArgument("pixel values must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise InvalidArgument("pixel values must lie in [0, 1]")
        for name in ("pitch_vertical_um", "pitch_horizontal_um"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise InvalidArgument(f"{name} must be strictly positive and finite, got {v}")
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height_px(self) -> int:
        return self.pixels.shape[0]

    @property
    def width_px(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


@dataclass(frozen=True)
class RegionOfInterest:
    """User-delimited horizontal span [x_left, x_right], both inclusive."""

    x_left: int
    x_right: int

    def __post_init__(self):
        if self.x_left < 0 or self.x_left >= self.x_right:
            raise InvalidArgument(
                f"require 0 <= x_left < x_right, got [{self.x_left}, {self.x_right}]"
            )

    @property
    def width(self) -> int:
        return self.x_right - self.x_left + 1

    def validate_against(self, img: UltrasoundImage) -> None:
        if self.x_right >= img.width_px:
            raise InvalidArgument(
                f"ROI [{self.x_left}, {self.x_right}] exceeds image width {img.width_px}"
            )


def _interp_rows(pixels: np.ndarray, target_height: int) -> np.ndarray:
    """Endpoint-aligned 1-D linear interpolation along each column.

    The first and last input rows map exactly onto the first and last output
    rows, so knot rows are fixed points of the resampling.
    """
    h_in = pixels.shape[0]
    if h_in == 1:
        return np.repeat(pixels, target_height, axis=0)
    pos = np.linspace(0.0, h_in - 1, target_height)
    lo = np.floor(pos).astype(np.intp)
    lo = np.minimum(lo, h_in - 2)
    frac = (pos - lo)[:, None]
    return pixels[lo, :] * (1.0 - frac) + pixels[lo + 1, :] * frac


def resample_height(img: UltrasoundImage, target_height: int) -> UltrasoundImage:
    """Resample to an exact row count, rescaling the vertical pitch to match."""
    if target_height < 2:
        raise InvalidArgument(f"target_height must be >= 2, got {target_height}")
    if target_height == img.height_px:
        return img
    out = _interp_rows(img.pixels, target_height)
    return UltrasoundImage(
        pixels=out,
        pitch_vertical_um=img.pitch_vertical_um * img.height_px / target_height,
        pitch_horizontal_um=img.pitch_horizontal_um,
        origin_x=img.origin_x,
    )


def resample_pitch(img: UltrasoundImage, target_pitch_um: float) -> UltrasoundImage:
    """Resample rows so one pixel spans target_pitch_um micrometers vertically."""
    if not np.isfinite(target_pitch_um) or target_pitch_um <= 0:
        raise InvalidArgument(f"target pitch must be positive, got {target_pitch_um}")
    if target_pitch_um == img.pitch_vertical_um:
        return img
    target_height = max(2, int(round(img.height_px * img.pitch_vertical_um / target_pitch_um)))
    out = _interp_rows(img.pixels, target_height)
    return UltrasoundImage(
        pixels=out,
        pitch_vertical_um=target_pitch_um,
        pitch_horizontal_um=img.pitch_horizontal_um,
        origin_x=img.origin_x,
    )


def crop_roi(img: UltrasoundImage, roi: RegionOfInterest) -> UltrasoundImage:
    """Slice the column range [x_left, x_right]; the offset is recorded in
    origin_x so contours can be mapped back to full-image coordinates."""
    roi.validate_against(img)
    return UltrasoundImage(
        pixels=img.pixels[:, roi.x_left : roi.x_right + 1],
        pitch_vertical_um=img.pitch_vertical_um,
        pitch_horizontal_um=img.pitch_horizontal_um,
        origin_x=img.origin_x + roi.x_left,
    )


def row_scale(src_height: int, dst_height: int) -> float:
    """Factor mapping a row position between two endpoint-aligned frames."""
    if src_height < 2 or dst_height < 2:
        raise InvalidArgument("row mapping needs at least 2 rows in both frames")
    return (dst_height - 1) / (src_height - 1)


# -- file I/O ---------------------------------------------------------------

_META_LINE = re.compile(r"^\s*(pitch_vertical_um|pitch_horizontal_um)\s*=\s*([0-9.eE+-]+)\s*$")


def read_meta(path: Path) -> dict[str, float]:
    """Parse a sidecar metadata file with pitch_*_um=<value> lines."""
    values: dict[str, float] = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _META_LINE.match(line)
        if m is None:
            raise InvalidArgument(f"{path}: unrecognized metadata line: {line!r}")
        values[m.group(1)] = float(m.group(2))
    for key in ("pitch_vertical_um", "pitch_horizontal_um"):
        if key not in values:
            raise InvalidArgument(f"{path}: missing {key}")
    return values


def find_meta(image_path: Path) -> Path:
    """Locate the sidecar for an image: <name>.meta next to the file, or the
    same with the image extension dropped."""
    image_path = Path(image_path)
    for cand in (image_path.with_name(image_path.name + ".meta"),
                 image_path.with_suffix(".meta")):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no .meta sidecar found for {image_path}")


def load_image(path: Path, meta_path: Path | None = None) -> UltrasoundImage:
    """Load an 8-bit grayscale PGM (binary P5) or PNG with its pitch sidecar.

    Intensities are normalized to [0, 1] by dividing by 255.
    """
    path = Path(path)
    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("L")
        pixels = np.asarray(im, dtype=np.float64) / 255.0
    meta = read_meta(meta_path if meta_path is not None else find_meta(path))
    return UltrasoundImage(
        pixels=pixels,
        pitch_vertical_um=meta["pitch_vertical_um"],
        pitch_horizontal_um=meta["pitch_horizontal_um"],
    )


def save_pgm(values: np.ndarray, path: Path) -> None:
    """Write a 2-D array as binary PGM (P5), scaling [0, 1] floats to 8 bit.

    Integer arrays are written as-is after clipping to [0, 255].
    """
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise InvalidArgument(f"PGM export needs a 2-D array, got shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.floating):
        data = np.clip(np.round(arr * 255.0), 0, 255).astype(np.uint8)
    else:
        data = np.clip(arr, 0, 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def save_png(img: UltrasoundImage, path: Path) -> None:
    data = np.clip(np.round(img.pixels * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")


def write_meta(img: UltrasoundImage, path: Path) -> None:
    Path(path).write_text(
        f"pitch_vertical_um={img.pitch_vertical_um}\n"
        f"pitch_horizontal_um={img.pitch_horizontal_um}\n"
    )
