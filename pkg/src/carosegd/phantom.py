"""Synthetic test image with an analytically known intima-media band.

A gently curved bright band on a speckled dark background: LI follows a
shallow sinusoid and MA runs at a constant pixel offset below it, so every
derived quantity (axis position, contour ordinates, thickness) has a closed
form to compare against.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Contour, median_axis
from .imaging import RegionOfInterest, UltrasoundImage, save_png, write_meta


@dataclass(frozen=True)
class Phantom:
    img: UltrasoundImage
    li: Contour
    ma: Contour
    roi: RegionOfInterest

    @property
    def axis(self) -> Contour:
        return median_axis(self.li, self.ma)

    @property
    def imt_um(self) -> float:
        return float((self.ma.ordinates[0] - self.li.ordinates[0]) * self.img.pitch_vertical_um)


def make_phantom(
    width: int = 512,
    height: int = 600,
    pitch_um: float = 10.0,
    band_center_row: float = 320.0,
    amplitude_px: float = 25.0,
    thickness_px: float = 80.0,
    phase: float = 0.7,
    seed: int = 7,
) -> Phantom:
    """Build the phantom; defaults give a 512x600 frame at 10 um pitch with
    an 800 um thick band (80 native px)."""
    xs = np.arange(width, dtype=np.float64)
    li_y = band_center_row + amplitude_px * np.sin(
        2.0 * np.pi * (xs - width / 2.0) / (2.5 * width) + phase
    )
    ma_y = li_y + thickness_px

    rows = np.arange(height, dtype=np.float64)[:, None]
    # soft-edged band, roughly one pixel of transition on each side
    upper = 1.0 / (1.0 + np.exp(-(rows - li_y[None, :]) / 1.2))
    lower = 1.0 / (1.0 + np.exp(-(ma_y[None, :] - rows) / 1.2))
    band = upper * lower

    rng = np.random.default_rng(seed)
    speckle = rng.random((height, width))
    pixels = np.clip(0.10 + 0.72 * band + 0.08 * speckle, 0.0, 1.0)

    img = UltrasoundImage(
        pixels=pixels,
        pitch_vertical_um=pitch_um,
        pitch_horizontal_um=pitch_um,
    )
    margin = width // 8
    roi = RegionOfInterest(margin, width - margin - 1)
    return Phantom(img=img, li=Contour(0, li_y), ma=Contour(0, ma_y), roi=roi)


def _write_annotation_csv(path: Path, li: Contour, ma: Contour, step: int = 32) -> None:
    cols = list(range(li.x_start, li.x_end + 1, step))
    if cols[-1] != li.x_end:
        cols.append(li.x_end)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# interface,x,y\n")
        for name, c in (("LI", li), ("MA", ma)):
            for x in cols:
                fh.write(f"{name},{x},{c.y(x):.4f}\n")


def write_phantom_dataset(
    directory: Path,
    count: int = 1,
    seed: int = 7,
    observer_offset_px: float = 3.0,
) -> list[str]:
    """Write PNG images, pitch sidecars, and two expert annotation sets.

    A1 holds the analytic truth; A2 is the truth shifted down by a constant
    offset, standing in for a second observer.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ids = []
    for i in range(count):
        image_id = f"phantom-{i:03d}"
        ph = make_phantom(seed=seed + i, phase=0.7 + 0.31 * i)
        save_png(ph.img, directory / f"{image_id}.png")
        write_meta(ph.img, directory / f"{image_id}.meta")
        _write_annotation_csv(directory / f"{image_id}_A1.csv", ph.li, ph.ma)
        li2 = Contour(ph.li.x_start, ph.li.ordinates + observer_offset_px)
        ma2 = Contour(ph.ma.x_start, ph.ma.ordinates + observer_offset_px)
        _write_annotation_csv(directory / f"{image_id}_A2.csv", li2, ma2)
        ids.append(image_id)
    return ids
