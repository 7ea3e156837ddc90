"""Fusing overlapping patch predictions back into one frame.

Two running maps over the frame: the sum of predicted probabilities and the
per-pixel count of patches that covered it.  Averaging the first by the
second and thresholding gives the fused binary mask; pixels never covered by
any patch stay background.  From the mask we keep the largest 8-connected
component and trace its upper or lower boundary as a contour.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import InvalidArgument, NoRegion
from .geometry import Contour
from .imaging import save_pgm

BINARIZE_THRESHOLD = 0.5
MAX_BRIDGE_GAP = 10

_EIGHT = np.ones((3, 3), dtype=int)


class FusionMaps:
    def __init__(self, shape):
        h, w = shape
        if h < 1 or w < 1:
            raise InvalidArgument(f"fusion frame must be non-empty, got {shape}")
        self.prediction = np.zeros((h, w), dtype=np.float64)
        self.overlay = np.zeros((h, w), dtype=np.int32)

    @property
    def shape(self):
        return self.prediction.shape

    def accumulate(self, spec, probmap: np.ndarray) -> None:
        probmap = np.asarray(probmap, dtype=np.float64)
        if probmap.shape != (spec.height, spec.width):
            raise InvalidArgument(
                f"probability map {probmap.shape} does not match patch {spec.height}x{spec.width}"
            )
        h, w = self.shape
        if spec.origin_y < 0 or spec.origin_x < 0 or spec.y_end >= h or spec.x_end >= w:
            raise InvalidArgument(
                f"patch at ({spec.origin_x}, {spec.origin_y}) exceeds fusion frame {h}x{w}"
            )
        if probmap.size and (float(probmap.min()) < 0.0 or float(probmap.max()) > 1.0):
            raise InvalidArgument("probability map values must lie in [0, 1]")
        rows = slice(spec.origin_y, spec.origin_y + spec.height)
        cols = slice(spec.origin_x, spec.origin_x + spec.width)
        self.prediction[rows, cols] += probmap
        self.overlay[rows, cols] += 1

    def average(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.float64)
        covered = self.overlay > 0
        np.divide(self.prediction, self.overlay, out=out, where=covered)
        return out

    def binarize(self, threshold: float = BINARIZE_THRESHOLD) -> np.ndarray:
        """Average >= threshold counts as foreground; uncovered pixels never do."""
        avg = self.average()
        return ((avg >= threshold) & (self.overlay > 0)).astype(np.uint8)


def accumulate(specs, predictions, shape) -> FusionMaps:
    """Sum a list of patch predictions into fresh maps, in list order."""
    if len(specs) != len(predictions):
        raise InvalidArgument(
            f"{len(specs)} specs but {len(predictions)} predictions"
        )
    maps = FusionMaps(shape)
    for spec, pred in zip(specs, predictions):
        maps.accumulate(spec, pred)
    return maps


def average_binarize(maps: FusionMaps, threshold: float = BINARIZE_THRESHOLD) -> np.ndarray:
    if not 0.0 < threshold < 1.0:
        raise InvalidArgument(f"threshold must be in (0, 1), got {threshold}")
    return maps.binarize(threshold)


def fuse_batch(shape, batch, predictor) -> FusionMaps:
    maps = FusionMaps(shape)
    for spec, payload in zip(batch.specs, batch.payloads):
        maps.accumulate(spec, predictor.predict(payload, spec))
    return maps


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Largest 8-connected foreground component as a 0/1 mask.

    Size ties break toward the component whose first pixel comes earliest in
    row-major order.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise InvalidArgument("mask must be 2-D")
    labels, n = ndimage.label(mask != 0, structure=_EIGHT)
    if n == 0:
        raise NoRegion("mask has no foreground pixels")
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    sizes[0] = 0
    best = sizes.max()
    tied = np.flatnonzero(sizes == best)
    if len(tied) > 1:
        flat = labels.ravel()
        first = np.full(n + 1, flat.size, dtype=np.int64)
        np.minimum.at(first, flat, np.arange(flat.size))
        tied = tied[np.argsort(first[tied], kind="stable")]
    return (labels == tied[0]).astype(np.uint8)


def _trace_boundary(mask: np.ndarray, side: str, max_gap: int) -> Contour:
    mask = np.asarray(mask) != 0
    if mask.ndim != 2:
        raise InvalidArgument("mask must be 2-D")
    if max_gap < 0:
        raise InvalidArgument("max_gap must be >= 0")
    h, w = mask.shape
    covered = mask.any(axis=0)
    cols = np.flatnonzero(covered)
    if cols.size == 0:
        raise NoRegion("mask has no foreground pixels")
    if side == "upper":
        extremal = np.argmax(mask, axis=0).astype(np.float64)
    else:
        extremal = (h - 1 - np.argmax(mask[::-1], axis=0)).astype(np.float64)

    # gaps wider than max_gap split the boundary into separate runs
    breaks = np.flatnonzero(np.diff(cols) > max_gap + 1)
    runs = np.split(cols, breaks + 1)
    if len(runs) > 1:
        col_weight = mask.sum(axis=0).astype(np.float64)
        centroid = float(np.average(np.arange(w), weights=col_weight))
        containing = [r for r in runs if r[0] <= centroid <= r[-1]]
        if containing:
            run = containing[0]
        else:
            run = max(runs, key=lambda r: (len(r), -r[0]))
    else:
        run = runs[0]

    xs = np.arange(run[0], run[-1] + 1)
    ys = np.interp(xs, run, extremal[run])
    return Contour(int(run[0]), ys)


def upper_boundary(mask: np.ndarray, max_gap: int = MAX_BRIDGE_GAP) -> Contour:
    """Topmost foreground row per column, gaps up to max_gap interpolated."""
    return _trace_boundary(mask, "upper", max_gap)


def lower_boundary(mask: np.ndarray, max_gap: int = MAX_BRIDGE_GAP) -> Contour:
    return _trace_boundary(mask, "lower", max_gap)


def save_average_pgm(maps: FusionMaps, path) -> None:
    """Debug dump of the averaged probability map."""
    save_pgm(maps.average(), path)
