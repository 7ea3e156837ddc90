"""Curve mathematics: monotone cubic interpolation of expert control points,
median-axis computation, mask rasterization, and cubic least-squares smoothing.

A Contour is a column-indexed open curve: one sub-pixel ordinate per abscissa
over a contiguous span of columns.  The same type carries the lumen-intima and
media-adventitia interfaces and the median axis between them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CrossingContours, InvalidArgument, OutOfRange


@dataclass(frozen=True)
class Contour:
    x_start: int
    ordinates: np.ndarray

    def __post_init__(self):
        ys = np.asarray(self.ordinates, dtype=np.float64)
        if ys.ndim != 1 or ys.size < 1:
            raise InvalidArgument("a contour needs at least one ordinate")
        if not np.all(np.isfinite(ys)):
            raise InvalidArgument("contour ordinates must be finite")
        ys = ys.copy()
        ys.setflags(write=False)
        object.__setattr__(self, "ordinates", ys)
        object.__setattr__(self, "x_start", int(self.x_start))

    def __len__(self) -> int:
        return self.ordinates.size

    @property
    def x_end(self) -> int:
        """Last column of the span, inclusive."""
        return self.x_start + len(self) - 1

    @property
    def columns(self) -> np.ndarray:
        return np.arange(self.x_start, self.x_end + 1)

    def y(self, x: int) -> float:
        if not self.x_start <= x <= self.x_end:
            raise OutOfRange(f"column {x} outside contour span [{self.x_start}, {self.x_end}]")
        return float(self.ordinates[x - self.x_start])

    def shifted(self, dx: int) -> "Contour":
        """Translate the abscissa span by dx columns."""
        return Contour(self.x_start + dx, self.ordinates)

    def scaled_rows(self, factor: float) -> "Contour":
        """Multiply every ordinate by a row-mapping factor."""
        return Contour(self.x_start, self.ordinates * factor)

    def restricted(self, x0: int, x1: int) -> "Contour":
        """Slice to [x0, x1]; the range must lie inside the span."""
        if x0 < self.x_start or x1 > self.x_end or x0 > x1:
            raise OutOfRange(
                f"restriction [{x0}, {x1}] outside contour span [{self.x_start}, {self.x_end}]"
            )
        i0 = x0 - self.x_start
        return Contour(x0, self.ordinates[i0 : i0 + (x1 - x0 + 1)])


def shared_span(a: Contour, b: Contour) -> tuple[int, int]:
    """Intersection of two contour spans; raises when empty."""
    x0 = max(a.x_start, b.x_start)
    x1 = min(a.x_end, b.x_end)
    if x0 > x1:
        raise InvalidArgument(
            f"contour spans [{a.x_start},{a.x_end}] and [{b.x_start},{b.x_end}] do not overlap"
        )
    return x0, x1


@dataclass(frozen=True)
class AnnotationSet:
    """Ordered control points traced by one expert for one image."""

    li_points: tuple[tuple[float, float], ...]
    ma_points: tuple[tuple[float, float], ...]
    expert_id: str

    def __post_init__(self):
        for name, pts in (("LI", self.li_points), ("MA", self.ma_points)):
            if len(pts) < 2:
                raise InvalidArgument(f"{name}: need at least 2 control points")
            xs = [p[0] for p in pts]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise InvalidArgument(f"{name}: control points must be strictly increasing in x")


# -- PCHIP ------------------------------------------------------------------

def _edge_slope(h0: float, h1: float, d0: float, d1: float) -> float:
    # One-sided three-point estimate, limited so the end interval stays
    # shape-preserving.
    m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
    if np.sign(m) != np.sign(d0):
        return 0.0
    if np.sign(d0) != np.sign(d1) and abs(m) > 3.0 * abs(d0):
        return 3.0 * d0
    return m


def _pchip_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Knot slopes with Fritsch-Carlson limiting.

    Interior slopes are the weighted harmonic mean of adjacent secants when
    those secants share a sign, zero otherwise; endpoint slopes use the
    shape-preserving three-point rule.
    """
    h = np.diff(x)
    delta = np.diff(y) / h
    n = x.size
    m = np.zeros(n)
    if n == 2:
        m[0] = m[1] = delta[0]
        return m
    for k in range(1, n - 1):
        d0, d1 = delta[k - 1], delta[k]
        if d0 == 0.0 or d1 == 0.0 or np.sign(d0) != np.sign(d1):
            m[k] = 0.0
        else:
            w1 = 2.0 * h[k] + h[k - 1]
            w2 = h[k] + 2.0 * h[k - 1]
            m[k] = (w1 + w2) / (w1 / d0 + w2 / d1)
    m[0] = _edge_slope(h[0], h[1], delta[0], delta[1])
    m[-1] = _edge_slope(h[-1], h[-2], delta[-1], delta[-2])
    return m


def pchip_eval(points, query_xs) -> np.ndarray:
    """Evaluate the monotone piecewise cubic Hermite interpolant.

    points: ordered (x, y) control points, strictly increasing x.
    query_xs: positions inside [first x, last x]; no extrapolation.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise InvalidArgument("need at least 2 (x, y) control points")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(np.diff(x) == 0):
        raise InvalidArgument("duplicate control point abscissa")
    if np.any(np.diff(x) < 0):
        raise InvalidArgument("control points must be strictly increasing in x")
    q = np.asarray(query_xs, dtype=np.float64)
    if q.size and (q.min() < x[0] or q.max() > x[-1]):
        raise OutOfRange(
            f"query range [{q.min()}, {q.max()}] outside knot span [{x[0]}, {x[-1]}]"
        )
    m = _pchip_slopes(x, y)
    idx = np.clip(np.searchsorted(x, q, side="right") - 1, 0, x.size - 2)
    h = x[idx + 1] - x[idx]
    t = (q - x[idx]) / h
    h00 = (1.0 + 2.0 * t) * (1.0 - t) ** 2
    h10 = t * (1.0 - t) ** 2
    h01 = t * t * (3.0 - 2.0 * t)
    h11 = t * t * (t - 1.0)
    return h00 * y[idx] + h10 * h * m[idx] + h01 * y[idx + 1] + h11 * h * m[idx + 1]


def pchip_interpolate(points, query_xs) -> Contour:
    """Interpolate control points onto consecutive integer abscissas."""
    q = np.asarray(query_xs)
    if q.size < 1:
        raise InvalidArgument("need at least one query abscissa")
    if np.any(np.diff(q) != 1):
        raise InvalidArgument("query abscissas must be consecutive integers")
    ys = pchip_eval(points, q.astype(np.float64))
    return Contour(int(q[0]), ys)


# -- axis and rasterization ---------------------------------------------------

def median_axis(li: Contour, ma: Contour) -> Contour:
    """Curve halfway between the two interfaces, on their shared span."""
    x0, x1 = shared_span(li, ma)
    a = li.restricted(x0, x1).ordinates
    b = ma.restricted(x0, x1).ordinates
    return Contour(x0, (a + b) / 2.0)


def _check_axis_rows(ordinates: np.ndarray, height: int, what: str) -> None:
    # Up to one pixel of overshoot beyond the grid is tolerated so that
    # degenerate all-zeros / all-ones masks remain expressible.
    if ordinates.min() < -1.0 or ordinates.max() > float(height):
        raise InvalidArgument(
            f"{what} ordinates [{ordinates.min():.2f}, {ordinates.max():.2f}] "
            f"outside image rows [0, {height - 1}]"
        )


def rasterize_below(axis: Contour, shape: tuple[int, int]) -> np.ndarray:
    """Binary mask with 1 strictly below the axis (larger row index).

    A pixel whose row index equals the axis ordinate exactly goes to the
    0 side.
    """
    h, w = shape
    if axis.x_start > 0 or axis.x_end < w - 1:
        raise InvalidArgument(
            f"axis span [{axis.x_start}, {axis.x_end}] does not cover all {w} columns"
        )
    ys = axis.restricted(0, w - 1).ordinates
    _check_axis_rows(ys, h, "axis")
    rows = np.arange(h, dtype=np.float64)[:, None]
    return (rows > ys[None, :]).astype(np.uint8)


def rasterize_between(li: Contour, ma: Contour, shape: tuple[int, int]) -> np.ndarray:
    """Binary mask with 1 where li.y(x) <= y <= ma.y(x), on the shared span."""
    h, w = shape
    x0, x1 = shared_span(li, ma)
    x0c, x1c = max(x0, 0), min(x1, w - 1)
    if x0c > x1c:
        raise InvalidArgument("contour span does not intersect the mask columns")
    a = li.restricted(x0c, x1c).ordinates
    b = ma.restricted(x0c, x1c).ordinates
    over = np.nonzero(a > b)[0]
    if over.size:
        raise CrossingContours(x0c + int(over[0]))
    mask = np.zeros((h, w), dtype=np.uint8)
    rows = np.arange(h, dtype=np.float64)[:, None]
    band = (rows >= a[None, :]) & (rows <= b[None, :])
    mask[:, x0c : x1c + 1] = band.astype(np.uint8)
    return mask


# -- cubic smoothing ----------------------------------------------------------

def polyfit_cubic(contour: Contour, eval_span: tuple[int, int] | None = None) -> Contour:
    """Least-squares degree-3 polynomial through the contour.

    Abscissas are centered and scaled to [-1, 1] before solving so that
    pixel coordinates up to ~1000 keep the Vandermonde well conditioned.
    eval_span optionally evaluates the fitted polynomial on a different
    column range (the far-wall axis must span the whole ROI even when the
    retrieved boundary does not).
    """
    if len(contour) < 4:
        raise InvalidArgument(f"cubic fit needs at least 4 points, got {len(contour)}")
    x = contour.columns.astype(np.float64)
    mid = (x[0] + x[-1]) / 2.0
    half = (x[-1] - x[0]) / 2.0
    u = (x - mid) / half
    V = np.vander(u, 4, increasing=True)
    coef, *_ = np.linalg.lstsq(V, contour.ordinates, rcond=None)
    if eval_span is None:
        xe = x
        x_start = contour.x_start
    else:
        x_start = eval_span[0]
        xe = np.arange(eval_span[0], eval_span[1] + 1, dtype=np.float64)
    ue = (xe - mid) / half
    ys = np.vander(ue, 4, increasing=True) @ coef
    return Contour(x_start, ys)


# -- annotation files ---------------------------------------------------------

def read_annotation_csv(path: Path, expert_id: str | None = None) -> AnnotationSet:
    """Read expert control points from CSV rows `interface(LI|MA),x,y`.

    The expert id defaults to the suffix of the conventional file name
    `<image>_<expert>.csv`.
    """
    path = Path(path)
    li: list[tuple[float, float]] = []
    ma: list[tuple[float, float]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            if len(row) != 3:
                raise InvalidArgument(f"{path}:{lineno}: expected 'interface,x,y', got {row!r}")
            kind = row[0].strip().upper()
            try:
                x, y = float(row[1]), float(row[2])
            except ValueError as exc:
                raise InvalidArgument(f"{path}:{lineno}: non-numeric coordinate") from exc
            if kind == "LI":
                li.append((x, y))
            elif kind == "MA":
                ma.append((x, y))
            else:
                raise InvalidArgument(f"{path}:{lineno}: unknown interface {row[0]!r}")
    if expert_id is None:
        expert_id = path.stem.rsplit("_", 1)[-1] if "_" in path.stem else path.stem
    return AnnotationSet(tuple(li), tuple(ma), expert_id)


def annotation_contours(ann: AnnotationSet) -> tuple[Contour, Contour]:
    """PCHIP-interpolated LI and MA curves over each interface's knot span
    (integer columns)."""
    curves = []
    for pts in (ann.li_points, ann.ma_points):
        x0 = int(np.ceil(pts[0][0]))
        x1 = int(np.floor(pts[-1][0]))
        if x1 < x0:
            raise InvalidArgument("annotation span contains no integer column")
        curves.append(pchip_interpolate(pts, np.arange(x0, x1 + 1)))
    return curves[0], curves[1]
