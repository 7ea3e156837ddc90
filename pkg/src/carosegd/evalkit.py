"""Contour metrics, cross-validation folds, and evaluation reports.

Column-wise statistics are computed on the abscissa intersection of the two
contours and expressed in micrometers.  Reports pool per-column values across
all images (rather than averaging per-image means); the header records this.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .errors import CrossingContours, InvalidArgument
from .geometry import Contour, shared_span

FOLD_COUNT = 5


@dataclass(frozen=True)
class ContourPair:
    candidate: Contour
    reference: Contour
    pitch_vertical_um: float

    def __post_init__(self):
        shared_span(self.candidate, self.reference)  # raises when empty
        if not self.pitch_vertical_um > 0:
            raise InvalidArgument("pitch must be positive")


def _column_absdiff_um(pair: ContourPair) -> np.ndarray:
    x0, x1 = shared_span(pair.candidate, pair.reference)
    a = pair.candidate.restricted(x0, x1).ordinates
    b = pair.reference.restricted(x0, x1).ordinates
    return np.abs(a - b) * pair.pitch_vertical_um


def _stats(values: np.ndarray) -> dict:
    return {
        "mean_um": float(np.mean(values)),
        "median_um": float(np.median(values)),
        "std_um": float(np.std(values)),
        "n_columns": int(values.size),
    }


def absdiff_stats(pair: ContourPair) -> dict:
    """Per-column |candidate.y - reference.y| in um: mean, median, std."""
    return _stats(_column_absdiff_um(pair))


def imt_from_contours(li: Contour, ma: Contour, pitch_um: float) -> dict:
    """Thickness profile (ma - li) x pitch on the shared span, plus stats."""
    x0, x1 = shared_span(li, ma)
    a = li.restricted(x0, x1).ordinates
    b = ma.restricted(x0, x1).ordinates
    below = np.flatnonzero(b < a - 1e-9)
    if below.size:
        raise CrossingContours(x0 + int(below[0]))
    profile = (b - a) * pitch_um
    out = _stats(profile)
    out["profile_um"] = profile
    out["x_start"] = x0
    return out


def hausdorff(
    a: Contour,
    b: Contour,
    pitch_vertical_um: float,
    pitch_horizontal_um: float | None = None,
) -> float:
    """Symmetric Hausdorff distance between the two polylines' integer-abscissa
    point sets, in um."""
    ph = pitch_vertical_um if pitch_horizontal_um is None else pitch_horizontal_um
    pa = np.column_stack([a.columns * ph, a.ordinates * pitch_vertical_um])
    pb = np.column_stack([b.columns * ph, b.ordinates * pitch_vertical_um])
    return float(max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0]))


# -- cross-validation folds ---------------------------------------------------


@dataclass(frozen=True)
class FoldPlan:
    seed: int
    folds: tuple

    @property
    def k(self) -> int:
        return len(self.folds)

    def to_json(self) -> str:
        doc = {"seed": self.seed, "k": self.k, "folds": list(self.folds)}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "FoldPlan":
        doc = json.loads(text)
        return FoldPlan(seed=doc["seed"], folds=tuple(doc["folds"]))


def make_folds(ids, seed: int = 0) -> FoldPlan:
    """Deterministic 5-fold split, 60/20/20 within each fold.

    Ids are shuffled once; the k equal blocks rotate through the test role,
    the following block is validation, the rest train.  Test sets therefore
    partition the id universe.
    """
    ids = sorted(str(i) for i in ids)
    if len(set(ids)) != len(ids):
        raise InvalidArgument("duplicate ids")
    if len(ids) < FOLD_COUNT:
        raise InvalidArgument(f"need at least {FOLD_COUNT} ids, got {len(ids)}")
    order = list(ids)
    random.Random(seed).shuffle(order)
    blocks = [list(b) for b in np.array_split(np.array(order, dtype=object), FOLD_COUNT)]
    folds = []
    for i in range(FOLD_COUNT):
        test = blocks[i]
        val = blocks[(i + 1) % FOLD_COUNT]
        train = [x for j, b in enumerate(blocks) if j not in (i, (i + 1) % FOLD_COUNT) for x in b]
        folds.append({"train": train, "val": [str(v) for v in val], "test": [str(t) for t in test]})
    return FoldPlan(seed=seed, folds=tuple(folds))


# -- report -------------------------------------------------------------------


def pooled_rows(
    pairs_by_interface: dict[str, list[ContourPair]],
    imt_triples: list[tuple[Contour, Contour, Contour, Contour, float]],
) -> dict:
    """Pooled per-column statistics for the report.

    pairs_by_interface maps "LI"/"MA" to contour pairs; imt_triples holds
    (li_cand, ma_cand, li_ref, ma_ref, pitch) per image for the |IMT
    difference| row.
    """
    rows = {}
    for name, pairs in pairs_by_interface.items():
        if pairs:
            pooled = np.concatenate([_column_absdiff_um(p) for p in pairs])
            rows[name] = _stats(pooled)
    diffs = []
    for li_c, ma_c, li_r, ma_r, pitch in imt_triples:
        cand = imt_from_contours(li_c, ma_c, pitch)
        ref = imt_from_contours(li_r, ma_r, pitch)
        c0 = max(cand["x_start"], ref["x_start"])
        c1 = min(
            cand["x_start"] + cand["profile_um"].size - 1,
            ref["x_start"] + ref["profile_um"].size - 1,
        )
        if c1 < c0:
            raise InvalidArgument("IMT profiles share no columns")
        pc = cand["profile_um"][c0 - cand["x_start"] : c1 - cand["x_start"] + 1]
        pr = ref["profile_um"][c0 - ref["x_start"] : c1 - ref["x_start"] + 1]
        diffs.append(np.abs(pc - pr))
    if diffs:
        rows["IMT"] = _stats(np.concatenate(diffs))
    return rows


def render_report(
    rows: dict,
    candidate_label: str,
    reference_label: str,
    n_images: int,
    success_rate: float | None = None,
    success_counts: tuple[int, int] | None = None,
) -> str:
    """Aligned text table: LI/MA/IMT rows of mean +/- std (median) in um."""
    title = f"Column-wise absolute differences, {candidate_label} vs. {reference_label}"
    lines = [
        title,
        f"{n_images} images; per-column values pooled across images",
        "",
        f"{'':>6}  {'mean +/- std (um)':>22}  {'median (um)':>12}  {'columns':>9}",
    ]
    for name in ("LI", "MA", "IMT"):
        if name not in rows:
            continue
        r = rows[name]
        pm = f"{r['mean_um']:.0f} +/- {r['std_um']:.0f}"
        lines.append(f"{name:>6}  {pm:>22}  {r['median_um']:>12.0f}  {r['n_columns']:>9}")
    if success_rate is not None:
        ok, total = success_counts if success_counts else (0, 0)
        lines.append("")
        lines.append(
            f"Stage-1 success rate: {success_rate * 100:.1f}% ({ok}/{total})"
        )
    return "\n".join(lines) + "\n"


def render_report_csv(rows: dict, candidate_label: str, reference_label: str) -> str:
    out = ["interface,candidate,reference,mean_um,std_um,median_um,n_columns"]
    for name in ("LI", "MA", "IMT"):
        if name not in rows:
            continue
        r = rows[name]
        out.append(
            f"{name},{candidate_label},{reference_label},"
            f"{r['mean_um']:.4f},{r['std_um']:.4f},{r['median_um']:.4f},{r['n_columns']}"
        )
    return "\n".join(out) + "\n"
