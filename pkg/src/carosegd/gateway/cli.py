"""Command-line front end.

Exit codes: 0 success, 2 usage or I/O error, 3 stage-1 failure (the result
document is still written, carrying the failed status).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..errors import CaroSegError
from ..evalkit import ContourPair, pooled_rows, render_report, render_report_csv
from ..geometry import Contour, annotation_contours, read_annotation_csv
from ..imaging import find_meta, read_meta
from ..inference import DilatedUnetConfig, init_weights, save_weights
from ..phantom import write_phantom_dataset
from ..pipeline import FarWallParams, ImcParams, PipelineConfig
from . import ops
from .store import SessionStore, default_store_path, new_item

IMAGE_SUFFIXES = (".png", ".pgm", ".jpg", ".jpeg", ".tif", ".tiff")


def _store(args) -> SessionStore:
    return SessionStore(Path(args.store) if args.store else default_store_path())


def _config(args) -> PipelineConfig:
    fw = FarWallParams(stride=args.stride_fw) if getattr(args, "stride_fw", None) else FarWallParams()
    imc = ImcParams(stride=args.stride_imc) if getattr(args, "stride_imc", None) else ImcParams()
    return PipelineConfig(farwall=fw, imc=imc)


def _provider(args) -> ops.PredictorProvider:
    kind = getattr(args, "predictor", None)
    if kind:
        if kind == "oracle":
            return ops.OracleProvider(getattr(args, "oracle_expert", "A1") or "A1")
        if kind.startswith("constant:"):
            return ops.ConstantProvider(float(kind.split(":", 1)[1]))
        raise CaroSegError(f"unknown predictor {kind!r}; use oracle or constant:<v>")
    if not (getattr(args, "weights_fw", None) and getattr(args, "weights_imc", None)):
        raise CaroSegError("supply --weights-fw and --weights-imc, or --predictor")
    return ops.WeightsProvider(Path(args.weights_fw), Path(args.weights_imc))


def _read_axis_file(path: Path) -> Contour:
    points = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts and parts[0].upper() == "AXIS":
            parts = parts[1:]
        if len(parts) != 2:
            raise CaroSegError(f"axis file line {line!r} is not x,y")
        points.append({"x": float(parts[0]), "y": float(parts[1])})
    return ops.interpolate_control_points(points)


# -- subcommands --------------------------------------------------------------


def cmd_ingest(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        print(f"error: {directory} is not a readable directory", file=sys.stderr)
        return 2
    store = _store(args)
    ingested, skipped = [], []
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        try:
            meta_path = find_meta(path)
            read_meta(meta_path)
        except CaroSegError as exc:
            skipped.append({"file": path.name, "reason": str(exc)})
            continue
        except FileNotFoundError as exc:
            skipped.append({"file": path.name, "reason": str(exc)})
            continue
        annotations = {}
        for csv in sorted(directory.glob(f"{path.stem}_*.csv")):
            expert = csv.stem[len(path.stem) + 1 :]
            annotations[expert] = str(csv)
        item = new_item(path.stem, str(path), str(meta_path), annotations)
        store.save_item(item)
        ingested.append(item["id"])
    catalog = {"items": ingested, "skipped": skipped, "store": str(store.root)}
    print(json.dumps(catalog, indent=2, sort_keys=True))
    for rec in skipped:
        print(f"warning: skipped {rec['file']}: {rec['reason']}", file=sys.stderr)
    return 0


def cmd_segment(args) -> int:
    store = _store(args)
    item = store.get_item(args.image)
    if item is None:
        print(f"error: no ingested item {args.image!r}", file=sys.stderr)
        return 2
    try:
        x_left, x_right = (int(v) for v in args.roi.split(","))
        config = _config(args)
        provider = _provider(args)
        manual_axis = _read_axis_file(Path(args.axis)) if args.axis else None

        with store.lock(item["id"]):
            item["roi"] = {"x_left": x_left, "x_right": x_right}
            item["farwall"] = None
            item["manual_axis"] = None
            store.transition(item, "roi_set")
            if manual_axis is not None:
                img = ops.load_item_image(item)
                item["manual_axis"] = ops.contour_document(manual_axis, img.pitch_vertical_um)
            data, result = ops.run_full(
                store,
                item,
                provider,
                config,
                manual_axis=manual_axis,
                debug_dir=Path(args.debug_maps) if args.debug_maps else None,
            )
            if result.farwall is not None:
                img = ops.load_item_image(item)
                item["farwall"] = {
                    "status": result.farwall.status,
                    "axis": ops.contour_document(result.farwall.axis, img.pitch_vertical_um),
                    "raw_axis": ops.contour_document(
                        result.farwall.raw_axis, img.pitch_vertical_um
                    ),
                    "diagnostics": result.farwall.diagnostics,
                }
            store.transition(item, "segmented" if result.status == "ok" else "farwall_failed")
    except (CaroSegError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    result_path = store.results_dir / f"{item['id']}.json"
    if args.out:
        Path(args.out).write_bytes(data)
        result_path = Path(args.out)
    if result.status == "failed":
        print(f"{item['id']}: stage-1 failure, result written to {result_path}", file=sys.stderr)
        return 3
    print(f"{item['id']}: ok, IMT mean {result.imt_mean_um:.1f} um, result {result_path}")
    return 0


def _annotation_sets(directory: Path) -> dict[str, dict[str, Path]]:
    """id -> expert -> csv path."""
    out: dict[str, dict[str, Path]] = {}
    for csv in sorted(directory.glob("*_*.csv")):
        stem, _, expert = csv.stem.rpartition("_")
        if stem:
            out.setdefault(stem, {})[expert] = csv
    return out


def _contours_from_result(doc: dict) -> tuple[Contour, Contour]:
    li = doc["li"]
    ma = doc["ma"]
    return (
        Contour(int(li["x_start"]), np.asarray(li["ordinates_px"], dtype=np.float64)),
        Contour(int(ma["x_start"]), np.asarray(ma["ordinates_px"], dtype=np.float64)),
    )


def cmd_evaluate(args) -> int:
    ann_dir = Path(args.annotations)
    if not ann_dir.is_dir():
        print(f"error: {ann_dir} is not a readable directory", file=sys.stderr)
        return 2
    annotations = _annotation_sets(ann_dir)
    reference = args.reference
    candidate = args.candidate

    pairs = {"LI": [], "MA": []}
    triples = []
    n_images = 0
    success = None

    try:
        if candidate == "results":
            results_dir = Path(args.results) if args.results else None
            if results_dir is None or not results_dir.is_dir():
                print("error: --results directory required", file=sys.stderr)
                return 2
            ok_count, total, matched = 0, 0, 0
            for path in sorted(results_dir.glob("*.json")):
                doc = json.loads(path.read_text())
                total += 1
                image_id = doc["image_id"]
                if image_id in annotations and reference in annotations[image_id]:
                    matched += 1
                if doc.get("status") != "ok":
                    continue
                ok_count += 1
                if image_id not in annotations or reference not in annotations[image_id]:
                    continue
                ann = read_annotation_csv(annotations[image_id][reference], reference)
                li_r, ma_r = annotation_contours(ann)
                li_c, ma_c = _contours_from_result(doc)
                pitch = float(doc["pitch_vertical_um"])
                pairs["LI"].append(ContourPair(li_c, li_r, pitch))
                pairs["MA"].append(ContourPair(ma_c, ma_r, pitch))
                triples.append((li_c, ma_c, li_r, ma_r, pitch))
                n_images += 1
            if total:
                success = (ok_count, total)
            candidate_label = "method"
            # Failed runs still count toward the report: the success-rate
            # line is the headline number, the rows just go empty.
            if n_images == 0 and matched > 0:
                rows = pooled_rows(pairs, triples)
                rate = success[0] / success[1] if success else None
                print(
                    render_report(
                        rows,
                        candidate_label,
                        reference,
                        n_images,
                        success_rate=rate,
                        success_counts=success,
                    ),
                    end="",
                )
                if args.csv:
                    Path(args.csv).write_text(render_report_csv(rows, candidate_label, reference))
                return 0
        else:
            for image_id, experts in sorted(annotations.items()):
                if candidate not in experts or reference not in experts:
                    continue
                try:
                    meta = read_meta(find_meta(ann_dir / f"{image_id}.png"))
                except (FileNotFoundError, CaroSegError):
                    print(f"warning: no pitch metadata for {image_id}, skipped", file=sys.stderr)
                    continue
                pitch = meta["pitch_vertical_um"]
                li_c, ma_c = annotation_contours(read_annotation_csv(experts[candidate], candidate))
                li_r, ma_r = annotation_contours(read_annotation_csv(experts[reference], reference))
                pairs["LI"].append(ContourPair(li_c, li_r, pitch))
                pairs["MA"].append(ContourPair(ma_c, ma_r, pitch))
                triples.append((li_c, ma_c, li_r, ma_r, pitch))
                n_images += 1
            candidate_label = candidate

        if n_images == 0:
            print("error: no overlapping ids between candidate and reference sets", file=sys.stderr)
            return 2
        rows = pooled_rows(pairs, triples)
    except (CaroSegError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    rate = success[0] / success[1] if success else None
    print(
        render_report(
            rows,
            candidate_label,
            reference,
            n_images,
            success_rate=rate,
            success_counts=success,
        ),
        end="",
    )
    if args.csv:
        Path(args.csv).write_text(render_report_csv(rows, candidate_label, reference))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        provider = _provider(args)
    except CaroSegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    app = create_app(_store(args), provider, _config(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_make_phantom(args) -> int:
    try:
        ids = write_phantom_dataset(Path(args.out), count=args.count, seed=args.seed)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"items": ids, "directory": str(args.out)}, indent=2, sort_keys=True))
    return 0


def cmd_init_weights(args) -> int:
    try:
        dilations = tuple(int(d) for d in args.dilations.split(","))
        cfg = DilatedUnetConfig(
            encoder_levels=args.levels,
            base_channels=args.base,
            bottleneck_dilations=dilations,
            kernel_size=args.kernel,
        )
        weights = init_weights(cfg, seed=args.seed)
        save_weights(Path(args.out), weights)
    except (CaroSegError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(weights.names())} layers to {args.out}")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carosegd",
        description="Two-stage carotid intima-media segmentation toolchain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="catalog a directory of images")
    p.add_argument("directory")
    p.add_argument("--store", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("segment", help="run the full pipeline on an ingested item")
    p.add_argument("--image", required=True, help="item id")
    p.add_argument("--roi", required=True, help="x_left,x_right (inclusive columns)")
    p.add_argument("--axis", default=None, help="manual axis control points file (x,y lines)")
    p.add_argument("--weights-fw", default=None)
    p.add_argument("--weights-imc", default=None)
    p.add_argument("--predictor", default=None, help="oracle or constant:<v> instead of weights")
    p.add_argument("--oracle-expert", default="A1")
    p.add_argument("--store", default=None)
    p.add_argument("--out", default=None, help="also write the result JSON here")
    p.add_argument("--debug-maps", default=None, help="directory for PGM fusion maps")
    p.add_argument("--stride-fw", type=int, default=None)
    p.add_argument("--stride-imc", type=int, default=None)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="compare contours and print the report table")
    p.add_argument("--results", default=None, help="directory of result JSON documents")
    p.add_argument("--annotations", required=True, help="directory of annotation CSVs")
    p.add_argument("--reference", default="A1")
    p.add_argument("--candidate", default="results", help="'results' or an expert id")
    p.add_argument("--csv", default=None, help="also write the table as CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the review HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", default=None)
    p.add_argument("--weights-fw", default=None)
    p.add_argument("--weights-imc", default=None)
    p.add_argument("--predictor", default=None)
    p.add_argument("--oracle-expert", default="A1")
    p.add_argument("--stride-fw", type=int, default=None)
    p.add_argument("--stride-imc", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("make-phantom", help="write a synthetic dataset with known truth")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_make_phantom)

    p = sub.add_parser("init-weights", help="write a random weight file in the native format")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--base", type=int, default=16)
    p.add_argument("--dilations", default="1,2,4,8")
    p.add_argument("--kernel", type=int, default=3)
    p.set_defaults(func=cmd_init_weights)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def main_entry() -> None:
    sys.exit(main())
