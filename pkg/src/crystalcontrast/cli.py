"""Command-line entry point.

Subcommands mirror the pipeline stages: synth, augment, focus-measure,
classify, evaluate, contrast-report, validate.  All randomness is seeded
through flags and identical invocations produce identical output bytes;
--jobs only changes wall time, never results.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import graph as graphmod
from ._parallel import parallel_map
from .augment import AugmentConfig, expand_dataset
from .contrast import ClassificationConfig, ContrastMethod, classify_agglomeration
from .errors import PipelineError, UsageError
from .focusmeas import Measure, load_gray
from .interchange import Scene, load_scene, save_scene, scene_to_json_bytes
from .metrics import evaluate_corpus
from .pipeline import (
    FOCUS_SOURCES,
    corpus_contrast_report,
    focus_values_for_source,
    instance_focus_scores,
    normalized_focus_values,
    resolve_image,
)
from .synth import SynthConfig, generate_corpus, save_image

log = logging.getLogger("crystalcontrast")


def _parse_range(text: str, cast=float) -> tuple:
    try:
        lo, hi = text.split(":")
        return cast(lo), cast(hi)
    except ValueError:
        raise UsageError(f"expected lo:hi, got {text!r}")


def _scene_files(directory: Path) -> list[Path]:
    return sorted(p for p in directory.glob("*.json") if p.name != "manifest.json")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    def fmt(v):
        return f"{v:.6f}" if isinstance(v, float) else str(v)

    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    scene = load_scene(args.scene)
    log.info("%s: valid scene with %d instances", args.scene, len(scene.instances))
    return 0


def cmd_synth(args) -> int:
    config = SynthConfig(
        width=args.width, height=args.height, n_layers=args.layers,
        focal_layer=args.focal_layer if args.focal_layer is not None else args.layers // 2,
        crystals_per_layer=_parse_range(args.crystals, int),
        blur_per_layer_step=args.blur_step,
        dust_count=_parse_range(args.dust, int),
        seed=args.seed,
    )
    pairs = generate_corpus(config, args.n, args.out_dir)
    log.info("wrote %d scenes to %s", len(pairs), args.out_dir)
    return 0


def cmd_augment(args) -> int:
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = AugmentConfig(
        fraction_range=_parse_range(args.fraction),
        kernel_choices=tuple(int(k) for k in args.kernels.split(",")),
        seed=args.seed,
    )
    scene_files = _scene_files(in_dir)
    if not scene_files:
        raise UsageError(f"no scene files in {in_dir}")
    pairs = []
    for path in scene_files:
        scene = load_scene(path)
        pairs.append((resolve_image(scene, path), scene))
    expanded = expand_dataset(pairs, args.copies, config)
    n_written = 0
    for idx, (img, scene) in enumerate(expanded):
        scene_idx, copy_idx = divmod(idx, args.copies)
        stem = f"{scene_files[scene_idx].stem}_c{copy_idx}"
        save_image(img, out_dir / f"{stem}.png")
        save_scene(replace(scene, image_path=f"{stem}.png"), out_dir / f"{stem}.json")
        n_written += 1
    log.info("wrote %d augmented scenes to %s", n_written, out_dir)
    return 0


def cmd_focus_measure(args) -> int:
    in_dir = Path(args.in_dir)
    scene_files = _scene_files(in_dir)
    if not scene_files:
        raise UsageError(f"no scene files in {in_dir}")
    measures = [Measure(m) for m in args.measures.split(",")]

    def one(path: Path):
        scene = load_scene(path)
        if not scene.instances:
            return []
        img = resolve_image(scene, path)
        rows = []
        for measure in measures:
            raw = instance_focus_scores(img, scene, measure)
            norm = normalized_focus_values(img, scene, measure)
            for inst_id in sorted(raw):
                rows.append([path.stem, inst_id, measure.value,
                             float(raw[inst_id].value), float(norm[inst_id])])
        return rows

    all_rows = [row for rows in parallel_map(one, scene_files, args.jobs) for row in rows]
    _write_csv(Path(args.out), ["scene_id", "instance_id", "measure",
                                "raw_value", "normalized_value"], all_rows)
    return 0


def _classify_one(in_path: Path, out_path: Path, config: ClassificationConfig,
                  focus_source: str, dump_graph: Path | None) -> None:
    scene = load_scene(in_path)
    focus_values = focus_values_for_source(scene, focus_source, scene_path=in_path)
    result = classify_agglomeration(scene, config, focus_values)
    save_scene(result, out_path)
    if dump_graph is not None:
        adj = graphmod.build_adjacency(result, config.touch_radius)
        doc = {
            "touch_radius": config.touch_radius,
            "nodes": sorted(adj.nodes),
            "edges": sorted([list(e) for e in adj.edges]),
        }
        dump_graph.write_text(
            json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8",
        )


def cmd_classify(args) -> int:
    method = ContrastMethod.CONTRAST1 if args.method == "c1" else ContrastMethod.CONTRAST2
    if method is ContrastMethod.CONTRAST2 and args.focus_source != "label":
        raise UsageError("contrast2 compares binary focus levels; "
                         "--focus-source must be 'label' with --method c2")
    config = ClassificationConfig(
        method=method, threshold=args.threshold,
        touch_radius=args.touch_radius, postprocess_order=args.post_order,
    )
    in_path, out_path = Path(args.input), Path(args.output)
    if in_path.is_dir():
        if args.dump_graph:
            raise UsageError("--dump-graph needs single-file mode")
        out_path.mkdir(parents=True, exist_ok=True)
        files = _scene_files(in_path)
        if not files:
            raise UsageError(f"no scene files in {in_path}")
        parallel_map(
            lambda p: _classify_one(p, out_path / p.name, config, args.focus_source, None),
            files, args.jobs,
        )
        log.info("classified %d scenes into %s", len(files), out_path)
    else:
        _classify_one(in_path, out_path, config, args.focus_source,
                      Path(args.dump_graph) if args.dump_graph else None)
    return 0


def cmd_evaluate(args) -> int:
    report = evaluate_corpus(
        args.gt_dir, args.pred_dir, iou_threshold=args.iou,
        average=args.average, acc_denominator=args.acc_denominator,
        jobs=args.jobs,
    )
    payload = json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    if args.per_scene_csv:
        rows = [
            [s["scene"], float(s["acc"]), float(s["f1"]), float(s["pixel_iou"]),
             float(s["ap"]), float(s["recall"])]
            for s in report.per_scene
        ]
        _write_csv(Path(args.per_scene_csv),
                   ["scene", "acc", "f1", "pixel_iou", "ap", "recall"], rows)
    return 0


def cmd_contrast_report(args) -> int:
    rows = corpus_contrast_report(args.in_dir, touch_radius=args.touch_radius)
    _write_csv(
        Path(args.out),
        ["method", "class", "normalized_mean_contrast", "n_instances"],
        [[r.method, r.agglo_class, float(r.normalized_mean_contrast), r.n_instances]
         for r in rows],
    )
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crystalcontrast",
        description="Focus-contrast agglomeration classification toolkit",
    )
    parser.add_argument("--jobs", type=int, default=1, help="worker threads")
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scene file against the schema")
    p.add_argument("scene")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synth", help="generate a synthetic ground-truth corpus")
    p.add_argument("out_dir")
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--focal-layer", type=int, default=None)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--crystals", default="2:4", help="crystals per layer, lo:hi")
    p.add_argument("--blur-step", type=int, default=6)
    p.add_argument("--dust", default="0:3", help="dust disks per scene, lo:hi")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("augment", help="instance-blurring dataset expansion")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--copies", type=int, default=5)
    p.add_argument("--fraction", default="0.25:0.5")
    p.add_argument("--kernels", default="11,13,15,17")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("focus-measure", help="per-instance focus measures as CSV")
    p.add_argument("in_dir")
    p.add_argument("--measures",
                   default="laplacian-mask,laplacian-contour,brenner,reblur")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_focus_measure)

    p = sub.add_parser("classify", help="agglomeration classification")
    p.add_argument("input", help="scene file or directory")
    p.add_argument("output", help="output file or directory")
    p.add_argument("--method", choices=["c1", "c2"], default="c2")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--touch-radius", type=int, default=graphmod.DEFAULT_TOUCH_RADIUS)
    p.add_argument("--focus-source", choices=list(FOCUS_SOURCES), default="label")
    p.add_argument("--post-order", choices=["fill-first", "component-first"],
                   default="fill-first")
    p.add_argument("--dump-graph", default=None, help="write the adjacency edge list")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="compare predictions against ground truth")
    p.add_argument("gt_dir")
    p.add_argument("pred_dir")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--average", choices=["macro", "micro"], default="macro")
    p.add_argument("--acc-denominator", choices=["matched", "gt"], default="matched")
    p.add_argument("--out", default=None, help="report JSON path (default stdout)")
    p.add_argument("--per-scene-csv", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("contrast-report", help="class-separation report as CSV")
    p.add_argument("in_dir")
    p.add_argument("--touch-radius", type=int, default=graphmod.DEFAULT_TOUCH_RADIUS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_contrast_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PipelineError as exc:
        sys.stderr.write(json.dumps({"code": exc.code, "message": str(exc)}) + "\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(json.dumps({"code": "io", "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
