"""Command-line entry point: export-preds and export-train."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import AdapterConfig, MappingError, parse_class_map
from .export import UnlabeledScenesError, export_predictions, export_training_set
from .models import ModelLoadError
from .scenefile import SceneFileError

log = logging.getLogger("maskadapter")


def cmd_export_preds(args) -> int:
    config = AdapterConfig(
        model=args.model,
        class_map=parse_class_map(args.map),
        score_floor=args.min_score,
        device=args.device,
    )
    written = export_predictions(args.images_dir, args.out_dir, config)
    log.info("wrote %d prediction scenes to %s", len(written), args.out_dir)
    return 0


def cmd_export_train(args) -> int:
    report = export_training_set(args.scenes_dir, args.out_dir, args.layout,
                                 report_path=args.report)
    log.info("labels for %d scenes; min round-trip IoU %.4f",
             len(report["scenes"]), report["min_iou"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adapter",
        description="Detector <-> scene-interchange bridge",
    )
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export-preds", help="run a detector, write interchange scenes")
    p.add_argument("images_dir")
    p.add_argument("out_dir")
    p.add_argument("--model", default="builtin:threshold",
                   help="builtin:threshold or module.path:callable")
    p.add_argument("--map", default="0:in",
                   help="class mapping, e.g. 0:in,1:out or 0:agg,1:non,2:drop")
    p.add_argument("--min-score", type=float, default=0.0)
    p.add_argument("--device", default="cpu")
    p.set_defaults(func=cmd_export_preds)

    p = sub.add_parser("export-train", help="write polygon training labels")
    p.add_argument("scenes_dir")
    p.add_argument("out_dir")
    p.add_argument("--layout", choices=["focus", "agglo"], required=True)
    p.add_argument("--report", default=None, help="polygonization-loss report path")
    p.set_defaults(func=cmd_export_train)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MappingError, ModelLoadError, SceneFileError,
            UnlabeledScenesError, FileNotFoundError, ValueError) as exc:
        sys.stderr.write(json.dumps({
            "code": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
