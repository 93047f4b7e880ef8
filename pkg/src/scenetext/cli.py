"""Command-line entry points: generate, stats, validate, eval."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .errors import SceneTextError


def _bundles_for(cfg, num, bundle_dir):
    from .scene import load_bundles
    from .synthetic import make_bundles

    directory = bundle_dir or cfg.bundle_dir
    if directory:
        pool = load_bundles(directory)
        if not pool:
            raise SceneTextError(f"no bundles found in {directory}")
        n = num if num is not None else len(pool)
        return [pool[i % len(pool)] for i in range(n)]
    return make_bundles(num if num is not None else 10, seed=cfg.seed, size=cfg.output_size)


def cmd_generate(args) -> int:
    from .scene import GenConfig, run_dataset

    cfg = GenConfig.from_json(args.config) if args.config else GenConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    bundles = _bundles_for(cfg, args.num, args.bundles)
    stats = run_dataset(bundles, cfg, args.out, workers=args.workers, preview=args.preview,
                        emit_targets=args.emit_targets or cfg.emit_targets)
    json.dump(stats.to_dict(), sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def cmd_stats(args) -> int:
    from .scene import dataset_stats

    json.dump(dataset_stats(args.dataset), sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def cmd_validate(args) -> int:
    from .scene import validate_dataset

    bad = validate_dataset(args.dataset)
    for image_id, problems in sorted(bad.items()):
        for p in problems:
            print(f"{image_id}: {p}")
    print(f"{len(bad)} invalid record(s)")
    return 1 if bad else 0


def cmd_eval(args) -> int:
    from .evaluation import evaluate_files

    report, sweep = evaluate_files(args.gt, args.det, args.iou)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    if args.curve:
        np.savetxt(args.curve, np.column_stack([sweep.recall, sweep.precision]), fmt="%.6f",
                   header="recall precision")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenetext", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="render an annotated dataset")
    g.add_argument("--config", help="JSON file mirroring GenConfig")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--num", type=int, help="number of scenes (default: one per bundle)")
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--bundles", help="directory of scene bundles (default: procedural scenes)")
    g.add_argument("--preview", action="store_true", help="also write box-overlay previews")
    g.add_argument("--emit-targets", action="store_true", help="also write grid targets per image")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("stats", help="summarize a generated dataset")
    s.add_argument("--dataset", required=True)
    s.set_defaults(func=cmd_stats)

    v = sub.add_parser("validate", help="check every annotation record")
    v.add_argument("--dataset", required=True)
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("eval", help="IoU evaluation of detections against ground truth")
    e.add_argument("--gt", required=True, help="annotation JSONL")
    e.add_argument("--det", required=True, help="detection JSONL")
    e.add_argument("--iou", type=float, default=0.5)
    e.add_argument("--report", help="write the JSON report here as well")
    e.add_argument("--curve", help="write recall/precision pairs here")
    e.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except SceneTextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
