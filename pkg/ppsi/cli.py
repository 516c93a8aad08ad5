"""Command-line entry point: one subcommand per pipeline stage.

    ppsi patterns    --config run.yaml [--budget-only]
    ppsi capture     --config run.yaml
    ppsi reconstruct --config run.yaml
    ppsi match       --config run.yaml
    ppsi cloud       --config run.yaml
    ppsi eval        --config run.yaml [--reference other.ply]
    ppsi sweep       --config run.yaml [--etas 0.25,0.5,1]

Exit codes: 0 success, 1 usage error, 2 stage failure.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .config import Config
from .ltc_sim.scene import load_scene
from .metrics.sweep import capture_ratio_sweep
from .pipeline.orchestrator import (
    StageError,
    run_capture,
    run_cloud,
    run_eval,
    run_match,
    run_patterns,
    run_reconstruct,
    stage,
)
from .utils import io

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STAGE = 2

COMMANDS = ("patterns", "capture", "reconstruct", "match", "cloud", "eval", "sweep")


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Sectioned YAML run config")
    common.add_argument("--scene", help="Scene YAML (overrides run.scene_path)")
    common.add_argument("--out", help="Output directory (overrides run.output_dir)")
    common.add_argument("--seed", type=int, help="Noise seed")
    common.add_argument("--strategy", help="ransac4 | three_direction | unidirectional")
    common.add_argument("--directions", type=_floats, help="Comma-separated directions in degrees")
    common.add_argument("--eta", type=float, help="Capture ratio of the fine step")
    common.add_argument("--fine-period", type=int, help="Fixed M_theta instead of the adaptive one")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog="ppsi",
        description="Projective parallel single-pixel imaging on simulated scenes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    patterns = sub.add_parser("patterns", parents=[common], help="Write pattern sets and the budget")
    patterns.add_argument("--budget-only", action="store_true", help="Print the pattern budget only")
    patterns.add_argument("--format", choices=("pgm", "pfm"), default="pgm")
    sub.add_parser("capture", parents=[common], help="Render the intensity stack")
    sub.add_parser("reconstruct", parents=[common], help="Projection functions from the stack")
    sub.add_parser("match", parents=[common], help="Candidate matches from projection functions")
    sub.add_parser("cloud", parents=[common], help="Triangulate and continuity-filter")
    evaluate = sub.add_parser("eval", parents=[common], help="Shape metrics of the filtered cloud")
    evaluate.add_argument("--reference", help="Reference PLY for the cloud-to-cloud rms")
    sweep = sub.add_parser("sweep", parents=[common], help="Capture-ratio sweep")
    sweep.add_argument("--etas", type=_floats, help="Comma-separated capture ratios")
    return parser


def load_config(args: argparse.Namespace) -> Config:
    """Config file (if any) with command-line overrides applied, validated."""
    config = Config.from_yaml(args.config) if args.config else Config()
    overrides = {
        "scene_path": args.scene,
        "output_dir": args.out,
        "seed": args.seed,
        "strategy": args.strategy,
        "directions_deg": args.directions,
        "eta": args.eta,
        "fine_period": args.fine_period,
    }
    if getattr(args, "etas", None) is not None:
        overrides["sweep_etas"] = args.etas
    if args.strategy == "unidirectional" and args.directions is None:
        overrides["directions_deg"] = (0.0,)
    config = replace(config, **{k: v for k, v in overrides.items() if v is not None})
    return config.validate()


def _run(command: str, config: Config, args: argparse.Namespace) -> None:
    if command == "patterns":
        summary = run_patterns(config, budget_only=args.budget_only, fmt=args.format)
        budget = summary.get("budget")
        if budget:
            print(f"Pattern budget: {budget['per_direction']} per direction, {budget['total']} total")
            print(f"  Estimated projection time: {summary['capture_seconds']:.2f} s at {config.projector_fps:g} fps")
        else:
            print("Pattern budget: fine period is derived from the coarse capture")
        if "written" in summary:
            print(f"  Wrote {summary['written']} patterns ({summary['manifest']})")
    elif command == "capture":
        stack = run_capture(config)
        print(f"Captured {stack.image_count} images in {len(stack.blocks)} blocks")
    elif command == "reconstruct":
        projections = run_reconstruct(config)
        for p in projections:
            print(f"  theta={p.theta_deg:g}: L={p.length}, {int(p.reconstructable.sum())} pixels reconstructable")
    elif command == "match":
        matches = run_match(config)
        print(f"Matched {len(matches)} pixels, {sum(len(m) for m in matches.values())} candidates")
    elif command == "cloud":
        cloud, filtered = run_cloud(config)
        print(f"Triangulated {len(cloud)} points, {len(filtered)} after the continuity filter")
    elif command == "eval":
        metrics = run_eval(config, reference_cloud=args.reference)
        for key, value in metrics.items():
            print(f"  {key}: {value}")
    elif command == "sweep":
        if not config.scene_path:
            raise StageError("sweep", "no scene file configured (run.scene_path or --scene)")
        with stage("sweep"):
            report = capture_ratio_sweep(load_scene(config.scene_path), config=config)
            io.write_sweep(report, Path(config.output_dir) / config.sweep_file)
        print(f"Sweep {report.scene_id} ({report.strategy}):")
        for row in report.rows:
            status = row.error or f"SME {row.mean_sme_px:.4f} px, coverage {row.coverage:.3f}"
            print(f"  eta={row.eta:.2f}  patterns={row.patterns}  {status}")
        print(f"  knee eta: {report.knee_eta}  spearman: {report.spearman_rho}  NED band: {report.cumulative_ned}")


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_config(args)
    except (FileNotFoundError, ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        _run(args.command, config, args)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
