"""Batch command-line interface.

Subcommands:
  track  run detection and tracking over a frame directory
  eval   score a trajectory file against ground truth
  synth  render a synthetic sequence with exact ground truth

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .config import ConfigError, PipelineConfig
from .sequence_io import (
    SequenceError,
    load_groundtruth,
    load_sequence,
    read_trajectories,
    write_outputs,
)
from .synth import SynthError, SynthSpec, generate, load_spec, write_sequence

log = logging.getLogger("gabortrack")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return PipelineConfig.load(path)


def _write_metrics(report, out_dir: Path) -> None:
    (out_dir / "metrics.json").write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    from .evaluation import PRECISION_THRESHOLDS, SUCCESS_THRESHOLDS

    with (out_dir / "precision_curve.csv").open("w", encoding="utf-8") as fh:
        fh.write("threshold,precision_percent\n")
        for t, v in zip(PRECISION_THRESHOLDS, report.precision_curve):
            fh.write(f"{t},{v}\n")
    with (out_dir / "success_curve.csv").open("w", encoding="utf-8") as fh:
        fh.write("threshold,success_percent\n")
        for t, v in zip(SUCCESS_THRESHOLDS, report.success_curve):
            fh.write(f"{t},{v}\n")


def cmd_track(args: argparse.Namespace) -> int:
    from .evaluation import score_run, sequence_metrics
    from .tracker import run_pipeline

    config = _load_config(args.config)
    t0 = time.perf_counter()
    frames = load_sequence(args.sequence)
    log.info("loaded %d frames in %.2fs", len(frames), time.perf_counter() - t0)

    result = run_pipeline(frames, config)
    log.info(
        "tracked %d frames in %.2fs (%.1f fps)",
        result.frames_processed,
        result.elapsed_seconds,
        result.fps,
    )

    frame_metrics = None
    report = None
    if args.gt:
        groundtruth = load_groundtruth(args.gt)
        outcomes = score_run(
            result.per_frame,
            groundtruth,
            start_frame=config.gabor.temporal_extent - 1,
        )
        report = sequence_metrics(outcomes, result.elapsed_seconds)
        frame_metrics = [o.as_row() for o in outcomes]

    t0 = time.perf_counter()
    out_dir = Path(args.out)
    write_outputs(
        result.per_frame,
        out_dir,
        frames=frames,
        frame_metrics=frame_metrics,
        annotate=args.annotate,
    )
    if report is not None:
        _write_metrics(report, out_dir)
        log.info(
            "TD %.1f%%  FD %.1f%%  MD %.1f%%  AUC %.3f",
            report.td,
            report.fd,
            report.md,
            report.auc,
        )
    log.info("wrote outputs to %s in %.2fs", out_dir, time.perf_counter() - t0)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    from .evaluation import classify_frame, select_scored_box, sequence_metrics

    by_frame = read_trajectories(args.trajectories)
    groundtruth = load_groundtruth(args.gt)
    gt_by_frame = {b.frame: b for b in groundtruth}
    last = max(list(by_frame) + [b.frame for b in groundtruth], default=-1)
    first = args.start_frame
    if by_frame and min(by_frame) > first:
        log.warning(
            "trajectories start at frame %d but evaluation starts at %d; "
            "earlier frames count as missed",
            min(by_frame),
            first,
        )
    outcomes = []
    for f in range(first, last + 1):
        gt = gt_by_frame.get(f)
        gt_box = (gt.x, gt.y, gt.w, gt.h) if gt else None
        pred_box = select_scored_box(by_frame.get(f, []), gt_box)
        outcomes.append(classify_frame(f, pred_box, gt_box))
    report = sequence_metrics(outcomes)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_metrics(report, out_dir)
    print(
        f"TD {report.td:.2f}%  FD {report.fd:.2f}%  MD {report.md:.2f}%  "
        f"AUC {report.auc:.3f}  precision@20px {report.precision_at_20:.2f}%"
    )
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec) if args.spec else SynthSpec()
    frames, boxes = generate(spec, seed=args.seed)
    out = write_sequence(frames, boxes, args.out)
    log.info("wrote %d frames and ground truth to %s", len(frames), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gabortrack",
        description="Motion-energy object detection and tracking",
    )
    parser.add_argument(
        "--emit-config",
        action="store_true",
        help="print the effective default configuration as JSON and exit",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p_track = sub.add_parser("track", help="run the tracking pipeline")
    p_track.add_argument("sequence", help="directory of image frames")
    p_track.add_argument("--config", help="JSON config file")
    p_track.add_argument("--gt", help="ground-truth box file")
    p_track.add_argument("--out", required=True, help="output directory")
    p_track.add_argument(
        "--annotate", action="store_true", help="write annotated PNG frames"
    )
    p_track.set_defaults(func=cmd_track)

    p_eval = sub.add_parser("eval", help="score trajectories against ground truth")
    p_eval.add_argument("trajectories", help="trajectory JSONL file")
    p_eval.add_argument("gt", help="ground-truth box file")
    p_eval.add_argument("--out", required=True, help="output directory")
    p_eval.add_argument(
        "--start-frame",
        type=int,
        default=0,
        help="first frame index to score (default 0)",
    )
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="render a synthetic sequence")
    p_synth.add_argument("--spec", help="JSON scene description")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.emit_config:
        print(PipelineConfig().to_json())
        return EXIT_OK
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, SequenceError, SynthError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
