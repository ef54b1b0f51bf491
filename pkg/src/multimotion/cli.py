"""Command-line harness: simulate scenes, run the pipeline, evaluate results.

Subcommands:
    simulate   scene config -> tracklets.jsonl + truth.json
    run        tracklets -> per-window labeling dumps + trajectory CSVs
    baseline   same but with greedy sequential model peeling (no refinement)
    evaluate   dumps + truth -> report.json + per-motion error CSVs
    all        simulate, run, baseline, evaluate in one pass

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evaluation import WindowSchedule, evaluate, write_motion_csv
from .labeling import EnergyParams
from .pipeline import (
    load_window_dumps,
    run_pipeline,
    write_json,
    write_window_outputs,
)
from .simulator import ConfigInvalid, SceneConfig, SceneTruth, generate_scene
from .tracklets import read_jsonl, sequence_length, write_jsonl


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1 here
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="multimotion", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", type=Path, required=True,
                           help="scene/parameter JSON file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--output", type=Path, default=Path("out"),
                       help="output directory")

    p = sub.add_parser("simulate", help="generate a synthetic scene")
    common(p)

    for name in ("run", "baseline"):
        p = sub.add_parser(name, help=f"{name} the pipeline over sliding windows")
        common(p)
        p.add_argument("--tracklets", type=Path, default=None,
                       help="tracklet JSONL (default: OUTPUT/tracklets.jsonl)")
        p.add_argument("--window", type=int, default=None,
                       help="window length in frames (default: whole sequence)")
        p.add_argument("--stride", type=int, default=1, help="window stride")
        p.add_argument("--threads", type=int, default=1, help="parallel windows")

    p = sub.add_parser("evaluate", help="score dumps against ground truth")
    common(p, needs_config=False)
    p.add_argument("--truth", type=Path, default=None,
                   help="truth JSON (default: OUTPUT/truth.json)")
    p.add_argument("--calibration-frames", type=int, default=25)

    p = sub.add_parser("all", help="simulate, run, baseline, evaluate")
    common(p)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--calibration-frames", type=int, default=25)
    return parser


def _load_config(path: Path) -> tuple:
    if not path.exists():
        raise _UsageError(f"--config file not found: {path}")
    with open(path) as fh:
        raw = json.load(fh)
    config = SceneConfig.from_dict(raw)
    params = EnergyParams.from_dict(raw.get("energy_params", {}))
    return config, params, raw


def _cmd_simulate(args) -> int:
    config, _, raw = _load_config(args.config)
    seed = args.seed if args.seed is not None else config.seed
    args.output.mkdir(parents=True, exist_ok=True)
    tracklets, truth = generate_scene(config, seed)
    write_jsonl(tracklets, args.output / "tracklets.jsonl")
    truth.save(args.output / "truth.json")
    resolved = dict(raw)
    resolved["seed"] = seed
    write_json(args.output / "scene_config.json", resolved)
    print(f"simulate: {len(tracklets)} tracklets over {config.frames} frames "
          f"-> {args.output}")
    return 0


def _run_common(args, baseline: bool) -> int:
    config, params, _ = _load_config(args.config)
    seed = args.seed if args.seed is not None else config.seed
    tracklet_path = args.tracklets or (args.output / "tracklets.jsonl")
    if not tracklet_path.exists():
        raise _UsageError(f"--tracklets file not found: {tracklet_path}")
    tracklets = read_jsonl(tracklet_path, config.intrinsics)
    frames = max(sequence_length(tracklets), config.frames)
    window = args.window or frames
    schedule = WindowSchedule(window=window, stride=args.stride)
    sigma = config.noise_sigma if config.noise_sigma > 0 else 0.5
    results = run_pipeline(
        tracklets, config.intrinsics, params, schedule, frames,
        base_seed=seed, threads=args.threads, sigma=sigma, baseline=baseline,
    )
    subdir = "baseline" if baseline else "windows"
    write_window_outputs(args.output, results, with_trajectories=not baseline,
                         subdir=subdir)
    ok = sum(1 for _, dump, _ in results if dump.get("status") == "ok")
    print(f"{'baseline' if baseline else 'run'}: {ok}/{len(results)} windows "
          f"estimated -> {args.output / subdir}")
    return 0


def _cmd_evaluate(args) -> int:
    truth_path = args.truth or (args.output / "truth.json")
    if not truth_path.exists():
        raise _UsageError(f"--truth file not found: {truth_path}")
    truth = SceneTruth.load(truth_path)
    dumps = load_window_dumps(args.output, "windows")
    if not dumps:
        raise _UsageError(f"no window dumps under {args.output / 'windows'}")
    baseline_dir = args.output / "baseline"
    baseline_dumps = load_window_dumps(args.output, "baseline") if baseline_dir.exists() else None
    window = int(dumps[0]["frames"])
    schedule = WindowSchedule(window=window, stride=1)
    report = evaluate(dumps, truth, schedule, baseline_dumps=baseline_dumps,
                      n_calib=args.calibration_frames)
    write_json(args.output / "report.json", report.to_dict())
    errors_dir = args.output / "errors"
    errors_dir.mkdir(parents=True, exist_ok=True)
    for w in report.windows:
        for m in w.motions:
            if m.frames:
                write_motion_csv(
                    errors_dir / f"window_{w.start:04d}_body{m.body_id}.csv", m
                )
    print(f"evaluate: model-count fraction {report.model_count_fraction:.3f}"
          + (f", baseline {report.baseline_model_count_fraction:.3f}"
             if report.baseline_model_count_fraction is not None else "")
          + f" -> {args.output / 'report.json'}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "run":
            return _run_common(args, baseline=False)
        if args.command == "baseline":
            return _run_common(args, baseline=True)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "all":
            rc = _cmd_simulate(args)
            if rc:
                return rc
            args.tracklets = None
            rc = _run_common(args, baseline=False)
            if rc:
                return rc
            rc = _run_common(args, baseline=True)
            if rc:
                return rc
            args.truth = None
            return _cmd_evaluate(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except ConfigInvalid as err:
        print(f"usage error: invalid --config: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 - runtime failures exit 2
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
