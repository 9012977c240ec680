"""Command-line front end: train, evaluate, scenarios, curves, export, serve."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from .config import load_config
from .training import AGENT_IDS, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vantagefly",
                                     description="Drone-photography RL workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run a training job")
    _common(p_train)
    p_train.add_argument("--agent", choices=AGENT_IDS, default="ddpg-shaped")
    p_train.add_argument("--episodes", type=int, default=None,
                         help="override the configured episode budget")
    p_train.add_argument("--out", type=Path, required=True, help="run directory")
    p_train.add_argument("--progress-every", type=int, default=0)

    p_eval = sub.add_parser("evaluate", help="scenario metrics for a checkpoint")
    _common(p_eval)
    p_eval.add_argument("--checkpoint", type=Path, required=True)
    p_eval.add_argument("--scenario", type=int, action="append", dest="scenario_ids",
                        help="restrict to a scenario id (repeatable)")
    p_eval.add_argument("--episodes-per-scenario", type=int, default=1)
    p_eval.add_argument("--out", type=Path, default=None, help="metrics CSV path")

    p_scen = sub.add_parser("scenarios", help="list the canonical scenarios")
    _common(p_scen)

    p_curves = sub.add_parser("curves", help="moving-average learning curves")
    _common(p_curves)
    p_curves.add_argument("runs", nargs="+", type=Path, help="run directories")
    p_curves.add_argument("--window", type=int, default=None)
    p_curves.add_argument("--out", type=Path, default=None, help="summary CSV path")

    p_export = sub.add_parser("export", help="export a scenario rollout trajectory")
    _common(p_export)
    p_export.add_argument("--checkpoint", type=Path, required=True)
    p_export.add_argument("--scenario", type=int, required=True)
    p_export.add_argument("--out", type=Path, required=True)

    p_serve = sub.add_parser("serve", help="launch the operator bridge service")
    _common(p_serve)
    p_serve.add_argument("--checkpoint", type=Path, required=True,
                         help="default policy for new sessions")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--turbo", action="store_true",
                         help="run flights as fast as possible (tests)")
    return parser


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, default=None, help="workbench INI file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deterministic", action="store_true",
                   help="force fully serial execution")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)

    if args.command == "train":
        episodes = args.episodes if args.episodes is not None else cfg.train.episodes
        run_dir = train(cfg, args.agent, episodes, args.seed, args.out,
                        deterministic=args.deterministic,
                        progress_every=args.progress_every)
        print(f"run directory: {run_dir}")
        return 0

    if args.command == "evaluate":
        from .evaluation import evaluate
        metrics = evaluate(args.checkpoint, cfg, args.scenario_ids,
                           args.episodes_per_scenario,
                           parallel=not args.deterministic)
        rows = [["scenario", "success", "steps", "final_distance", "vel_variance"]]
        rows += [[m.scenario_id, int(m.success), m.steps,
                  f"{m.final_distance:.6f}", f"{m.vel_variance:.6f}"] for m in metrics]
        text = "\n".join(",".join(str(v) for v in row) for row in rows)
        print(text)
        if args.out:
            args.out.write_text(text + "\n")
        return 0

    if args.command == "scenarios":
        from .scenarios import resolve_scenarios
        print("id,start_azimuth_deg,start_ratio,start_z,start_x,start_y,"
              "target_azimuth_deg,target_ratio,target_z")
        for spec, pose, target in resolve_scenarios(cfg):
            print(f"{spec.id},{spec.start_azimuth_deg},{spec.start_ratio},{spec.start_z},"
                  f"{pose.x:.3f},{pose.y:.3f},"
                  f"{math.degrees(target.azimuth_psi_v):.1f},"
                  f"{target.body_ratio_omega_v},{target.height_upsilon_v}")
        return 0

    if args.command == "curves":
        from .evaluation import compare_learning_curves
        window = args.window if args.window is not None else cfg.train.curve_window
        summary = compare_learning_curves(args.runs, window)
        print("run,episodes,final_moving_average,final_success_rate")
        for run, info in summary.items():
            print(f"{run},{info['episodes']},{info['final_moving_average']:.4f},"
                  f"{info['final_success_rate']:.4f}")
        if args.out:
            with open(args.out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["run", "episode", "moving_average"])
                for run, info in summary.items():
                    offset = window - 1
                    for i, value in enumerate(info["series"]):
                        writer.writerow([run, offset + i, f"{value:.6f}"])
        return 0

    if args.command == "export":
        from .evaluation import export_trajectory, rollout_scenario
        records = rollout_scenario(args.checkpoint, cfg, args.scenario)
        export_trajectory(records, args.out)
        print(f"wrote {len(records)} steps to {args.out}")
        return 0

    if args.command == "serve":
        import uvicorn

        from .bridge import create_app
        app = create_app(cfg, default_checkpoint=args.checkpoint, turbo=args.turbo)
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
