"""Command line entry points: run, sweep, serve, replay.

Exit codes: 0 success, 2 trial failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .harness import (
    ScenarioConfig,
    incline_sweep,
    run_trial,
    write_result_files,
    write_sweep_csv,
)
from .policies import KINDS


def _load_config(path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    return ScenarioConfig.from_json_file(path)


def _apply_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    if getattr(args, "policy", None):
        config = dataclasses.replace(config, policy_kind=args.policy)
    if getattr(args, "incline_deg", None) is not None:
        config = dataclasses.replace(
            config, world=dataclasses.replace(config.world, incline_deg=args.incline_deg)
        )
    return config


def cmd_run(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    result = run_trial(config)
    out = Path(args.out)
    paths = write_result_files(result, out, config)
    print(f"policy={config.policy_kind} incline={config.world.incline_deg:.1f}deg "
          f"distance={result.distance_cm:.1f}cm velocity={result.avg_velocity_cm_s:.2f}cm/s "
          f"success={result.success} mode={result.failure_mode.value}")
    print(f"wrote {paths['result']}")
    if not result.valid:
        print(f"trial invalid: {result.diagnostic}", file=sys.stderr)
        return 2
    return 0 if result.success else 2


def cmd_sweep(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    thetas = []
    t = args.start
    while t <= args.stop + 1e-9:
        thetas.append(round(t, 6))
        t += args.step
    sweep = incline_sweep(config, thetas)
    path = write_sweep_csv(sweep, Path(args.out) / "sweep.csv")
    for row in sweep.rows:
        print(f"theta={row.incline_deg:5.1f} success={row.success_rate:4.2f} "
              f"v={row.avg_velocity_cm_s:5.2f} modes={','.join(sorted(set(row.failure_modes)))}")
    best = sweep.max_reliable_incline()
    print(f"max reliable incline: {best}")
    print(f"wrote {path}")
    return 0


def cmd_serve(args) -> int:
    from .server import run_server

    config = _apply_overrides(_load_config(args.config), args)
    ui = args.ui
    if ui is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui = candidate if candidate.is_dir() else None
    print(f"serving teleop on ws://{args.host}:{args.port}/ws "
          f"(UI assets: {ui or 'none'})")
    run_server(config, host=args.host, port=args.port, ui_dir=ui, log_dir=args.log_dir)
    return 0


def cmd_replay(args) -> int:
    from .teleop import replay_log

    frames, digest = replay_log(args.log)
    print(f"{len(frames)} frames")
    print(f"stream sha256: {digest}")
    if args.dump:
        with open(args.dump, "w") as fh:
            for f in frames:
                fh.write(json.dumps(f.to_dict(), sort_keys=True) + "\n")
        print(f"wrote {args.dump}")
    if args.expect and args.expect != digest:
        print("hash mismatch", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sixbar",
                                description="six-bar tensegrity rolling simulator")
    sub = p.add_subparsers(dest="cmd", required=True)

    run_p = sub.add_parser("run", help="run one trial")
    run_p.add_argument("--config", help="scenario config JSON")
    run_p.add_argument("--policy", choices=KINDS)
    run_p.add_argument("--incline-deg", type=float, dest="incline_deg")
    run_p.add_argument("--out", default="out")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="incline sweep")
    sweep_p.add_argument("--config", help="scenario config JSON")
    sweep_p.add_argument("--policy", choices=KINDS)
    sweep_p.add_argument("--from", dest="start", type=float, required=True)
    sweep_p.add_argument("--to", dest="stop", type=float, required=True)
    sweep_p.add_argument("--step", type=float, default=2.0)
    sweep_p.add_argument("--out", default="out")
    sweep_p.set_defaults(func=cmd_sweep)

    serve_p = sub.add_parser("serve", help="teleoperation websocket server")
    serve_p.add_argument("--config", help="scenario config JSON")
    serve_p.add_argument("--policy", choices=KINDS)
    serve_p.add_argument("--incline-deg", type=float, dest="incline_deg")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8765)
    serve_p.add_argument("--ui", help="static UI asset directory")
    serve_p.add_argument("--log-dir", help="directory for session command logs")
    serve_p.set_defaults(func=cmd_serve)

    replay_p = sub.add_parser("replay", help="replay a recorded session log")
    replay_p.add_argument("--log", required=True)
    replay_p.add_argument("--dump", help="write replayed frames to a JSONL file")
    replay_p.add_argument("--expect", help="fail unless the stream hash matches")
    replay_p.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
