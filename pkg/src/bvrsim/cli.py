"""Command line entry point: train, eval, serve and replay subcommands.

The CLI stays a thin layer: it parses flags, loads/overrides the config
file, writes a run manifest next to every artifact-producing command's
output, and hands off to the library.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, config_hash, dump_config, load_config


def _load_cfg(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.harness.seed = args.seed
    if getattr(args, "steps", None) is not None:
        cfg.harness.total_steps = args.steps
    if getattr(args, "workers", None) is not None:
        cfg.harness.num_workers = args.workers
    if getattr(args, "port", None) is not None:
        cfg.service.port = args.port
    if getattr(args, "checkpoint_dir", None) is not None:
        cfg.service.checkpoint_dir = args.checkpoint_dir
    if getattr(args, "static_dir", None) is not None:
        cfg.service.static_dir = args.static_dir
    if getattr(args, "tick_hz", None) is not None:
        cfg.service.tick_hz = args.tick_hz
    if getattr(args, "compression", None) is not None:
        cfg.service.compression = args.compression
    return cfg


def write_manifest(out_dir: Path, cfg: RunConfig, seeds: list[int], artifacts: list[str]) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    run_id = f"{config_hash(cfg)[:12]}-s{seeds[0] if seeds else 0}"
    manifest = {
        "run_id": run_id,
        "config_hash": config_hash(cfg),
        "config": dump_config(cfg),
        "seeds": seeds,
        "artifacts": artifacts,
        "version": __version__,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return path


def cmd_train(args) -> int:
    from .harness.train import TrainingAborted, train

    cfg = _load_cfg(args)
    out = Path(args.out)
    try:
        result = train(cfg, out, resume=args.resume)
    except TrainingAborted as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        print(f"last good checkpoint: {exc.last_good_checkpoint}", file=sys.stderr)
        return 1
    write_manifest(out, cfg, [cfg.harness.seed], result.checkpoints + [result.metrics_path])
    print(f"trained {result.env_steps} steps over {result.episodes} episodes in {result.wall_time_s:.1f}s")
    print(f"final checkpoint: {result.final_checkpoint}")
    print(f"metrics: {result.metrics_path}")
    return 0


def cmd_eval(args) -> int:
    from .harness.baselines import BASELINE_NAMES, NetPolicy, make_baseline
    from .harness.evaluate import eval_seeds, evaluate, table_text, write_eval_table

    cfg = _load_cfg(args)
    candidate = NetPolicy.from_checkpoint(args.checkpoint, cfg, name=Path(args.checkpoint).stem)
    opponents = []
    for name in args.opponents.split(","):
        name = name.strip()
        if not name:
            continue
        if name in BASELINE_NAMES:
            opponents.append((name, make_baseline(name, cfg)))
        else:
            opponents.append((Path(name).stem, NetPolicy.from_checkpoint(name, cfg, name=Path(name).stem)))
    if not opponents:
        print("no opponents given", file=sys.stderr)
        return 2
    seeds = eval_seeds(args.seed, max(1, args.matches))
    rows = evaluate(cfg, candidate, opponents, args.matches, seeds, mirror=args.mirror)
    print(table_text(rows))
    if args.out:
        from .tactics import TacticAction

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_eval_table(rows, out / "eval.csv")
        summary = {
            row.opponent: {
                "action_frequencies": (
                    {TacticAction(a).name: row.action_freqs[a] for a in range(6)} if row.action_freqs else None
                ),
                "mean_launches_per_match": row.mean_launches,
                "mean_closest_approach_m": row.mean_min_range,
                "mean_first_launch_range_m": row.mean_first_launch_range,
            }
            for row in rows
        }
        (out / "behavior_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
        write_manifest(out, cfg, seeds, [str(out / "eval.csv"), str(out / "behavior_summary.json")])
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    cfg = _load_cfg(args)
    app = create_app(cfg)
    uvicorn.run(app, host=args.host, port=cfg.service.port, log_level="info")
    return 0


def cmd_replay(args) -> int:
    from .replaylog import ReplayError, load_log_file, parse_log, verify_log

    cfg = _load_cfg(args)
    try:
        text = load_log_file(args.log)
        header, ticks = parse_log(text)
    except FileNotFoundError:
        print(f"no such log: {args.log}", file=sys.stderr)
        return 1
    except ReplayError as exc:
        print(f"malformed log: {exc}", file=sys.stderr)
        return 1
    if args.verify:
        result = verify_log(cfg, text)
        if result.ok:
            print(f"OK: {result.ticks} ticks bit-identical")
            return 0
        print(f"FAIL: {result.detail}", file=sys.stderr)
        return 1
    outcome = next((t["outcome"] for t in reversed(ticks) if t.get("outcome")), None)
    print(f"seed {header['seed']}, {len(ticks)} ticks, sides {header['sides']}, outcome {outcome}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bvrsim", description="BVR air-combat sandbox and learner")
    parser.add_argument("--version", action="version", version=f"bvrsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run self-play training")
    p_train.add_argument("--config", help="INI config file")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--steps", type=int, help="override total env steps")
    p_train.add_argument("--seed", type=int, help="override training seed")
    p_train.add_argument("--workers", type=int, help="override rollout worker count")
    p_train.add_argument("--resume", action="store_true", help="resume from out dir state")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    p_eval.add_argument("--config", help="INI config file")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--opponents", default="straight,cap,commit", help="comma list: baselines or .ckpt paths")
    p_eval.add_argument("--matches", type=int, default=20)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--mirror", action="store_true", help="play each seed from both sides")
    p_eval.add_argument("--out", help="write eval.csv and manifest here")
    p_eval.set_defaults(func=cmd_eval)

    p_serve = sub.add_parser("serve", help="run the live match service")
    p_serve.add_argument("--config", help="INI config file")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int)
    p_serve.add_argument("--checkpoint-dir", dest="checkpoint_dir")
    p_serve.add_argument("--static-dir", dest="static_dir")
    p_serve.add_argument("--tick-hz", dest="tick_hz", type=float)
    p_serve.add_argument("--compression", type=float)
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="inspect or verify an episode log")
    p_replay.add_argument("--config", help="INI config file")
    p_replay.add_argument("--log", required=True)
    p_replay.add_argument("--verify", action="store_true", help="re-simulate and diff")
    p_replay.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # runtime faults exit 1 with a diagnostic
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
