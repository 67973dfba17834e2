"""Command-line entry point.

Subcommands: simulate (one episode), sweep (grid runs), auction (print one
round's bids/assignment/prices), train (learner), evaluate (frozen policy
rollouts). All take --config/--seed; see README for examples.
"""

from __future__ import annotations

import argparse
import sys

from .config import default_config, load_config
from .harness import (CSV_HEADER, ResultRow, auction_snapshot, make_policy,
                      run_episode, run_sweep, write_csv)


def _load(args) -> "RunConfig":
    return load_config(args.config) if args.config else default_config()


def _cmd_simulate(args) -> int:
    config = _load(args)
    policy = args.policy or config.policy.name
    row = run_episode(config, policy, args.seed)
    print(CSV_HEADER)
    print(row.to_line())
    if args.out:
        write_csv([row], args.out)
    return 0


def _cmd_sweep(args) -> int:
    config = _load(args)
    rows = run_sweep(config, base_seed=args.seed, output_path=args.out)
    failures = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} rows to {args.out or config.output_path}"
          f" ({failures} failed cells)")
    return 0


def _cmd_auction(args) -> int:
    config = _load(args)
    print(auction_snapshot(config, args.seed))
    return 0


def _cmd_train(args) -> int:
    from .marl.trainer import train
    config = _load(args)
    result = train(config, args.seed, out_dir=args.out,
                   disable_diffusion=args.disable_diffusion)
    last = result.curves[-1] if result.curves else {}
    print(f"trained {len(result.curves)} iterations;"
          f" final mean reward {last.get('mean_reward', float('nan')):.4f};"
          f" outputs in {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    config = _load(args)
    if args.checkpoint:
        config.policy.checkpoint = args.checkpoint
    name = args.policy or config.policy.name
    config.policy.name = name
    rows = []
    for rep in range(args.episodes):
        rows.append(run_episode(config, name, args.seed + rep))
    if args.out:
        write_csv(rows, args.out)
    mean_eta = sum(r.eta_bits_per_J for r in rows) / len(rows)
    mean_ratio = sum(r.completion_ratio for r in rows) / len(rows)
    print(f"{name}: {len(rows)} episodes, mean eta {mean_eta:.2f} bits/J,"
          f" mean completion ratio {mean_ratio:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeroedge",
        description="UAV edge-computing offloading simulator and trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path")

    p = sub.add_parser("simulate", help="run one episode")
    common(p)
    p.add_argument("--policy", help="override the configured policy name")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run the configured sweep grid")
    common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("auction", help="print one auction round")
    common(p)
    p.set_defaults(func=_cmd_auction)

    p = sub.add_parser("train", help="train the learner")
    common(p)
    p.add_argument("--disable-diffusion", action="store_true",
                   help="train the plain sequential-update PPO ablation")
    p.set_defaults(func=_cmd_train, out="train_out")

    p = sub.add_parser("evaluate", help="frozen-policy rollouts")
    common(p)
    p.add_argument("--policy", help="policy name (default from config)")
    p.add_argument("--checkpoint", help="trained parameter file")
    p.add_argument("--episodes", type=int, default=10)
    p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
