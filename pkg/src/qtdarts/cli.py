"""Command line entry: ``qtdarts <task> [--config FILE] [--seed N] [--out DIR] [key=value ...]``."""

import argparse
import sys

from .harness import TASKS, resolve_config, run_task


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qtdarts",
        description="Train quantum-generated classical networks with a differentiable circuit search.",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", default=None, help="flat key = value config file")
        p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "overrides",
            nargs="*",
            metavar="key=value",
            help="individual config overrides (win over the config file)",
        )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            print(f"error: override {item!r} is not key=value", file=sys.stderr)
            return 2
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    try:
        cfg = resolve_config(args.task, args.config, overrides)
        result = run_task(cfg)
    except (ValueError, FileNotFoundError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.task == "gradcheck" and any(not r.passed for r in result):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
