from __future__ import annotations

import argparse
import logging
import sys
from typing import Callable

from branchlab.cli.evaluate import cmd_evaluate
from branchlab.cli.pipeline import (
    StageResult,
    cmd_collect,
    cmd_generate,
    cmd_pretrain,
    cmd_refine_mcts,
    cmd_train_ppo,
)
from branchlab.errors import BranchlabError
from branchlab.util.config import ENV_OUT, load_config, resolve_out_root

COMMANDS: dict[str, Callable[..., StageResult]] = {
    "generate": cmd_generate,
    "collect": cmd_collect,
    "pretrain": cmd_pretrain,
    "train-ppo": cmd_train_ppo,
    "refine-mcts": cmd_refine_mcts,
    "evaluate": cmd_evaluate,
}

HELP = {
    "generate": "Generate train/test instances for every configured family.",
    "collect": "Solve training instances with full strong branching and record the expansions.",
    "pretrain": "Imitation-pretrain the GCNN policy/value network on the strong-branching dataset.",
    "train-ppo": "Fine-tune the pretrained network with PPO on policy rollouts.",
    "refine-mcts": "Distill MCTS argmax-Q actions into the PPO policy.",
    "evaluate": "Solve the test set with every strategy and seed; write CSV and Markdown tables.",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="branchlab",
        add_help=True,
        formatter_class=argparse.RawTextHelpFormatter,
        description="branchlab: branch-and-bound MILP solver with learned branching\n",
    )
    p.add_argument("--version", action="store_true", help="Print version and exit.")

    sub = p.add_subparsers(dest="cmd")
    for name, text in HELP.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="Experiment config (.yaml, .toml or .json).")
        sp.add_argument("--seed", default=None, type=int, help="Override the collection/training seed.")
        sp.add_argument("--out", default=None, help=f"Output root (overrides ${ENV_OUT} and paths.root).")
        sp.add_argument("--log-level", default="INFO", help="Logging level (DEBUG, INFO, WARNING, ...).")
    return p


def _print_result(res: StageResult) -> None:
    print(f"{res.stage}: {'up to date' if res.skipped else 'done'}")
    for k, v in sorted(res.metrics.items()):
        print(f"- {k}: {v}")
    for p in res.outputs[:8]:
        print(f"  {p}")
    if len(res.outputs) > 8:
        print(f"  ... {len(res.outputs) - 8} more")


def main(argv: list[str] | None = None) -> None:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)

    if getattr(args, "version", False):
        from branchlab import __version__

        print(f"branchlab {__version__}")
        return

    if not args.cmd:
        parser.print_help()
        return

    level = getattr(logging, str(args.log_level).upper(), None)
    if not isinstance(level, int):
        raise SystemExit(f"ERROR: unknown log level {args.log_level!r}")
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        root = resolve_out_root(cfg, args.out)
        res = COMMANDS[args.cmd](cfg, root)
    except BranchlabError as e:
        raise SystemExit(f"ERROR: {e}") from e
    _print_result(res)


if __name__ == "__main__":
    main()
