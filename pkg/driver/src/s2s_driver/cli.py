"""Driver CLI: train, predict, and the comparison harnesses."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .spec import TrainSpec


def _add_train_spec_args(p: argparse.ArgumentParser, for_training: bool) -> None:
    p.add_argument("--max-steps", type=int, default=500, help="optimizer steps (full scale: 10000)")
    p.add_argument("--batch-size", type=int, default=16, help="effective batch (full scale: 128)")
    p.add_argument("--micro-batch", type=int, default=8, help="per-forward batch; accumulation fills the rest")
    p.add_argument("--precision", choices=["fp32", "fp16"], default="fp32")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--beam-size", type=int, default=10)
    p.add_argument("--max-new-tokens", type=int, default=32)


def _spec_from_args(args, model: str) -> TrainSpec:
    return TrainSpec(
        model_name=model,
        max_steps=args.max_steps,
        batch_size=args.batch_size,
        micro_batch=min(args.micro_batch, args.batch_size),
        precision=args.precision,
        seed=args.seed,
        learning_rate=args.lr,
        beam_size=args.beam_size,
        max_new_tokens=args.max_new_tokens,
    )


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="s2s-driver",
        description="Fine-tune a seq2seq model on prompt files and emit ranked predictions.",
    )
    parser.add_argument("--version", action="version", version=f"s2s-driver {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fine-tune a checkpoint on a train prompt file")
    p_train.add_argument("--train-file", required=True)
    p_train.add_argument("--model", required=True, help="checkpoint dir or hub name")
    p_train.add_argument("--out", required=True, help="output checkpoint dir")
    _add_train_spec_args(p_train, for_training=True)

    p_pred = sub.add_parser("predict", help="beam-search predictions for an eval prompt file")
    p_pred.add_argument("--eval-file", required=True)
    p_pred.add_argument("--checkpoint", required=True)
    p_pred.add_argument("--out", required=True, help="prediction file path")
    _add_train_spec_args(p_pred, for_training=False)

    p_tiny = sub.add_parser("make-tiny", help="write a tiny offline byte-level checkpoint (smoke tests)")
    p_tiny.add_argument("--out", required=True)
    p_tiny.add_argument("--seed", type=int, default=0)

    p_ord = sub.add_parser(
        "ordering-check",
        help="zero-shot vs fine-tuned vs with-context Hits@1 ordering (median of seeds)",
    )
    p_ord.add_argument("--train-context", required=True, help="train prompts built with context")
    p_ord.add_argument("--train-plain", required=True, help="train prompts built without context")
    p_ord.add_argument("--eval-file", required=True)
    p_ord.add_argument("--model", required=True)
    p_ord.add_argument("--work-dir", required=True)
    p_ord.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p_ord.add_argument("--margin", type=float, default=0.03)
    _add_train_spec_args(p_ord, for_training=True)

    p_trend = sub.add_parser(
        "context-trend",
        help="short vs doubled context budget Hits@1 (weak monotonicity)",
    )
    p_trend.add_argument("--train-short", required=True)
    p_trend.add_argument("--train-long", required=True)
    p_trend.add_argument("--eval-file", required=True)
    p_trend.add_argument("--model", required=True)
    p_trend.add_argument("--work-dir", required=True)
    p_trend.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p_trend.add_argument("--max-drop", type=float, default=0.02)
    _add_train_spec_args(p_trend, for_training=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            from .training import train

            out = train(args.train_file, _spec_from_args(args, args.model), args.out)
            print(f"checkpoint written to {out}")
        elif args.command == "predict":
            from .predicting import predict

            out = predict(args.eval_file, args.checkpoint, _spec_from_args(args, args.checkpoint), args.out)
            print(f"predictions written to {out}")
        elif args.command == "make-tiny":
            from .modeling import make_tiny_checkpoint

            out = make_tiny_checkpoint(args.out, args.seed)
            print(f"tiny checkpoint written to {out}")
        elif args.command == "ordering-check":
            from .experiments import ordering_check

            report = ordering_check(
                args.train_context,
                args.train_plain,
                args.eval_file,
                _spec_from_args(args, args.model),
                args.work_dir,
                seeds=args.seeds,
                margin=args.margin,
            )
            print(json.dumps(report["median_hits_at_1"], indent=2, sort_keys=True))
            if not report["passed"]:
                print("ordering check FAILED", file=sys.stderr)
                return 1
            print("ordering check passed")
        else:
            from .experiments import context_trend

            report = context_trend(
                args.train_short,
                args.train_long,
                args.eval_file,
                _spec_from_args(args, args.model),
                args.work_dir,
                seeds=args.seeds,
                max_drop=args.max_drop,
            )
            print(json.dumps(report["median_hits_at_1"], indent=2, sort_keys=True))
            if not report["passed"]:
                print("context trend check FAILED", file=sys.stderr)
                return 1
            print("context trend check passed")
    except (ValueError, MemoryError, FileNotFoundError) as exc:
        print(f"s2s-driver {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
