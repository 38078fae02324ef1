"""Experiment harnesses comparing fine-tuning arms by Hits@1.

``ordering_check`` runs zero-shot, fine-tuned, and fine-tuned-with-context
arms over the same eval file and asserts the expected ordering with a
margin; ``context_trend`` compares two context budgets and asserts weak
monotonicity. Both are designed for a real instruction-tuned checkpoint;
with a tiny random model they still run, but the assertions are only
meaningful at full scale.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import replace
from pathlib import Path

from .predicting import predict
from .schemas import PREDICTIONS_HEADER, normalize_candidate, read_prompt_file
from .spec import TrainSpec
from .training import train


def hits_at_1(pred_path: str | Path, eval_prompt_path: str | Path) -> float:
    """Fraction of eval records whose top-1 candidate matches the target."""
    gold = {
        ex.example_id: normalize_candidate(ex.target_text)
        for ex in read_prompt_file(eval_prompt_path)
    }
    hit = total = 0
    with Path(pred_path).open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != PREDICTIONS_HEADER:
            raise ValueError(f"{pred_path}: expected {PREDICTIONS_HEADER!r}")
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            eid = obj["example_id"]
            if eid not in gold:
                raise ValueError(f"{pred_path}: no gold target for {eid!r}")
            total += 1
            top1 = normalize_candidate(obj["candidates"][0]["text"])
            if top1 == gold[eid]:
                hit += 1
    if total == 0:
        raise ValueError(f"{pred_path}: no prediction records")
    return hit / total


def _run_arm(
    arm: str,
    train_file: str | None,
    eval_file: str,
    spec: TrainSpec,
    work: Path,
) -> float:
    arm_dir = work / f"{arm}-seed{spec.seed}"
    checkpoint = spec.model_name
    if train_file is not None:
        checkpoint = str(train(train_file, spec, arm_dir / "ckpt"))
    pred_path = arm_dir / "predictions.jsonl"
    predict(eval_file, checkpoint, spec, pred_path)
    return hits_at_1(pred_path, eval_file)


def ordering_check(
    train_context: str,
    train_plain: str,
    eval_file: str,
    spec: TrainSpec,
    work_dir: str | Path,
    seeds: list[int] | None = None,
    margin: float = 0.03,
) -> dict:
    """Median-of-seeds Hits@1 for zero-shot vs fine-tuned vs with-context.

    Passes when zero-shot < fine-tuned and the context arm beats the plain
    arm by at least ``margin`` absolute.
    """
    work = Path(work_dir)
    seeds = seeds or [spec.seed]
    arms: dict[str, list[float]] = {"zero_shot": [], "fine_tuned": [], "fine_tuned_w_context": []}
    for seed in seeds:
        seeded = replace(spec, seed=seed)
        arms["zero_shot"].append(_run_arm("zero", None, eval_file, seeded, work))
        arms["fine_tuned"].append(_run_arm("plain", train_plain, eval_file, seeded, work))
        arms["fine_tuned_w_context"].append(
            _run_arm("context", train_context, eval_file, seeded, work)
        )
    medians = {arm: statistics.median(vals) for arm, vals in arms.items()}
    passed = (
        medians["zero_shot"] < medians["fine_tuned"]
        and medians["fine_tuned_w_context"] >= medians["fine_tuned"] + margin
    )
    report = {"per_seed": arms, "median_hits_at_1": medians, "margin": margin, "passed": passed}
    (work / "ordering_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report


def context_trend(
    train_short: str,
    train_long: str,
    eval_file: str,
    spec: TrainSpec,
    work_dir: str | Path,
    seeds: list[int] | None = None,
    max_drop: float = 0.02,
) -> dict:
    """Doubling the context budget must not cost more than ``max_drop`` Hits@1."""
    work = Path(work_dir)
    seeds = seeds or [spec.seed]
    short_vals, long_vals = [], []
    for seed in seeds:
        seeded = replace(spec, seed=seed)
        short_vals.append(_run_arm("short", train_short, eval_file, seeded, work))
        long_vals.append(_run_arm("long", train_long, eval_file, seeded, work))
    short_med = statistics.median(short_vals)
    long_med = statistics.median(long_vals)
    report = {
        "per_seed": {"short_context": short_vals, "long_context": long_vals},
        "median_hits_at_1": {"short_context": short_med, "long_context": long_med},
        "max_drop": max_drop,
        "passed": long_med >= short_med - max_drop,
    }
    (work / "context_trend_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report
