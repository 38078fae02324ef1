from __future__ import annotations

import json
from pathlib import Path

import pytest

from s2s_driver.modeling import make_tiny_checkpoint
from s2s_driver.spec import TrainSpec
from s2s_driver.training import train

RELATIONS = ["founded", "advised", "hired"]


def prompt_record(i: int, with_context: bool) -> dict:
    head, rel, tail = f"Person{i % 17}", RELATIONS[i % 3], f"Org{i % 11}"
    input_text = f"Predict the missing element: {head} | {rel} |"
    if with_context:
        input_text += f" Context: {head} {rel} {tail} in 2001."
    return {
        "example_id": f"e:{i:03d}",
        "input_text": input_text,
        "target_text": tail,
        "mask_target": "tail",
        "context_attached": with_context,
        "task": "tail_pred",
        "meta": {"head": head, "relation": rel, "tail": tail},
    }


def write_prompt_file(path: Path, records: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        fh.write("#schema=prompts/1\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return path


@pytest.fixture(scope="session")
def tiny_model(tmp_path_factory) -> Path:
    return make_tiny_checkpoint(tmp_path_factory.mktemp("model") / "tiny")


@pytest.fixture(scope="session")
def train_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("data") / "train.prompts"
    return write_prompt_file(path, [prompt_record(i, with_context=False) for i in range(40)])


@pytest.fixture(scope="session")
def eval_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("data") / "eval.prompts"
    return write_prompt_file(path, [prompt_record(100 + i, with_context=False) for i in range(6)])


@pytest.fixture(scope="session")
def trained_checkpoint(tmp_path_factory, tiny_model, train_file) -> Path:
    spec = TrainSpec(
        model_name=str(tiny_model), max_steps=30, batch_size=8, micro_batch=4, beam_size=4,
        max_new_tokens=12,
    )
    return train(train_file, spec, tmp_path_factory.mktemp("ckpt") / "out")
