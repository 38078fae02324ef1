"""Readers/writers for the pipeline's wire formats.

The file formats are the contract with the pipeline package; nothing here
imports it. Prompt files: ``#schema=prompts/1`` then one JSON object per
line. Prediction files: ``#schema=predictions/1`` with ranked candidates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

PROMPTS_HEADER = "#schema=prompts/1"
PREDICTIONS_HEADER = "#schema=predictions/1"

_REQUIRED = (
    "example_id",
    "input_text",
    "target_text",
    "mask_target",
    "context_attached",
    "task",
    "meta",
)


class PromptSchemaError(ValueError):
    """The prompt file does not conform to prompts/1."""


class ContextContractError(ValueError):
    """An inference-side record carries retrieved context."""


@dataclass(frozen=True)
class PromptExample:
    example_id: str
    input_text: str
    target_text: str
    context_attached: bool


def read_prompt_file(path: str | Path) -> list[PromptExample]:
    path = Path(path)
    examples: list[PromptExample] = []
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != PROMPTS_HEADER:
            raise PromptSchemaError(
                f"{path}:1: expected {PROMPTS_HEADER!r}, found {header!r}; refusing to start"
            )
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PromptSchemaError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
            missing = [f for f in _REQUIRED if f not in obj]
            if missing:
                raise PromptSchemaError(f"{path}:{line_no}: missing fields {missing}")
            if not obj["input_text"] or not obj["target_text"]:
                raise PromptSchemaError(f"{path}:{line_no}: empty input_text or target_text")
            examples.append(
                PromptExample(
                    example_id=str(obj["example_id"]),
                    input_text=str(obj["input_text"]),
                    target_text=str(obj["target_text"]),
                    context_attached=bool(obj["context_attached"]),
                )
            )
    if not examples:
        raise PromptSchemaError(f"{path}: no records")
    return examples


def require_no_context(examples: list[PromptExample]) -> None:
    """Inference inputs must be context-free; name the first offender."""
    for ex in examples:
        if ex.context_attached:
            raise ContextContractError(
                f"eval record {ex.example_id!r} has context_attached=true; "
                "inference prompts must not carry retrieved context"
            )


def normalize_candidate(text: str) -> str:
    """Strict normalization used for candidate de-duplication."""
    return text.strip().casefold()


def write_prediction_file(
    records: list[tuple[str, list[tuple[str, float]]]], path: str | Path
) -> None:
    """records: (example_id, [(text, score) descending]) pairs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(PREDICTIONS_HEADER + "\n")
        for example_id, candidates in sorted(records, key=lambda r: r[0]):
            payload = {
                "example_id": example_id,
                "candidates": [{"text": t, "score": s} for t, s in candidates],
            }
            fh.write(
                json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
                + "\n"
            )
