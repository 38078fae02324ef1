"""Dataset readers, train/eval splitting, and the pipeline's file formats.

Every pipeline file is UTF-8, line-delimited, and opens with a schema header
line ``#schema=<name>/<version>``. Records are JSON objects with sorted keys
and compact separators, so identical content is always byte-identical.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import CorpusFormatError, PipelineError, SchemaError
from .metrics import normalize_answer
from .prompts import MASK_SLOTS, PromptRecord, Triple

PROMPTS_SCHEMA = "prompts/1"
PREDICTIONS_SCHEMA = "predictions/1"

TRIPLE_FORMATS = ("tsv3", "tsv4_aligned", "tacred_json")

_PROMPT_FIELDS = (
    "example_id",
    "input_text",
    "target_text",
    "mask_target",
    "context_attached",
    "task",
    "meta",
)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.9
    seed: int = 0
    strategy: str = "random"

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise PipelineError("train_fraction must be strictly between 0 and 1")
        if self.strategy not in ("random", "by_head_entity"):
            raise PipelineError(f"unknown split strategy {self.strategy!r}")


@dataclass(frozen=True)
class PredictionRecord:
    example_id: str
    candidates: tuple[tuple[str, float], ...]  # (text, score), scores non-increasing


def read_triples(path: str | Path, fmt: str) -> list[Triple]:
    """Parse a triple dataset; example_ids are ``<stem>:<ordinal>``."""
    path = Path(path)
    if fmt not in TRIPLE_FORMATS:
        raise PipelineError(f"unknown triple format {fmt!r}; expected one of {TRIPLE_FORMATS}")
    if fmt == "tacred_json":
        return _read_tacred(path)
    n_cols = 3 if fmt == "tsv3" else 4
    triples: list[Triple] = []
    stem = path.stem
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != n_cols:
                raise CorpusFormatError(
                    path, line_no, f"expected {n_cols} tab-separated fields, got {len(parts)}"
                )
            triples.append(
                Triple(
                    head=parts[0],
                    relation=parts[1],
                    tail=parts[2],
                    aligned_sentence=parts[3] if n_cols == 4 else None,
                    example_id=f"{stem}:{len(triples)}",
                )
            )
    return triples


def _read_tacred(path: Path) -> list[Triple]:
    """TACRED-style JSON array; records without a known relation are dropped."""
    with path.open(encoding="utf-8") as fh:
        try:
            records = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(path, exc.lineno, f"invalid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise CorpusFormatError(path, 1, "expected a JSON array of records")
    triples: list[Triple] = []
    stem = path.stem
    for i, rec in enumerate(records):
        relation = rec.get("relation")
        if relation is None or not _relation_known(relation):
            continue
        try:
            tokens = rec["token"]
            head = " ".join(tokens[rec["subj_start"] : rec["subj_end"] + 1])
            tail = " ".join(tokens[rec["obj_start"] : rec["obj_end"] + 1])
        except (KeyError, TypeError) as exc:
            raise CorpusFormatError(path, 1, f"record {i}: missing field {exc}") from exc
        triples.append(
            Triple(
                head=head,
                relation=str(relation),
                tail=tail,
                aligned_sentence=" ".join(tokens),
                example_id=f"{stem}:{len(triples)}",
            )
        )
    return triples


def _relation_known(relation) -> bool:
    if isinstance(relation, int):
        return relation >= 0
    return str(relation).strip().lower() not in ("", "no_relation", "na")


def read_qa_pairs(path: str | Path) -> list[tuple[str, str, str]]:
    """Two-column TSV question/answer file -> (example_id, question, answer)."""
    path = Path(path)
    pairs = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusFormatError(
                    path, line_no, f"expected 2 tab-separated fields, got {len(parts)}"
                )
            pairs.append((f"{path.stem}:{len(pairs)}", parts[0], parts[1]))
    return pairs


def split(items: Sequence, spec: SplitSpec) -> tuple[list, list]:
    """Partition items into train/eval: |train| = floor(N * train_fraction).

    Deterministic under (seed, strategy). ``by_head_entity`` keeps all items
    sharing a head on one side, filling train with whole head groups up to
    the target size (exact only when group sizes permit).
    """
    if not items:
        raise PipelineError("cannot split an empty dataset")
    n = len(items)
    n_train = math.floor(n * spec.train_fraction)
    rng = random.Random(spec.seed)

    if spec.strategy == "random":
        indices = list(range(n))
        rng.shuffle(indices)
        train_idx = sorted(indices[:n_train])
        eval_idx = sorted(indices[n_train:])
    else:
        if not hasattr(items[0], "head"):
            raise PipelineError("by_head_entity split needs items with a head attribute")
        groups: dict[str, list[int]] = {}
        for i, item in enumerate(items):
            groups.setdefault(item.head, []).append(i)
        order = sorted(groups)
        rng.shuffle(order)
        train_idx = []
        eval_idx = []
        for head in order:
            side = train_idx if len(train_idx) + len(groups[head]) <= n_train else eval_idx
            side.extend(groups[head])
        train_idx.sort()
        eval_idx.sort()

    return [items[i] for i in train_idx], [items[i] for i in eval_idx]


# --- prompt files ---


def emit_prompts(records: Sequence[PromptRecord], path: str | Path) -> None:
    """Write records sorted by example_id; duplicate ids are an error."""
    seen: set[str] = set()
    for rec in records:
        if rec.example_id in seen:
            raise PipelineError(f"duplicate example_id {rec.example_id!r} on emit")
        seen.add(rec.example_id)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#schema={PROMPTS_SCHEMA}\n")
        for rec in sorted(records, key=lambda r: r.example_id):
            payload = {
                "example_id": rec.example_id,
                "input_text": rec.input_text,
                "target_text": rec.target_text,
                "mask_target": rec.mask_target,
                "context_attached": rec.context_attached,
                "task": rec.task,
                "meta": rec.meta,
            }
            fh.write(_dumps(payload) + "\n")


def read_prompts(path: str | Path) -> list[PromptRecord]:
    path = Path(path)
    records: list[PromptRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        _expect_header(fh, path, PROMPTS_SCHEMA)
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            obj = _parse_line(path, line_no, line)
            missing = [f for f in _PROMPT_FIELDS if f not in obj]
            if missing:
                raise SchemaError(path, line_no, f"missing fields {missing}")
            if obj["mask_target"] not in MASK_SLOTS + ("none",):
                raise SchemaError(path, line_no, f"bad mask_target {obj['mask_target']!r}")
            if not obj["target_text"]:
                raise SchemaError(path, line_no, "empty target_text")
            if obj["example_id"] in seen:
                raise SchemaError(path, line_no, f"duplicate example_id {obj['example_id']!r}")
            seen.add(obj["example_id"])
            records.append(
                PromptRecord(
                    example_id=obj["example_id"],
                    input_text=obj["input_text"],
                    target_text=obj["target_text"],
                    mask_target=obj["mask_target"],
                    context_attached=bool(obj["context_attached"]),
                    task=obj["task"],
                    meta={str(k): str(v) for k, v in obj["meta"].items()},
                )
            )
    return records


# --- prediction files ---


def emit_predictions(records: Sequence[PredictionRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#schema={PREDICTIONS_SCHEMA}\n")
        for rec in sorted(records, key=lambda r: r.example_id):
            payload = {
                "example_id": rec.example_id,
                "candidates": [{"text": t, "score": s} for t, s in rec.candidates],
            }
            fh.write(_dumps(payload) + "\n")


def read_predictions(path: str | Path) -> list[PredictionRecord]:
    """Parse and validate ranked candidate lists.

    Scores must be non-increasing and candidate texts distinct after strict
    normalization; either violation rejects the file.
    """
    path = Path(path)
    records: list[PredictionRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        _expect_header(fh, path, PREDICTIONS_SCHEMA)
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            obj = _parse_line(path, line_no, line)
            if "example_id" not in obj or "candidates" not in obj:
                raise SchemaError(path, line_no, "missing example_id or candidates")
            example_id = str(obj["example_id"])
            if example_id in seen:
                raise SchemaError(path, line_no, f"duplicate example_id {example_id!r}")
            seen.add(example_id)
            raw = obj["candidates"]
            if not isinstance(raw, list) or not raw:
                raise SchemaError(path, line_no, "candidates must be a non-empty list")
            candidates: list[tuple[str, float]] = []
            normed: set[str] = set()
            prev = math.inf
            for cand in raw:
                try:
                    text, score = str(cand["text"]), float(cand["score"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise SchemaError(path, line_no, f"bad candidate entry: {exc}") from exc
                if score > prev:
                    raise SchemaError(path, line_no, f"scores increase at candidate {text!r}")
                prev = score
                key = normalize_answer(text, "strict")
                if key in normed:
                    raise SchemaError(
                        path, line_no, f"duplicate candidate after normalization: {text!r}"
                    )
                normed.add(key)
                candidates.append((text, score))
            records.append(PredictionRecord(example_id=example_id, candidates=tuple(candidates)))
    return records


# --- shared helpers ---


def _dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _expect_header(fh, path: Path, schema: str) -> None:
    header = fh.readline().rstrip("\n")
    if not header:
        raise SchemaError(path, 1, "empty file (missing schema header)")
    if header != f"#schema={schema}":
        raise SchemaError(path, 1, f"expected '#schema={schema}', found {header!r}")


def _parse_line(path: Path, line_no: int, line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(path, line_no, f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError(path, line_no, "record must be a JSON object")
    return obj
