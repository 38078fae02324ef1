"""Prompt construction for triple-slot prediction and QA fine-tuning.

Training prompts may carry retrieved context; inference prompts never do,
and passing a bundle in eval mode is a hard error. The masked slot value is
simply omitted from the rendered instance (no placeholder token), so the
input never names the answer outside the context segment.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import ContractError, PipelineError
from .retrieval import ContextBundle

MASK_SLOTS = ("head", "relation", "tail")
TASKS = ("tail_pred", "relation_pred", "head_pred", "qa")


@dataclass(frozen=True)
class Triple:
    head: str
    relation: str
    tail: str
    example_id: str
    aligned_sentence: str | None = None

    def __post_init__(self):
        for name in ("head", "relation", "tail"):
            if not getattr(self, name):
                raise PipelineError(f"triple {self.example_id!r}: empty {name}")


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    instruction: str
    slot_order: tuple[str, ...] = MASK_SLOTS
    context_prefix: str = "Context:"
    separator: str = " | "

    def __post_init__(self):
        if not self.instruction:
            raise PipelineError(f"template {self.template_id!r}: empty instruction")


@dataclass
class PromptRecord:
    example_id: str
    input_text: str
    target_text: str
    mask_target: str  # head | relation | tail | none
    context_attached: bool
    task: str
    meta: dict[str, str] = field(default_factory=dict)


DEFAULT_TEMPLATES: dict[str, PromptTemplate] = {
    "triple-v1": PromptTemplate(
        template_id="triple-v1",
        instruction="Predict the missing element:",
    ),
    "qa-v1": PromptTemplate(
        template_id="qa-v1",
        instruction="Answer the question:",
        slot_order=("question",),
        separator=" ",
    ),
}


def select_mask(triple: Triple, seed: int) -> str:
    """Pick the masked slot uniformly from head/relation/tail.

    Draws from SHA-256 of (seed, example_id), so the choice is reproducible
    across platforms and independent of call order.
    """
    digest = hashlib.sha256(f"{seed}|{triple.example_id}".encode("utf-8")).digest()
    return MASK_SLOTS[int.from_bytes(digest[:8], "big") % 3]


def build_triple_prompt(
    triple: Triple,
    mask: str,
    bundle: ContextBundle | None,
    tmpl: PromptTemplate,
    mode: str,
) -> PromptRecord:
    """Render one triple into a training or inference record.

    The masked slot is dropped from the rendered instance and becomes the
    target. Context snippets are appended only in train mode.
    """
    if mask not in MASK_SLOTS:
        raise ContractError(f"mask must be one of {MASK_SLOTS}, got {mask!r}")
    _check_mode(mode, bundle)

    values = {"head": triple.head, "relation": triple.relation, "tail": triple.tail}
    parts = [("" if slot == mask else values[slot]) for slot in tmpl.slot_order]
    instance = tmpl.separator.join(parts).strip()
    input_text = f"{tmpl.instruction} {instance}"

    record = PromptRecord(
        example_id=triple.example_id,
        input_text=input_text,
        target_text=values[mask],
        mask_target=mask,
        context_attached=False,
        task=_task_for_mask(mask),
        meta={
            "template_id": tmpl.template_id,
            "head": triple.head,
            "relation": triple.relation,
            "tail": triple.tail,
        },
    )
    _attach_context(record, bundle, tmpl, mode)
    return record


def build_qa_prompt(
    question: str,
    answer: str,
    bundle: ContextBundle | None,
    tmpl: PromptTemplate,
    mode: str,
    example_id: str,
) -> PromptRecord:
    """Render one QA pair; target is the answer, nothing is masked."""
    if not question or not question.strip():
        raise PipelineError(f"qa record {example_id!r}: empty question")
    if not answer or not answer.strip():
        raise PipelineError(f"qa record {example_id!r}: empty answer")
    _check_mode(mode, bundle)

    record = PromptRecord(
        example_id=example_id,
        input_text=f"{tmpl.instruction} {question.strip()}",
        target_text=answer.strip(),
        mask_target="none",
        context_attached=False,
        task="qa",
        meta={"template_id": tmpl.template_id},
    )
    _attach_context(record, bundle, tmpl, mode)
    return record


def _check_mode(mode: str, bundle: ContextBundle | None) -> None:
    if mode not in ("train", "eval"):
        raise ContractError(f"mode must be 'train' or 'eval', got {mode!r}")
    if mode == "eval" and bundle is not None:
        raise ContractError("context bundle passed in eval mode: inference prompts carry no context")


def _attach_context(
    record: PromptRecord, bundle: ContextBundle | None, tmpl: PromptTemplate, mode: str
) -> None:
    if mode != "train" or bundle is None or not bundle.snippets:
        return
    record.meta["context_start"] = str(len(record.input_text))
    record.meta["context_units"] = ",".join(bundle.provenance_ids())
    joined = " ".join(s.text for s in bundle.snippets)
    record.input_text = f"{record.input_text} {tmpl.context_prefix} {joined}"
    record.context_attached = True


def _task_for_mask(mask: str) -> str:
    return {"head": "head_pred", "relation": "relation_pred", "tail": "tail_pred"}[mask]


def scan_leakage(records: list[PromptRecord]) -> list[str]:
    """example_ids whose masked value appears in the non-context input segment.

    Context snippets are allowed to contain the answer (that is the point of
    attaching them); only the instruction+instance segment is scanned.
    """
    offenders = []
    for rec in records:
        if rec.mask_target == "none":
            continue
        end = int(rec.meta["context_start"]) if "context_start" in rec.meta else len(rec.input_text)
        if rec.target_text in rec.input_text[:end]:
            offenders.append(rec.example_id)
    return offenders
