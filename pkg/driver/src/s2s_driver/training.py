"""Fine-tuning loop: seeded data order, gradient accumulation, step-wise loss log.

The training log (train_log.jsonl) records for every optimizer step the loss,
learning rate, and the example ids consumed, so two runs with the same seed
can be diffed line by line.
"""

from __future__ import annotations

import json
import logging
import random
from pathlib import Path

from .schemas import read_prompt_file
from .spec import TrainSpec

logger = logging.getLogger(__name__)


def train(train_file: str | Path, spec: TrainSpec, out_dir: str | Path) -> Path:
    """Fine-tune spec.model_name on a prompt file; returns the checkpoint dir."""
    import torch

    from .modeling import load_model_and_tokenizer

    examples = read_prompt_file(train_file)  # refuses on schema mismatch
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(spec.seed)
    model, tokenizer = load_model_and_tokenizer(spec.model_name)
    device = "cuda" if torch.cuda.is_available() else "cpu"
    model.to(device)
    model.train()

    use_fp16 = spec.precision == "fp16"
    if use_fp16 and device != "cuda":
        logger.warning("fp16 requested without CUDA; falling back to fp32")
        use_fp16 = False
    scaler = torch.cuda.amp.GradScaler() if use_fp16 else None

    optimizer = torch.optim.AdamW(model.parameters(), lr=spec.learning_rate)
    rng = random.Random(spec.seed)
    order: list[int] = []

    def next_batch(size: int):
        nonlocal order
        batch = []
        while len(batch) < size:
            if not order:
                order = list(range(len(examples)))
                rng.shuffle(order)
            batch.append(examples[order.pop()])
        return batch

    log_path = out_dir / "train_log.jsonl"
    try:
        with log_path.open("w", encoding="utf-8") as log:
            for step in range(1, spec.max_steps + 1):
                optimizer.zero_grad(set_to_none=True)
                step_loss = 0.0
                step_ids: list[str] = []
                for _ in range(spec.accumulation_steps):
                    batch = next_batch(spec.micro_batch)
                    step_ids.extend(ex.example_id for ex in batch)
                    enc = tokenizer(
                        [ex.input_text for ex in batch],
                        padding=True,
                        truncation=True,
                        max_length=spec.max_input_tokens,
                        return_tensors="pt",
                    ).to(device)
                    labels = tokenizer(
                        [ex.target_text for ex in batch],
                        padding=True,
                        truncation=True,
                        max_length=spec.max_input_tokens,
                        return_tensors="pt",
                    ).input_ids.to(device)
                    labels[labels == tokenizer.pad_token_id] = -100
                    if use_fp16:
                        with torch.autocast(device_type="cuda", dtype=torch.float16):
                            loss = model(**enc, labels=labels).loss / spec.accumulation_steps
                        scaler.scale(loss).backward()
                    else:
                        loss = model(**enc, labels=labels).loss / spec.accumulation_steps
                        loss.backward()
                    step_loss += loss.item()
                if use_fp16:
                    scaler.step(optimizer)
                    scaler.update()
                else:
                    optimizer.step()
                log.write(
                    json.dumps(
                        {
                            "step": step,
                            "loss": round(step_loss, 6),
                            "lr": spec.learning_rate,
                            "example_ids": step_ids,
                        }
                    )
                    + "\n"
                )
    except torch.cuda.OutOfMemoryError as exc:
        raise MemoryError(
            f"out of GPU memory at micro_batch={spec.micro_batch}; lower --micro-batch "
            "(gradient accumulation keeps the effective batch size) or use fp16"
        ) from exc

    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    spec.save(out_dir / "train_spec.json")
    return out_dir


def read_train_log(checkpoint: str | Path) -> list[dict]:
    path = Path(checkpoint) / "train_log.jsonl"
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]
