"""Beam-search prediction: ranked, deduplicated candidates per eval record.

Beams are oversampled (4x the requested size) before de-duplication, since
distinct token sequences can decode to the same normalized string. Scores
are the length-normalized sequence log-likelihoods beam search assigns, so
they arrive sorted and stay sorted after dedup.
"""

from __future__ import annotations

import logging
from pathlib import Path

from .schemas import (
    normalize_candidate,
    read_prompt_file,
    require_no_context,
    write_prediction_file,
)
from .spec import TrainSpec

logger = logging.getLogger(__name__)

OVERSAMPLE = 4


def predict(
    eval_file: str | Path,
    checkpoint: str | Path,
    spec: TrainSpec,
    out_path: str | Path,
    batch_size: int = 16,
) -> Path:
    """Generate beam_size distinct candidates per record; write predictions."""
    import torch

    from .modeling import load_model_and_tokenizer

    examples = read_prompt_file(eval_file)
    require_no_context(examples)

    model, tokenizer = load_model_and_tokenizer(str(checkpoint))
    device = "cuda" if torch.cuda.is_available() else "cpu"
    model.to(device)
    model.eval()

    n_beams = spec.beam_size * OVERSAMPLE
    records: list[tuple[str, list[tuple[str, float]]]] = []
    shortfalls = 0
    with torch.no_grad():
        for start in range(0, len(examples), batch_size):
            batch = examples[start : start + batch_size]
            enc = tokenizer(
                [ex.input_text for ex in batch],
                padding=True,
                truncation=True,
                max_length=spec.max_input_tokens,
                return_tensors="pt",
            ).to(device)
            out = model.generate(
                **enc,
                num_beams=n_beams,
                num_return_sequences=n_beams,
                max_new_tokens=spec.max_new_tokens,
                length_penalty=1.0,
                early_stopping=True,
                output_scores=True,
                return_dict_in_generate=True,
            )
            scores = out.sequences_scores.tolist()
            texts = tokenizer.batch_decode(out.sequences, skip_special_tokens=True)
            for i, ex in enumerate(batch):
                cands: list[tuple[str, float]] = []
                seen: set[str] = set()
                for j in range(n_beams):
                    text = texts[i * n_beams + j]
                    key = normalize_candidate(text)
                    if key in seen:
                        continue
                    seen.add(key)
                    cands.append((text, scores[i * n_beams + j]))
                    if len(cands) == spec.beam_size:
                        break
                if len(cands) < spec.beam_size:
                    shortfalls += 1
                records.append((ex.example_id, cands))
    if shortfalls:
        logger.warning(
            "%d record(s) yielded fewer than beam_size=%d distinct candidates after dedup",
            shortfalls,
            spec.beam_size,
        )
    write_prediction_file(records, out_path)
    return Path(out_path)
