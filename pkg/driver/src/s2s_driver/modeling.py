"""Model/tokenizer loading and the tiny local checkpoint factory."""

from __future__ import annotations

from pathlib import Path


def load_model_and_tokenizer(name_or_path: str):
    from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(name_or_path)
    model = AutoModelForSeq2SeqLM.from_pretrained(name_or_path)
    return model, tokenizer


def make_tiny_checkpoint(out_dir: str | Path, seed: int = 0) -> Path:
    """Write a byte-level seq2seq checkpoint built entirely offline.

    Randomly initialized and tiny (2+2 layers, d_model 64), so it is only
    useful for smoke-testing the train/predict plumbing on CPU.
    """
    import torch
    from transformers import ByT5Tokenizer, T5Config, T5ForConditionalGeneration

    torch.manual_seed(seed)
    tokenizer = ByT5Tokenizer()
    config = T5Config(
        vocab_size=len(tokenizer) + 1,
        d_model=64,
        d_kv=16,
        d_ff=128,
        num_layers=2,
        num_decoder_layers=2,
        num_heads=4,
        dropout_rate=0.0,
        decoder_start_token_id=tokenizer.pad_token_id,
        pad_token_id=tokenizer.pad_token_id,
        eos_token_id=tokenizer.eos_token_id,
    )
    model = T5ForConditionalGeneration(config)
    out_dir = Path(out_dir)
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    return out_dir
