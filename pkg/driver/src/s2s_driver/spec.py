"""Training/prediction settings.

Full-scale defaults (10k steps, effective batch 128 via accumulation,
beam 10) match the documented experiment settings; desk-scale smoke runs
shrink them through CLI flags.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path


@dataclass(frozen=True)
class TrainSpec:
    model_name: str
    max_steps: int = 10_000
    batch_size: int = 128  # effective, reached via gradient accumulation
    micro_batch: int = 8
    precision: str = "fp32"  # fp32 | fp16
    seed: int = 0
    beam_size: int = 10
    learning_rate: float = 5e-4
    max_input_tokens: int = 512
    max_new_tokens: int = 32

    def __post_init__(self):
        if self.precision not in ("fp32", "fp16"):
            raise ValueError("precision must be fp32 or fp16")
        if self.max_steps < 1 or self.batch_size < 1 or self.micro_batch < 1:
            raise ValueError("max_steps, batch_size, micro_batch must be >= 1")
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.micro_batch > self.batch_size:
            raise ValueError("micro_batch cannot exceed batch_size")

    @property
    def accumulation_steps(self) -> int:
        return -(-self.batch_size // self.micro_batch)

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")
