"""Run configuration: one declarative YAML file drives every stage.

Flags exist only as dotted-path overrides (``--set retrieval.token_budget=64``)
so a run is always archivable as a single diffable document.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .corpus import CORPUS_FORMATS
from .dataio import TRIPLE_FORMATS, SplitSpec
from .errors import ConfigError
from .index import DEFAULT_MAX_NGRAM
from .metrics import MetricConfig
from .prompts import DEFAULT_TEMPLATES, MASK_SLOTS
from .retrieval import RetrievalConfig

DATASET_FORMATS = TRIPLE_FORMATS + ("qa_tsv",)


@dataclass
class CorpusConfig:
    path: str
    format: str

    def __post_init__(self):
        if self.format not in CORPUS_FORMATS:
            raise ConfigError(f"corpus.format must be one of {CORPUS_FORMATS}")


@dataclass
class DatasetConfig:
    path: str
    format: str

    def __post_init__(self):
        if self.format not in DATASET_FORMATS:
            raise ConfigError(f"dataset.format must be one of {DATASET_FORMATS}")


@dataclass
class IndexConfig:
    path: str
    vocab_path: str | None = None
    max_ngram: int = DEFAULT_MAX_NGRAM

    def __post_init__(self):
        if self.max_ngram < 1:
            raise ConfigError("index.max_ngram must be >= 1")


@dataclass
class PromptConfig:
    template_id: str = "triple-v1"
    task: str = "triple"
    mask: str = "random"
    seed: int = 0

    def __post_init__(self):
        if self.task not in ("triple", "qa"):
            raise ConfigError("prompts.task must be 'triple' or 'qa'")
        if self.mask not in MASK_SLOTS + ("random", "none"):
            raise ConfigError(f"prompts.mask must be random, none, or one of {MASK_SLOTS}")
        if self.task == "qa" and self.mask != "none":
            raise ConfigError("prompts.task=qa requires prompts.mask=none")
        if self.task == "triple" and self.mask == "none":
            raise ConfigError("prompts.task=triple requires a mask (random or a fixed slot)")
        if self.template_id not in DEFAULT_TEMPLATES:
            raise ConfigError(
                f"unknown template {self.template_id!r}; known: {sorted(DEFAULT_TEMPLATES)}"
            )


@dataclass
class PathsConfig:
    train_out: str = "train.prompts"
    eval_out: str = "eval.prompts"
    predictions_in: str = "predictions.jsonl"
    report_out: str = "report.tsv"


@dataclass
class RunConfig:
    corpus: CorpusConfig
    index: IndexConfig
    dataset: DatasetConfig | None = None
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    prompts: PromptConfig = field(default_factory=PromptConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    paths: PathsConfig = field(default_factory=PathsConfig)
    metrics: MetricConfig = field(default_factory=MetricConfig)


_SECTIONS = {
    "corpus": CorpusConfig,
    "dataset": DatasetConfig,
    "index": IndexConfig,
    "retrieval": RetrievalConfig,
    "prompts": PromptConfig,
    "split": SplitSpec,
    "paths": PathsConfig,
    "metrics": MetricConfig,
}


def load_config(path: str | Path, overrides: list[str] | None = None) -> RunConfig:
    """Parse the run config file and apply ``key.path=value`` overrides."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping: {path}")
    for item in overrides or []:
        _apply_override(raw, item)
    return build_config(raw)


def build_config(raw: dict) -> RunConfig:
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    if "corpus" not in raw or "index" not in raw:
        raise ConfigError("config requires corpus and index sections")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name not in raw:
            continue
        section = raw[name]
        if not isinstance(section, dict):
            raise ConfigError(f"config section {name!r} must be a mapping")
        try:
            kwargs[name] = _build_section(cls, section, name)
        except TypeError as exc:
            raise ConfigError(f"config section {name!r}: {exc}") from exc
    return RunConfig(**kwargs)


def _build_section(cls, section: dict, name: str):
    if cls is MetricConfig and "ks" in section:
        section = dict(section, ks=tuple(section["ks"]))
    if cls is SplitSpec and "train_fraction" in section:
        section = dict(section, train_fraction=float(section["train_fraction"]))
    return cls(**section)


def _apply_override(raw: dict, item: str) -> None:
    if "=" not in item:
        raise ConfigError(f"override must look like section.key=value: {item!r}")
    dotted, value = item.split("=", 1)
    keys = dotted.split(".")
    if len(keys) < 2:
        raise ConfigError(f"override key must be nested (section.key): {dotted!r}")
    node = raw
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {dotted!r} crosses a non-mapping value")
    node[keys[-1]] = yaml.safe_load(value)


def config_digest(raw_or_cfg) -> str:
    """Stable hash of a config for run manifests."""
    import hashlib
    import json
    from dataclasses import asdict, is_dataclass

    obj = asdict(raw_or_cfg) if is_dataclass(raw_or_cfg) else raw_or_cfg
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
