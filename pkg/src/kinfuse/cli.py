"""Pipeline stages as subcommands: index, build, evaluate, inspect.

Each stage writes a run manifest (config hash, input digests, per-stage
counts, timestamps) next to its outputs. Output files themselves are
byte-reproducible from (inputs, config); manifests carry wall-clock
timestamps and are excluded from that guarantee.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .config import RunConfig, config_digest, load_config
from .corpus import load_corpus, segment, verbatim_unit
from .dataio import (
    emit_prompts,
    read_qa_pairs,
    read_triples,
    split,
)
from .errors import ConfigError, PipelineError
from .index import build_index, extract_entities, load_index, lookup, save_index
from .metrics import evaluate, format_report, write_report
from .prompts import (
    DEFAULT_TEMPLATES,
    PromptRecord,
    Triple,
    build_qa_prompt,
    build_triple_prompt,
    scan_leakage,
    select_mask,
)
from .retrieval import retrieve


def cmd_index(cfg: RunConfig) -> dict:
    """Ingest the corpus, build the mention index, persist it."""
    docs = list(load_corpus(cfg.corpus.path, cfg.corpus.format))
    docs.sort(key=lambda d: d.doc_id)
    if cfg.corpus.format == "aligned_triples":
        # aligned sentences are curated: one unit each, never re-segmented
        units = [u for doc in docs if (u := verbatim_unit(doc)) is not None]
    else:
        units = [u for doc in docs for u in segment(doc)]
    vocab = None
    if cfg.index.vocab_path:
        vocab_path = Path(cfg.index.vocab_path)
        if not vocab_path.is_file():
            raise ConfigError(f"index.vocab_path not found: {vocab_path}")
        vocab = [line.strip() for line in vocab_path.read_text(encoding="utf-8").splitlines() if line.strip()]
    index = build_index(units, phrase_vocab=vocab, max_ngram=cfg.index.max_ngram)
    save_index(index, cfg.index.path)
    counts = {
        "documents": len(docs),
        "units": index.manifest.unit_count,
        "postings": index.manifest.phrase_count,
    }
    _write_run_manifest("index", cfg, counts, inputs=[cfg.corpus.path], out_dir=Path(cfg.index.path).parent)
    return counts


def cmd_build(cfg: RunConfig) -> dict:
    """Split the dataset and emit train (with context) and eval (without)."""
    if cfg.dataset is None:
        raise ConfigError("cmd_build requires a dataset section")
    if cfg.prompts.task == "qa" and cfg.dataset.format != "qa_tsv":
        raise ConfigError("prompts.task=qa requires dataset.format=qa_tsv")
    if cfg.prompts.task == "triple" and cfg.dataset.format == "qa_tsv":
        raise ConfigError("prompts.task=triple needs a triple dataset format, not qa_tsv")
    index = load_index(cfg.index.path)
    tmpl = DEFAULT_TEMPLATES[cfg.prompts.template_id]
    seed = cfg.prompts.seed

    if cfg.prompts.task == "qa":
        items = read_qa_pairs(cfg.dataset.path)
    else:
        items = read_triples(cfg.dataset.path, cfg.dataset.format)
    train_items, eval_items = split(items, cfg.split)

    def build_one(item, mode: str) -> PromptRecord:
        if cfg.prompts.task == "qa":
            example_id, question, answer = item
            bundle = None
            if mode == "train":
                surfaces = [surface for surface, _span in extract_entities(index, question)]
                bundle = retrieve(index, surfaces, cfg.retrieval)
            return build_qa_prompt(question, answer, bundle, tmpl, mode, example_id)
        mask = cfg.prompts.mask if cfg.prompts.mask != "random" else select_mask(item, seed)
        bundle = None
        if mode == "train":
            entities = [
                value
                for slot, value in (("head", item.head), ("relation", item.relation), ("tail", item.tail))
                if slot != mask
            ]
            bundle = retrieve(index, entities, cfg.retrieval)
        record = build_triple_prompt(item, mask, bundle, tmpl, mode)
        record.meta["seed"] = str(seed)
        record.meta["mask_mode"] = cfg.prompts.mask
        return record

    train_records = [build_one(item, "train") for item in train_items]
    eval_records = [build_one(item, "eval") for item in eval_items]

    offenders = scan_leakage(train_records + eval_records)
    if offenders:
        raise PipelineError(
            f"masked value leaks into the non-context input segment for: {offenders}"
        )

    emit_prompts(train_records, cfg.paths.train_out)
    emit_prompts(eval_records, cfg.paths.eval_out)
    counts = {
        "examples": len(items),
        "prompts_train": len(train_records),
        "prompts_eval": len(eval_records),
        "train_with_context": sum(1 for r in train_records if r.context_attached),
    }
    _write_run_manifest(
        "build",
        cfg,
        counts,
        inputs=[cfg.dataset.path, cfg.index.path],
        out_dir=Path(cfg.paths.train_out).parent,
        outputs=[cfg.paths.train_out, cfg.paths.eval_out],
    )
    return counts


def cmd_evaluate(cfg: RunConfig) -> dict:
    """Score the prediction file against the emitted eval records."""
    report = evaluate(cfg.paths.predictions_in, cfg.paths.eval_out, cfg.metrics)
    write_report(report, cfg.paths.report_out)
    print(format_report(report))
    counts = {"examples_scored": report.n_examples}
    _write_run_manifest(
        "evaluate",
        cfg,
        counts,
        inputs=[cfg.paths.predictions_in, cfg.paths.eval_out],
        out_dir=Path(cfg.paths.report_out).parent,
        outputs=[cfg.paths.report_out],
    )
    return counts


def cmd_inspect(index_path: str, entity: str) -> None:
    """Dump postings for one entity, with the mentioning sentences."""
    index = load_index(index_path)
    locations = lookup(index, entity)
    if not locations:
        print(f"no postings for {entity!r}")
        return
    print(f"{len(locations)} mention(s) of {entity!r}:")
    for loc in locations:
        unit = index.unit_store[loc.unit_key]
        print(
            f"  {loc.doc_id} p{loc.para_idx} s{loc.sent_idx} "
            f"tokens[{loc.token_start}:{loc.token_start + loc.token_len}]  {unit.text}"
        )


def _write_run_manifest(stage, cfg, counts, inputs, out_dir, outputs=None) -> None:
    digests = {}
    for item in inputs:
        p = Path(item)
        if p.is_file():
            digests[str(p)] = hashlib.sha256(p.read_bytes()).hexdigest()
        elif p.is_dir():
            digests[str(p)] = _digest_dir(p)
    output_digests = {
        str(p): hashlib.sha256(Path(p).read_bytes()).hexdigest() for p in (outputs or [])
    }
    manifest = {
        "stage": stage,
        "tool_version": __version__,
        "config_sha256": config_digest(cfg),
        "inputs": digests,
        "outputs": output_digests,
        "counts": counts,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stage}.run.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _digest_dir(path: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(path.rglob("*")):
        if p.is_file():
            h.update(p.name.encode("utf-8"))
            h.update(p.read_bytes())
    return h.hexdigest()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kinfuse",
        description="Entity-context pipeline: corpus indexing, contextual prompt "
        "dataset generation, and prediction scoring.",
    )
    parser.add_argument("--version", action="version", version=f"kinfuse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("index", "segment the corpus and build the mention index"),
        ("build", "split the dataset and emit train/eval prompt files"),
        ("evaluate", "score a prediction file and write the metric report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run config file (YAML)")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config value by dotted path (repeatable)",
        )

    p_inspect = sub.add_parser("inspect", help="dump postings for one entity")
    p_inspect.add_argument("index_path", help="persisted index directory")
    p_inspect.add_argument("entity", help="entity surface form to look up")

    args = parser.parse_args(argv)
    try:
        if args.command == "inspect":
            cmd_inspect(args.index_path, args.entity)
        else:
            cfg = load_config(args.config, args.overrides)
            stage = {"index": cmd_index, "build": cmd_build, "evaluate": cmd_evaluate}[args.command]
            counts = stage(cfg)
            for key, value in counts.items():
                print(f"{key}: {value}")
    except PipelineError as exc:
        print(f"kinfuse {args.command}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"kinfuse {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
