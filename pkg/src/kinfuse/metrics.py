"""Scoring of ranked predictions: Hits@K, MRR, exact match, and a chunked
set-difference approximation of graph edit distance over triple graphs.

All comparisons run on normalized strings. ``strict`` trims and case-folds;
``lenient`` additionally strips punctuation, collapses whitespace, and drops
leading articles, the usual open-domain QA convention.
"""

from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import EvaluationError, PipelineError

REPORT_SCHEMA = "report/1"

_ARTICLES = ("a", "an", "the")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class MetricConfig:
    ks: tuple[int, ...] = (1, 5, 10)
    normalization: str = "strict"
    aed_chunks: int = 4

    def __post_init__(self):
        if not self.ks or list(self.ks) != sorted(self.ks) or self.ks[0] < 1:
            raise PipelineError("ks must be a non-empty ascending list of positive ints")
        if self.normalization not in ("strict", "lenient"):
            raise PipelineError("normalization must be 'strict' or 'lenient'")
        if self.aed_chunks < 1:
            raise PipelineError("aed_chunks must be >= 1")


@dataclass
class MetricReport:
    hits: dict[int, float]
    mrr: float
    exact_match_pct: float
    aed: float | None
    n_examples: int
    config: MetricConfig = field(default_factory=MetricConfig)


def normalize_answer(s: str, mode: str = "strict") -> str:
    """strict: trim + case-fold. lenient: also drop punctuation, collapse
    whitespace, and strip leading articles."""
    out = s.strip().casefold()
    if mode == "strict":
        return out
    if mode != "lenient":
        raise PipelineError(f"unknown normalization mode {mode!r}")
    out = "".join(ch for ch in out if not unicodedata.category(ch).startswith("P"))
    words = _WS_RE.split(out.strip())
    while words and words[0] in _ARTICLES:
        words = words[1:]
    return " ".join(w for w in words if w)


def _rank_of_gold(candidates, gold_norm: str, mode: str) -> int | None:
    """1-based rank of the first normalized match, None if absent."""
    for rank, (text, _score) in enumerate(candidates, start=1):
        if normalize_answer(text, mode) == gold_norm:
            return rank
    return None


def _check_gold(preds, gold: Mapping[str, str]) -> None:
    missing = sorted(p.example_id for p in preds if p.example_id not in gold)
    if missing:
        raise EvaluationError(f"no gold answer for example_ids: {missing}")


def hits_at_k(preds, gold: Mapping[str, str], k: int, mode: str = "strict") -> float:
    """Fraction of examples whose top-k candidates contain the gold answer."""
    if not preds:
        raise EvaluationError("no predictions to score")
    _check_gold(preds, gold)
    short = sorted(p.example_id for p in preds if len(p.candidates) < k)
    if short:
        raise EvaluationError(f"candidate lists shorter than k={k} for: {short}")
    hit = 0
    for p in preds:
        gold_norm = normalize_answer(gold[p.example_id], mode)
        rank = _rank_of_gold(p.candidates[:k], gold_norm, mode)
        if rank is not None:
            hit += 1
    return hit / len(preds)


def mrr(preds, gold: Mapping[str, str], mode: str = "strict") -> float:
    """Mean reciprocal rank of the first match; absent gold scores 0."""
    if not preds:
        raise EvaluationError("no predictions to score")
    _check_gold(preds, gold)
    total = 0.0
    for p in preds:
        gold_norm = normalize_answer(gold[p.example_id], mode)
        rank = _rank_of_gold(p.candidates, gold_norm, mode)
        total += 0.0 if rank is None else 1.0 / rank
    return total / len(preds)


def exact_match(preds, gold: Mapping[str, str], mode: str = "strict") -> float:
    """Percent of examples whose top-1 candidate equals the gold answer."""
    if not preds:
        raise EvaluationError("no predictions to score")
    _check_gold(preds, gold)
    correct = sum(
        1
        for p in preds
        if normalize_answer(p.candidates[0][0], mode)
        == normalize_answer(gold[p.example_id], mode)
    )
    return 100.0 * correct / len(preds)


def aed(pred_triples: Sequence, gold_triples: Sequence, chunks: int = 4) -> float:
    """Mean per-chunk symmetric-difference distance between triple graphs.

    The aligned example sequences are cut into ``chunks`` contiguous chunks
    (last one may be smaller). Each chunk becomes a labeled directed graph
    with normalized entity strings as nodes and (head, relation, tail)
    edges; the chunk distance is |nodes P Δ nodes G| + |edges P Δ edges G|.
    """
    if not pred_triples or not gold_triples:
        raise EvaluationError("aed requires non-empty triple lists")
    if len(pred_triples) != len(gold_triples):
        raise EvaluationError(
            f"aed inputs must align: {len(pred_triples)} predicted vs {len(gold_triples)} gold"
        )
    if chunks < 1:
        raise EvaluationError("chunks must be >= 1")
    n = len(pred_triples)
    size = math.ceil(n / chunks)
    distances = []
    for start in range(0, n, size):
        p_chunk = pred_triples[start : start + size]
        g_chunk = gold_triples[start : start + size]
        p_nodes, p_edges = _graph(p_chunk)
        g_nodes, g_edges = _graph(g_chunk)
        distances.append(
            len(p_nodes ^ g_nodes) + len(p_edges ^ g_edges)
        )
    return sum(distances) / len(distances)


def _graph(triples) -> tuple[set[str], set[tuple[str, str, str]]]:
    nodes: set[str] = set()
    edges: set[tuple[str, str, str]] = set()
    for t in triples:
        h = normalize_answer(t.head, "strict")
        r = normalize_answer(t.relation, "strict")
        tl = normalize_answer(t.tail, "strict")
        nodes.add(h)
        nodes.add(tl)
        edges.add((h, r, tl))
    return nodes, edges


def evaluate(pred_path: str | Path, gold_path: str | Path, cfg: MetricConfig) -> MetricReport:
    """Score a prediction file against the record file it answers.

    Gold answers are the target_text fields; AED is computed only when the
    gold records carry full triple metadata (slot-prediction tasks) and is
    omitted otherwise.
    """
    from .dataio import read_predictions, read_prompts
    from .prompts import Triple

    preds = read_predictions(pred_path)
    if not preds:
        raise EvaluationError(f"prediction file {pred_path} holds no records")
    gold_records = {r.example_id: r for r in read_prompts(gold_path)}
    gold = {eid: rec.target_text for eid, rec in gold_records.items()}
    _check_gold(preds, gold)

    mode = cfg.normalization
    hits = {k: hits_at_k(preds, gold, k, mode) for k in cfg.ks}
    report = MetricReport(
        hits=hits,
        mrr=mrr(preds, gold, mode),
        exact_match_pct=exact_match(preds, gold, mode),
        aed=None,
        n_examples=len(preds),
        config=cfg,
    )

    pred_triples = []
    gold_triples = []
    for p in sorted(preds, key=lambda r: r.example_id):
        rec = gold_records[p.example_id]
        meta = rec.meta
        if rec.mask_target == "none" or not all(k in meta for k in ("head", "relation", "tail")):
            continue
        slots = {"head": meta["head"], "relation": meta["relation"], "tail": meta["tail"]}
        gold_triples.append(
            Triple(example_id=p.example_id, head=slots["head"], relation=slots["relation"], tail=slots["tail"])
        )
        slots[rec.mask_target] = p.candidates[0][0] or "<empty>"
        pred_triples.append(
            Triple(example_id=p.example_id, head=slots["head"], relation=slots["relation"], tail=slots["tail"])
        )
    if pred_triples:
        report.aed = aed(pred_triples, gold_triples, cfg.aed_chunks)
    return report


def write_report(report: MetricReport, path: str | Path) -> None:
    """Line-delimited metric<TAB>value file, metric values at 3 decimals."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"#schema={REPORT_SCHEMA}"]
    lines.append(f"n_examples\t{report.n_examples}")
    for k in sorted(report.hits):
        lines.append(f"hits@{k}\t{report.hits[k]:.3f}")
    lines.append(f"mrr\t{report.mrr:.3f}")
    lines.append(f"exact_match_pct\t{report.exact_match_pct:.3f}")
    if report.aed is not None:
        lines.append(f"aed\t{report.aed:.3f}")
    cfg = report.config
    lines.append(f"config.ks\t{','.join(str(k) for k in cfg.ks)}")
    lines.append(f"config.normalization\t{cfg.normalization}")
    lines.append(f"config.aed_chunks\t{cfg.aed_chunks}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def format_report(report: MetricReport) -> str:
    """Human-readable table for terminal output."""
    rows = [("n_examples", str(report.n_examples))]
    rows += [(f"hits@{k}", f"{report.hits[k]:.3f}") for k in sorted(report.hits)]
    rows.append(("mrr", f"{report.mrr:.3f}"))
    rows.append(("exact_match_pct", f"{report.exact_match_pct:.3f}"))
    if report.aed is not None:
        rows.append(("aed", f"{report.aed:.3f}"))
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows)
