"""Context assembly: pick mention-bearing units per entity under a token budget.

The fill is greedy and order-preserving: entities in the given order, each
entity's candidates in rank order, appended until the next snippet would
overflow the budget. Raising the budget therefore extends the previous
snippet list as a prefix, which keeps context-length sweeps comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import SentenceUnit, normalize, token_spans
from .errors import ConfigError
from .index import EntityIndex, MentionLocation, lookup

GRANULARITIES = ("phrase", "sentence", "paragraph")


@dataclass(frozen=True)
class RetrievalConfig:
    granularity: str = "sentence"
    per_entity_k: int = 2
    token_budget: int = 128
    phrase_window: int = 8

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ConfigError(f"granularity must be one of {GRANULARITIES}")
        if self.per_entity_k < 1:
            raise ConfigError("per_entity_k must be >= 1")
        if self.token_budget < 1:
            raise ConfigError("token_budget must be >= 1")
        if self.phrase_window < 1:
            raise ConfigError("phrase_window must be >= 1")


@dataclass
class Snippet:
    entity: str
    text: str
    provenance: MentionLocation


@dataclass
class ContextBundle:
    snippets: list[Snippet] = field(default_factory=list)
    total_tokens: int = 0
    truncated: bool = False

    def provenance_ids(self) -> list[str]:
        return [
            f"{s.provenance.doc_id}:{s.provenance.para_idx}:{s.provenance.sent_idx}"
            f":{s.provenance.token_start}:{s.provenance.token_len}"
            for s in self.snippets
        ]


def rank_candidates(
    units: list[SentenceUnit], query_entities: list[str]
) -> list[SentenceUnit]:
    """Order candidate units: most distinct query entities first, then
    shortest, then document order. Total and deterministic."""
    phrases = []
    for surface in query_entities:
        toks = tuple(normalize(surface))
        if toks and toks not in phrases:
            phrases.append(toks)

    def sort_key(unit: SentenceUnit):
        mentioned = sum(1 for ph in phrases if _contains(unit.norm_tokens, ph))
        return (-mentioned, len(unit.norm_tokens), unit.key)

    return sorted(units, key=sort_key)


def _contains(tokens: tuple[str, ...], phrase: tuple[str, ...]) -> bool:
    ln = len(phrase)
    return any(tokens[i : i + ln] == phrase for i in range(len(tokens) - ln + 1))


def retrieve(
    index: EntityIndex, entities: list[str], cfg: RetrievalConfig
) -> ContextBundle:
    """Assemble a context bundle for ``entities`` from the index.

    Entities with no postings contribute nothing. Units already emitted for
    an earlier entity are not re-emitted but still count against the later
    entity's ``per_entity_k``. The first snippet that would push the total
    past ``token_budget`` stops the whole fill with ``truncated=True``.
    """
    bundle = ContextBundle()
    seen: set[tuple] = set()
    for entity in entities:
        locations = lookup(index, entity)
        if not locations:
            continue
        first_mention: dict[tuple[str, int, int], MentionLocation] = {}
        for loc in locations:
            first_mention.setdefault(loc.unit_key, loc)
        units = [index.unit_store[key] for key in first_mention]
        ranked = rank_candidates(units, entities)
        taken = 0
        for unit in ranked:
            if taken >= cfg.per_entity_k:
                break
            taken += 1
            mention = first_mention[unit.key]
            text, dedup_key = _render_snippet(index, unit, mention, cfg)
            if dedup_key in seen:
                continue
            n_tokens = len(normalize(text))
            if bundle.total_tokens + n_tokens > cfg.token_budget:
                bundle.truncated = True
                return bundle
            seen.add(dedup_key)
            bundle.snippets.append(Snippet(entity=entity, text=text, provenance=mention))
            bundle.total_tokens += n_tokens
    return bundle


def _render_snippet(
    index: EntityIndex,
    unit: SentenceUnit,
    mention: MentionLocation,
    cfg: RetrievalConfig,
) -> tuple[str, tuple]:
    if cfg.granularity == "sentence":
        return unit.text, ("s",) + unit.key
    if cfg.granularity == "paragraph":
        siblings = sorted(
            (
                u
                for u in index.unit_store.values()
                if u.doc_id == unit.doc_id and u.para_idx == unit.para_idx
            ),
            key=lambda u: u.sent_idx,
        )
        text = " ".join(u.text for u in siblings)
        return text, ("p", unit.doc_id, unit.para_idx)
    return (
        _phrase_snippet(unit, mention, cfg.phrase_window),
        ("ph",) + tuple(mention),
    )


def _phrase_snippet(unit: SentenceUnit, mention: MentionLocation, window: int) -> str:
    lo = max(0, mention.token_start - window)
    hi = min(len(unit.norm_tokens), mention.token_start + mention.token_len + window)
    spans = token_spans(unit.text)
    if len(spans) == len(unit.norm_tokens):
        return unit.text[spans[lo][0] : spans[hi - 1][1]]
    # case-folding changed the token count; fall back to normalized tokens
    return " ".join(unit.norm_tokens[lo:hi])
