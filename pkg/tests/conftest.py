from __future__ import annotations

import random

import pytest

from kinfuse.corpus import SentenceUnit, normalize

# Small pool of multi-word surface forms for synthetic corpora. Names are
# arbitrary; what matters is overlap (shared first tokens, nested phrases).
ENTITY_POOL = [
    "Barack Obama",
    "Michelle Obama",
    "Robbie Shields Terry",
    "New York City",
    "New York",
    "quantum field theory",
    "supreme court",
    "court of appeals",
    "Ada Lovelace",
    "Alan Turing",
    "machine learning",
    "graph edit distance",
]

FILLER = (
    "the a of in on and to for with from about over under near was is are "
    "said wrote met visited joined led won lost city state nation river "
    "mountain book paper law case study model result method system group"
).split()


def make_units(n_units: int, entities: list[str], seed: int = 13) -> list[SentenceUnit]:
    """Synthetic sentence units, roughly half of them mentioning an entity."""
    rng = random.Random(seed)
    units = []
    for i in range(n_units):
        doc_id = f"d{i // 20}"
        para_idx = (i % 20) // 5
        sent_idx = i % 5
        words = [rng.choice(FILLER) for _ in range(rng.randint(4, 12))]
        if rng.random() < 0.55:
            ent = rng.choice(entities)
            pos = rng.randint(0, len(words))
            words[pos:pos] = ent.split()
        if rng.random() < 0.15:
            ent = rng.choice(entities)
            words.extend(ent.split())
        text = " ".join(words).capitalize() + "."
        units.append(
            SentenceUnit(
                doc_id=doc_id,
                para_idx=para_idx,
                sent_idx=sent_idx,
                text=text,
                norm_tokens=tuple(normalize(text)),
                char_span=(0, len(text)),
            )
        )
    return units


@pytest.fixture(scope="session")
def small_units() -> list[SentenceUnit]:
    return make_units(400, ENTITY_POOL)
