"""Inverted index from normalized entity surface forms to mention locations.

Postings are keyed by the first token of the normalized phrase, then by the
full phrase, so both exact lookup and greedy longest-match extraction scan
only phrases that can start at the current token. The index is immutable
after build/load and safe for concurrent readers.

On-disk layout (one directory):
    manifest.txt   line-delimited key=value, format_version first
    units.dat      length-prefixed unit records, sorted by unit key
    postings.dat   length-prefixed phrase records, sorted by phrase

Both .dat files are covered by sha256 digests recorded in the manifest, so a
truncated or bit-flipped file fails verification at load time.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from .corpus import SentenceUnit, normalize
from .errors import IndexBuildError, IndexIntegrityError, IndexVersionError

FORMAT_VERSION = 1
DEFAULT_MAX_NGRAM = 6

_LEN = struct.Struct(">I")


class MentionLocation(NamedTuple):
    doc_id: str
    para_idx: int
    sent_idx: int
    token_start: int
    token_len: int

    @property
    def unit_key(self) -> tuple[str, int, int]:
        return (self.doc_id, self.para_idx, self.sent_idx)


@dataclass
class IndexManifest:
    corpus_fingerprint: str
    unit_count: int
    phrase_count: int
    format_version: int = FORMAT_VERSION
    max_ngram: int = DEFAULT_MAX_NGRAM
    vocab_based: bool = False


@dataclass
class EntityIndex:
    """postings: first token -> normalized phrase -> sorted mention list."""

    postings: dict[str, dict[str, list[MentionLocation]]]
    unit_store: dict[tuple[str, int, int], SentenceUnit]
    manifest: IndexManifest

    def phrases(self) -> Iterable[str]:
        for by_phrase in self.postings.values():
            yield from by_phrase.keys()


def build_index(
    units: Iterable[SentenceUnit],
    phrase_vocab: list[str] | None = None,
    max_ngram: int = DEFAULT_MAX_NGRAM,
) -> EntityIndex:
    """Index mention occurrences over ``units``.

    With ``phrase_vocab``, postings hold exactly the contiguous occurrences
    of those normalized phrases. Without it, every unigram through
    ``max_ngram``-gram is indexed.
    """
    unit_store: dict[tuple[str, int, int], SentenceUnit] = {}
    postings: dict[str, dict[str, list[MentionLocation]]] = {}
    fingerprint = hashlib.sha256()

    vocab_by_first: dict[str, list[tuple[tuple[str, ...], str]]] | None = None
    if phrase_vocab is not None:
        vocab_by_first = {}
        for surface in phrase_vocab:
            toks = tuple(normalize(surface))
            if not toks:
                continue
            phrase = " ".join(toks)
            entry = (toks, phrase)
            bucket = vocab_by_first.setdefault(toks[0], [])
            if entry not in bucket:
                bucket.append(entry)

    for unit in sorted(units, key=lambda u: u.key):
        if unit.key in unit_store:
            raise IndexBuildError(f"duplicate unit identifier {unit.key}")
        unit_store[unit.key] = unit
        fingerprint.update(repr(unit.key).encode("utf-8"))
        fingerprint.update(unit.text.encode("utf-8"))
        toks = unit.norm_tokens
        n_toks = len(toks)
        if vocab_by_first is not None:
            for pos, tok in enumerate(toks):
                for cand_toks, phrase in vocab_by_first.get(tok, ()):
                    ln = len(cand_toks)
                    if pos + ln <= n_toks and toks[pos : pos + ln] == cand_toks:
                        _add(postings, phrase, MentionLocation(*unit.key, pos, ln))
        else:
            for pos in range(n_toks):
                limit = min(max_ngram, n_toks - pos)
                for ln in range(1, limit + 1):
                    phrase = " ".join(toks[pos : pos + ln])
                    _add(postings, phrase, MentionLocation(*unit.key, pos, ln))

    phrase_count = sum(len(v) for v in postings.values())
    manifest = IndexManifest(
        corpus_fingerprint=fingerprint.hexdigest(),
        unit_count=len(unit_store),
        phrase_count=phrase_count,
        max_ngram=max_ngram,
        vocab_based=phrase_vocab is not None,
    )
    return EntityIndex(postings=postings, unit_store=unit_store, manifest=manifest)


def _add(postings, phrase: str, loc: MentionLocation) -> None:
    postings.setdefault(phrase.split(" ", 1)[0], {}).setdefault(phrase, []).append(loc)


def lookup(index: EntityIndex, surface: str) -> list[MentionLocation]:
    """All mention locations of the normalized phrase, in posting order."""
    toks = normalize(surface)
    if not toks:
        return []
    return list(index.postings.get(toks[0], {}).get(" ".join(toks), ()))


def extract_entities(index: EntityIndex, text: str) -> list[tuple[str, tuple[int, int]]]:
    """Greedy longest-match scan of ``text`` against the indexed phrases.

    Returns (normalized phrase, token span) pairs; spans are half-open over
    ``normalize(text)`` and never overlap. Ties on length go to the
    leftmost start, which the left-to-right scan yields naturally.
    """
    toks = normalize(text)
    matches: list[tuple[str, tuple[int, int]]] = []
    i = 0
    n = len(toks)
    while i < n:
        by_phrase = index.postings.get(toks[i])
        best: str | None = None
        best_len = 0
        if by_phrase:
            for phrase in by_phrase:
                ptoks = phrase.split(" ")
                ln = len(ptoks)
                if ln > best_len and i + ln <= n and toks[i : i + ln] == ptoks:
                    best, best_len = phrase, ln
        if best is None:
            i += 1
        else:
            matches.append((best, (i, i + best_len)))
            i += best_len
    return matches


# --- persistence ---


def save_index(index: EntityIndex, path: str | Path) -> None:
    """Write the index directory; byte-deterministic for identical content."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)

    units_blob = b"".join(
        _record(_unit_payload(index.unit_store[key]))
        for key in sorted(index.unit_store)
    )
    phrase_rows = sorted(
        (phrase, locs)
        for by_phrase in index.postings.values()
        for phrase, locs in by_phrase.items()
    )
    postings_blob = b"".join(
        _record({"ph": phrase, "loc": [list(l) for l in locs]})
        for phrase, locs in phrase_rows
    )

    (path / "units.dat").write_bytes(units_blob)
    (path / "postings.dat").write_bytes(postings_blob)

    m = index.manifest
    lines = [
        f"format_version={m.format_version}",
        f"corpus_fingerprint={m.corpus_fingerprint}",
        f"unit_count={m.unit_count}",
        f"phrase_count={m.phrase_count}",
        f"max_ngram={m.max_ngram}",
        f"vocab_based={int(m.vocab_based)}",
        f"units_sha256={hashlib.sha256(units_blob).hexdigest()}",
        f"postings_sha256={hashlib.sha256(postings_blob).hexdigest()}",
    ]
    (path / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_index(path: str | Path) -> EntityIndex:
    """Load and verify a persisted index; lookups agree with the saved one."""
    path = Path(path)
    manifest_path = path / "manifest.txt"
    if not manifest_path.is_file():
        raise IndexIntegrityError(f"no manifest at {manifest_path}")
    fields: dict[str, str] = {}
    for line in manifest_path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            fields[key] = value
    if not fields:
        raise IndexIntegrityError(f"empty manifest at {manifest_path}")
    version = int(fields.get("format_version", "-1"))
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"index format version {version} unsupported (expected {FORMAT_VERSION})"
        )

    units_blob = (path / "units.dat").read_bytes()
    postings_blob = (path / "postings.dat").read_bytes()
    for name, blob in (("units", units_blob), ("postings", postings_blob)):
        digest = hashlib.sha256(blob).hexdigest()
        if digest != fields.get(f"{name}_sha256"):
            raise IndexIntegrityError(f"{name}.dat digest mismatch: index corrupt or truncated")

    unit_store: dict[tuple[str, int, int], SentenceUnit] = {}
    for payload in _iter_records(units_blob, path / "units.dat"):
        unit = SentenceUnit(
            doc_id=payload["d"],
            para_idx=payload["p"],
            sent_idx=payload["s"],
            text=payload["t"],
            norm_tokens=tuple(payload["n"]),
            char_span=(payload["c"][0], payload["c"][1]),
        )
        unit_store[unit.key] = unit

    postings: dict[str, dict[str, list[MentionLocation]]] = {}
    phrase_count = 0
    for payload in _iter_records(postings_blob, path / "postings.dat"):
        locs = [MentionLocation(*row) for row in payload["loc"]]
        _add_all(postings, payload["ph"], locs)
        phrase_count += 1

    manifest = IndexManifest(
        corpus_fingerprint=fields["corpus_fingerprint"],
        unit_count=int(fields["unit_count"]),
        phrase_count=int(fields["phrase_count"]),
        format_version=version,
        max_ngram=int(fields.get("max_ngram", DEFAULT_MAX_NGRAM)),
        vocab_based=bool(int(fields.get("vocab_based", "0"))),
    )
    if manifest.unit_count != len(unit_store):
        raise IndexIntegrityError(
            f"manifest unit_count={manifest.unit_count} but {len(unit_store)} units loaded"
        )
    if manifest.phrase_count != phrase_count:
        raise IndexIntegrityError(
            f"manifest phrase_count={manifest.phrase_count} but {phrase_count} phrases loaded"
        )
    index = EntityIndex(postings=postings, unit_store=unit_store, manifest=manifest)
    for by_phrase in postings.values():
        for locs in by_phrase.values():
            for loc in locs:
                if loc.unit_key not in unit_store:
                    raise IndexIntegrityError(f"posting references missing unit {loc.unit_key}")
    return index


def _add_all(postings, phrase: str, locs: list[MentionLocation]) -> None:
    postings.setdefault(phrase.split(" ", 1)[0], {})[phrase] = locs


def _unit_payload(unit: SentenceUnit) -> dict:
    return {
        "d": unit.doc_id,
        "p": unit.para_idx,
        "s": unit.sent_idx,
        "t": unit.text,
        "n": list(unit.norm_tokens),
        "c": [unit.char_span[0], unit.char_span[1]],
    }


def _record(payload: dict) -> bytes:
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )
    return _LEN.pack(len(body)) + body


def _iter_records(blob: bytes, origin: Path):
    pos = 0
    total = len(blob)
    while pos < total:
        if pos + _LEN.size > total:
            raise IndexIntegrityError(f"truncated record header in {origin}")
        (length,) = _LEN.unpack_from(blob, pos)
        pos += _LEN.size
        if pos + length > total:
            raise IndexIntegrityError(f"truncated record body in {origin}")
        try:
            yield json.loads(blob[pos : pos + length].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise IndexIntegrityError(f"unreadable record in {origin}: {exc}") from exc
        pos += length
