"""Corpus loading, sentence/paragraph segmentation, and token normalization.

Documents come from plain-text directories, aligned triple/sentence TSV files,
or JSONL collections. Each document is segmented into sentence units carrying
paragraph/sentence indices, character spans into the original body, and the
normalized token sequence used by the index and the retrieval token budget.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import CorpusFormatError, PipelineError

# Word runs: unicode alphanumerics, underscore excluded. Punctuation and
# whitespace are boundaries and are dropped.
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

_SENT_TERMINALS = ".!?"

# Suppresses sentence splits after common abbreviations ("Dr. Smith").
# Compared against the lowercased word preceding the terminal period.
DEFAULT_ABBREVIATIONS = frozenset(
    {
        "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "vs", "etc",
        "fig", "al", "inc", "ltd", "co", "corp", "dept", "est", "approx",
    }
)

CORPUS_FORMATS = ("plain_dir", "aligned_triples", "jsonl_docs")


@dataclass(frozen=True)
class Document:
    """One raw corpus document."""

    doc_id: str
    title: str | None
    body: str
    source_path: str


@dataclass(frozen=True)
class SentenceUnit:
    """One segmented context unit: the retrieval atom.

    ``char_span`` addresses the originating document body, so
    ``body[char_span[0]:char_span[1]] == text`` always holds.
    """

    doc_id: str
    para_idx: int
    sent_idx: int
    text: str
    norm_tokens: tuple[str, ...]
    char_span: tuple[int, int]

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.doc_id, self.para_idx, self.sent_idx)


def normalize(raw: str) -> list[str]:
    """Normalize text to the token sequence used for matching and budgets.

    NFC composition, then lowercase, then split on whitespace/punctuation
    boundaries with punctuation dropped. Lowercasing happens before the
    split so the result is idempotent under join-and-renormalize.
    """
    return _WORD_RE.findall(unicodedata.normalize("NFC", raw).lower())


def token_spans(text: str) -> list[tuple[int, int]]:
    """Character spans of word runs in ``text`` (no case folding).

    Aligns with ``normalize(text)`` except for rare case-folding expansions;
    callers must check the lengths agree before zipping.
    """
    return [(m.start(), m.end()) for m in _WORD_RE.finditer(text)]


def load_corpus(path: str | Path, fmt: str) -> Iterator[Document]:
    """Yield every document of a corpus exactly once, deterministically.

    doc_ids derive from file order / record ordinals, not content, so
    re-ingesting an edited file keeps identities stable.
    """
    path = Path(path)
    if fmt not in CORPUS_FORMATS:
        raise PipelineError(f"unknown corpus format {fmt!r}; expected one of {CORPUS_FORMATS}")
    if not path.exists():
        raise FileNotFoundError(f"corpus path does not exist: {path}")
    if fmt == "plain_dir":
        yield from _load_plain_dir(path)
    elif fmt == "aligned_triples":
        yield from _load_aligned_triples(path)
    else:
        yield from _load_jsonl_docs(path)


def _load_plain_dir(path: Path) -> Iterator[Document]:
    if not path.is_dir():
        raise FileNotFoundError(f"plain_dir corpus must be a directory: {path}")
    files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix == ".txt")
    for i, fp in enumerate(files):
        body = fp.read_text(encoding="utf-8")
        if not body:
            raise CorpusFormatError(fp, 1, "empty document body")
        yield Document(doc_id=f"f{i}", title=fp.stem, body=body, source_path=str(fp))


def _load_aligned_triples(path: Path) -> Iterator[Document]:
    stem = path.stem
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise CorpusFormatError(
                    path, line_no, f"expected 4 tab-separated fields, got {len(parts)}"
                )
            sentence = parts[3]
            if not sentence.strip():
                raise CorpusFormatError(path, line_no, "empty aligned sentence")
            yield Document(
                doc_id=f"{stem}:{line_no - 1}",
                title=None,
                body=sentence,
                source_path=str(path),
            )


def _load_jsonl_docs(path: Path) -> Iterator[Document]:
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(path, line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
                raise CorpusFormatError(path, line_no, 'record must have "id" and "text"')
            doc_id = str(rec["id"])
            if doc_id in seen:
                raise CorpusFormatError(path, line_no, f"duplicate doc id {doc_id!r}")
            seen.add(doc_id)
            if not str(rec["text"]):
                raise CorpusFormatError(path, line_no, "empty text field")
            yield Document(
                doc_id=doc_id,
                title=rec.get("title"),
                body=str(rec["text"]),
                source_path=str(path),
            )


@dataclass
class Segmenter:
    """Rule-based splitter: paragraphs at blank lines, sentences at
    terminal punctuation followed by whitespace and an uppercase letter
    (or end of paragraph), with an abbreviation stop-list."""

    abbreviations: frozenset[str] = field(default_factory=lambda: DEFAULT_ABBREVIATIONS)

    def segment(self, doc: Document) -> list[SentenceUnit]:
        units: list[SentenceUnit] = []
        for para_idx, (p_start, p_end) in enumerate(_paragraph_spans(doc.body)):
            sent_idx = 0
            for s_start, s_end in self._sentence_spans(doc.body, p_start, p_end):
                text = doc.body[s_start:s_end]
                tokens = normalize(text)
                if not tokens:
                    continue
                units.append(
                    SentenceUnit(
                        doc_id=doc.doc_id,
                        para_idx=para_idx,
                        sent_idx=sent_idx,
                        text=text,
                        norm_tokens=tuple(tokens),
                        char_span=(s_start, s_end),
                    )
                )
                sent_idx += 1
        return units

    def _sentence_spans(self, body: str, start: int, end: int) -> list[tuple[int, int]]:
        spans: list[tuple[int, int]] = []
        sent_start = start
        i = start
        while i < end:
            ch = body[i]
            if ch in _SENT_TERMINALS:
                # absorb runs of terminal punctuation ("?!", "...")
                j = i
                while j + 1 < end and body[j + 1] in _SENT_TERMINALS:
                    j += 1
                if self._is_boundary(body, i, j, end):
                    spans.append((sent_start, j + 1))
                    i = j + 1
                    while i < end and body[i].isspace():
                        i += 1
                    sent_start = i
                    continue
                i = j + 1
            else:
                i += 1
        if sent_start < end:
            spans.append((sent_start, end))
        return [_trim(body, a, b) for a, b in spans if body[a:b].strip()]

    def _is_boundary(self, body: str, term_pos: int, run_end: int, para_end: int) -> bool:
        if body[term_pos] == "." and self._preceding_word(body, term_pos).lower() in self.abbreviations:
            return False
        k = run_end + 1
        if k >= para_end:
            return True
        if not body[k].isspace():
            return False
        while k < para_end and body[k].isspace():
            k += 1
        return k < para_end and body[k].isupper()

    @staticmethod
    def _preceding_word(body: str, pos: int) -> str:
        j = pos
        while j > 0 and (body[j - 1].isalnum() or body[j - 1] == "_"):
            j -= 1
        return body[j:pos]


def _paragraph_spans(body: str) -> list[tuple[int, int]]:
    """Maximal runs of non-blank lines, as (start, end) offsets into body."""
    spans: list[tuple[int, int]] = []
    offset = 0
    cur_start: int | None = None
    cur_end = 0
    for line in body.splitlines(keepends=True):
        stripped = line.strip()
        if stripped:
            if cur_start is None:
                cur_start = offset
            cur_end = offset + len(line)
        else:
            if cur_start is not None:
                spans.append((cur_start, cur_end))
                cur_start = None
        offset += len(line)
    if cur_start is not None:
        spans.append((cur_start, cur_end))
    return [_trim(body, a, b) for a, b in spans]


def _trim(body: str, start: int, end: int) -> tuple[int, int]:
    while start < end and body[start].isspace():
        start += 1
    while end > start and body[end - 1].isspace():
        end -= 1
    return (start, end)


def segment(doc: Document, abbreviations: frozenset[str] | None = None) -> list[SentenceUnit]:
    """Segment one document into ordered, non-overlapping sentence units."""
    seg = Segmenter() if abbreviations is None else Segmenter(abbreviations)
    return seg.segment(doc)


def verbatim_unit(doc: Document) -> SentenceUnit | None:
    """Wrap a whole document body as a single unit, without re-segmenting.

    Used for aligned triple/sentence corpora, where each record is already
    one curated sentence. Returns None when the body has no tokens.
    """
    start, end = _trim(doc.body, 0, len(doc.body))
    text = doc.body[start:end]
    tokens = normalize(text)
    if not tokens:
        return None
    return SentenceUnit(
        doc_id=doc.doc_id,
        para_idx=0,
        sent_idx=0,
        text=text,
        norm_tokens=tuple(tokens),
        char_span=(start, end),
    )
