from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinfuse.corpus import (
    Document,
    Segmenter,
    load_corpus,
    normalize,
    segment,
    token_spans,
)
from kinfuse.errors import CorpusFormatError, PipelineError


class TestNormalize:
    def test_possessive_and_spacing(self):
        assert normalize("Barack Obama's aunt") == ["barack", "obama", "s", "aunt"]

    def test_empty(self):
        assert normalize("") == []

    def test_punctuation_split_and_drop(self):
        assert normalize("Re-TACRED (2021)") == ["re", "tacred", "2021"]

    def test_case_invariance(self):
        assert normalize("BARACK obama") == normalize("Barack Obama")

    @given(st.text(max_size=80))
    @settings(max_examples=300, deadline=None)
    def test_idempotent_on_joined_output(self, text):
        once = normalize(text)
        assert normalize(" ".join(once)) == once


class TestSegment:
    def test_two_sentences_one_paragraph(self):
        units = segment(Document("d", None, "A b. C d.", "mem"))
        assert [(u.para_idx, u.sent_idx) for u in units] == [(0, 0), (0, 1)]
        assert [u.text for u in units] == ["A b.", "C d."]

    def test_blank_line_starts_new_paragraph(self):
        units = segment(Document("d", None, "A b.\n\nC d.", "mem"))
        assert [(u.para_idx, u.sent_idx) for u in units] == [(0, 0), (1, 0)]

    def test_abbreviation_suppresses_split(self):
        units = segment(Document("d", None, "Dr. Smith arrived.", "mem"))
        assert [u.text for u in units] == ["Dr. Smith arrived."]

    def test_gold_segmentation_fixture(self):
        # hand-segmented reference for a small mixed document
        body = (
            "Prof. Lee viewed the data. The result was clear!\n"
            "Was it final? Mr. Ito said no.\n"
            "\n"
            "A new case opened. It closed fast.\n"
        )
        expected = [
            (0, 0, "Prof. Lee viewed the data."),
            (0, 1, "The result was clear!"),
            (0, 2, "Was it final?"),
            (0, 3, "Mr. Ito said no."),
            (1, 0, "A new case opened."),
            (1, 1, "It closed fast."),
        ]
        units = segment(Document("d", None, body, "mem"))
        assert [(u.para_idx, u.sent_idx, u.text) for u in units] == expected

    def test_spans_match_body_slice_and_do_not_overlap(self):
        body = "One two. Three four!\n\nFive six? Seven."
        doc = Document("d", None, body, "mem")
        units = segment(doc)
        prev_end = 0
        for u in units:
            start, end = u.char_span
            assert body[start:end] == u.text
            assert start >= prev_end
            assert end <= len(body)
            prev_end = end

    def test_whitespace_only_document(self):
        assert segment(Document("d", None, "  \n \n ", "mem")) == []

    def test_lowercase_after_terminal_does_not_split(self):
        units = segment(Document("d", None, "He got a B.A. in math.", "mem"))
        assert len(units) == 1

    def test_custom_stoplist(self):
        seg = Segmenter(abbreviations=frozenset({"zzz"}))
        units = seg.segment(Document("d", None, "See zzz. Then go.", "mem"))
        assert len(units) == 1
        units = seg.segment(Document("d", None, "See xyz. Then go.", "mem"))
        assert len(units) == 2

    def test_deterministic(self):
        doc = Document("d", None, "A b. C d.\n\nE f.", "mem")
        assert segment(doc) == segment(doc)


class TestTokenSpans:
    def test_spans_align_with_normalize(self):
        text = "Barack Obama visited New York."
        spans = token_spans(text)
        assert len(spans) == len(normalize(text))
        assert [text[a:b].lower() for a, b in spans] == normalize(text)


class TestLoadCorpus:
    def test_plain_dir_ids_in_path_order(self, tmp_path):
        for name, body in [("b.txt", "Bravo."), ("a.txt", "Alpha."), ("c.txt", "Charlie.")]:
            (tmp_path / name).write_text(body, encoding="utf-8")
        docs = list(load_corpus(tmp_path, "plain_dir"))
        assert [d.doc_id for d in docs] == ["f0", "f1", "f2"]
        assert [d.body for d in docs] == ["Alpha.", "Bravo.", "Charlie."]

    def test_plain_dir_empty(self, tmp_path):
        assert list(load_corpus(tmp_path, "plain_dir")) == []

    def test_aligned_triples_body_is_sentence(self, tmp_path):
        path = tmp_path / "kelm.tsv"
        path.write_text(
            "A\tspouse\tB\tA is married to B.\nC\tcapital\tD\tC is the capital of D.\n",
            encoding="utf-8",
        )
        docs = list(load_corpus(path, "aligned_triples"))
        assert len(docs) == 2
        assert docs[0].body == "A is married to B."
        assert docs[0].doc_id == "kelm:0"
        assert docs[1].doc_id == "kelm:1"

    def test_aligned_triples_malformed_line_number(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("A\tspouse\tB\tok sentence\nA\tonly-two\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError) as err:
            list(load_corpus(path, "aligned_triples"))
        assert err.value.line_no == 2

    def test_jsonl_docs(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text(
            '{"id": "x1", "title": "T", "text": "Hello there."}\n'
            '{"id": "x2", "text": "Second doc."}\n',
            encoding="utf-8",
        )
        docs = list(load_corpus(path, "jsonl_docs"))
        assert [d.doc_id for d in docs] == ["x1", "x2"]
        assert docs[0].title == "T"

    def test_jsonl_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text('{"id": "x", "text": "a"}\n{"id": "x", "text": "b"}\n', encoding="utf-8")
        with pytest.raises(CorpusFormatError):
            list(load_corpus(path, "jsonl_docs"))

    def test_missing_path(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            list(load_corpus(tmp_path / "nope", "plain_dir"))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(PipelineError):
            list(load_corpus(tmp_path, "parquet"))

    def test_load_and_segment_deterministic(self, tmp_path):
        (tmp_path / "a.txt").write_text("One two. Three four.\n\nFive six.", encoding="utf-8")
        run1 = [segment(d) for d in load_corpus(tmp_path, "plain_dir")]
        run2 = [segment(d) for d in load_corpus(tmp_path, "plain_dir")]
        assert run1 == run2
