from __future__ import annotations

import json

import pytest

from s2s_driver.schemas import (
    ContextContractError,
    PromptSchemaError,
    read_prompt_file,
    require_no_context,
    write_prediction_file,
)

from .conftest import prompt_record, write_prompt_file


class TestReadPromptFile:
    def test_reads_valid_file(self, tmp_path):
        path = write_prompt_file(tmp_path / "p.prompts", [prompt_record(i, False) for i in range(3)])
        examples = read_prompt_file(path)
        assert len(examples) == 3
        assert examples[0].example_id == "e:000"

    def test_wrong_header_refused(self, tmp_path):
        path = tmp_path / "p.prompts"
        path.write_text("#schema=predictions/1\n", encoding="utf-8")
        with pytest.raises(PromptSchemaError, match="refusing"):
            read_prompt_file(path)

    def test_missing_field_line_numbered(self, tmp_path):
        path = tmp_path / "p.prompts"
        path.write_text(
            "#schema=prompts/1\n" + json.dumps({"example_id": "a"}) + "\n", encoding="utf-8"
        )
        with pytest.raises(PromptSchemaError, match=":2:"):
            read_prompt_file(path)

    def test_empty_file_refused(self, tmp_path):
        path = tmp_path / "p.prompts"
        path.write_text("#schema=prompts/1\n", encoding="utf-8")
        with pytest.raises(PromptSchemaError, match="no records"):
            read_prompt_file(path)


class TestContextContract:
    def test_context_record_named(self, tmp_path):
        records = [prompt_record(0, False), prompt_record(1, True), prompt_record(2, False)]
        path = write_prompt_file(tmp_path / "p.prompts", records)
        with pytest.raises(ContextContractError, match="e:001"):
            require_no_context(read_prompt_file(path))

    def test_clean_file_passes(self, tmp_path):
        path = write_prompt_file(tmp_path / "p.prompts", [prompt_record(0, False)])
        require_no_context(read_prompt_file(path))


class TestWritePredictions:
    def test_sorted_and_parseable(self, tmp_path):
        out = tmp_path / "preds.jsonl"
        write_prediction_file(
            [("b", [("x", 0.5), ("y", 0.1)]), ("a", [("z", 0.9)])],
            out,
        )
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "#schema=predictions/1"
        ids = [json.loads(line)["example_id"] for line in lines[1:]]
        assert ids == ["a", "b"]
