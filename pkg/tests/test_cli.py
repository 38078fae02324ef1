from __future__ import annotations

import json
from pathlib import Path

import pytest
import yaml

from kinfuse.cli import main
from kinfuse.dataio import read_prompts
from kinfuse.metrics import MetricConfig, evaluate

DATA = Path(__file__).parent / "data"
PIPELINE = DATA / "pipeline"


def write_config(tmp_path: Path, **extra) -> Path:
    cfg = {
        "corpus": {"path": str(PIPELINE / "corpus"), "format": "plain_dir"},
        "dataset": {"path": str(PIPELINE / "triples.tsv"), "format": "tsv3"},
        "index": {"path": str(tmp_path / "ix"), "vocab_path": str(PIPELINE / "vocab.txt")},
        "paths": {
            "train_out": str(tmp_path / "train.prompts"),
            "eval_out": str(tmp_path / "eval.prompts"),
            "predictions_in": str(PIPELINE / "predictions.jsonl"),
            "report_out": str(tmp_path / "report.tsv"),
        },
    }
    cfg.update(extra)
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
    return path


@pytest.fixture()
def built(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["index", "--config", str(cfg)]) == 0
    assert main(["build", "--config", str(cfg)]) == 0
    return tmp_path, cfg


class TestPipeline:
    def test_end_to_end_counts_and_context_rule(self, built, capsys):
        tmp_path, cfg = built
        train = read_prompts(tmp_path / "train.prompts")
        evl = read_prompts(tmp_path / "eval.prompts")
        assert len(train) == 90
        assert len(evl) == 10
        assert all(r.context_attached for r in train)
        assert all(not r.context_attached for r in evl)
        assert all("Context:" not in r.input_text for r in evl)

    def test_build_twice_byte_identical(self, built):
        tmp_path, cfg = built
        first = (tmp_path / "train.prompts").read_bytes(), (tmp_path / "eval.prompts").read_bytes()
        assert main(["build", "--config", str(cfg)]) == 0
        second = (tmp_path / "train.prompts").read_bytes(), (tmp_path / "eval.prompts").read_bytes()
        assert first == second

    def test_evaluate_matches_module_level(self, built, capsys):
        tmp_path, cfg = built
        assert main(["evaluate", "--config", str(cfg)]) == 0
        report_cli = (tmp_path / "report.tsv").read_text(encoding="utf-8")
        report_mod = evaluate(
            PIPELINE / "predictions.jsonl", tmp_path / "eval.prompts", MetricConfig()
        )
        for k, v in report_mod.hits.items():
            assert f"hits@{k}\t{v:.3f}" in report_cli
        assert f"mrr\t{report_mod.mrr:.3f}" in report_cli
        assert f"aed\t{report_mod.aed:.3f}" in report_cli

    def test_run_manifest_counts(self, built):
        tmp_path, _ = built
        manifest = json.loads((tmp_path / "build.run.json").read_text(encoding="utf-8"))
        assert manifest["counts"]["prompts_train"] == 90
        assert manifest["counts"]["prompts_eval"] == 10
        assert manifest["counts"]["examples"] == 100
        train = read_prompts(tmp_path / "train.prompts")
        assert manifest["counts"]["train_with_context"] == sum(
            1 for r in train if r.context_attached
        )
        assert manifest["config_sha256"]
        assert manifest["tool_version"]

    def test_index_manifest_counts(self, built):
        tmp_path, _ = built
        manifest = json.loads((tmp_path / "index.run.json").read_text(encoding="utf-8"))
        assert manifest["counts"]["documents"] == 5
        assert manifest["counts"]["units"] == 300


class TestAlignedFlow:
    def test_aligned_file_serves_as_corpus_and_dataset(self, tmp_path):
        aligned = tmp_path / "kelm.tsv"
        rows = [
            ("Mira Stonefell", "founded", "Elmgate Institute"),
            ("Teodor Vexley", "advised", "Mira Stonefell"),
            ("Anika Ferris", "hired", "Teodor Vexley"),
            ("Orla Kestrel", "funded", "Anika Ferris"),
            ("Sumi Halloway", "mentored", "Orla Kestrel"),
        ]
        aligned.write_text(
            "".join(f"{h}\t{r}\t{t}\tIt is known that {h} {r} {t}.\n" for h, r, t in rows),
            encoding="utf-8",
        )
        cfg = write_config(
            tmp_path,
            corpus={"path": str(aligned), "format": "aligned_triples"},
            dataset={"path": str(aligned), "format": "tsv4_aligned"},
            index={"path": str(tmp_path / "ix")},
            split={"train_fraction": 0.8, "seed": 1},
        )
        assert main(["index", "--config", str(cfg)]) == 0
        assert main(["build", "--config", str(cfg)]) == 0
        train = read_prompts(tmp_path / "train.prompts")
        evl = read_prompts(tmp_path / "eval.prompts")
        assert len(train) == 4 and len(evl) == 1
        # every aligned sentence is in the index verbatim, so context is found
        assert all(r.context_attached for r in train)
        manifest = json.loads((tmp_path / "index.run.json").read_text(encoding="utf-8"))
        assert manifest["counts"]["units"] == 5


class TestQAFlow:
    def test_qa_build(self, tmp_path):
        cfg = write_config(
            tmp_path,
            dataset={"path": str(PIPELINE / "qa.tsv"), "format": "qa_tsv"},
            prompts={"template_id": "qa-v1", "task": "qa", "mask": "none", "seed": 0},
        )
        assert main(["index", "--config", str(cfg)]) == 0
        assert main(["build", "--config", str(cfg)]) == 0
        train = read_prompts(tmp_path / "train.prompts")
        evl = read_prompts(tmp_path / "eval.prompts")
        assert len(train) == 9 and len(evl) == 1
        assert all(r.task == "qa" and r.mask_target == "none" for r in train + evl)
        # every question names an indexed org or person, so context is found
        assert all(r.context_attached for r in train)
        assert all(not r.context_attached for r in evl)


class TestOverridesAndErrors:
    def test_set_override_changes_split(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["index", "--config", str(cfg)]) == 0
        assert main(["build", "--config", str(cfg), "--set", "split.train_fraction=0.8"]) == 0
        assert len(read_prompts(tmp_path / "train.prompts")) == 80

    def test_missing_config(self, tmp_path, capsys):
        assert main(["build", "--config", str(tmp_path / "none.yaml")]) == 1
        assert "not found" in capsys.readouterr().err

    def test_unknown_section_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, bogus={"x": 1})
        assert main(["index", "--config", str(cfg)]) == 1
        assert "bogus" in capsys.readouterr().err

    def test_evaluate_before_build_fails(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["evaluate", "--config", str(cfg)]) == 1

    def test_inspect(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["index", "--config", str(cfg)]) == 0
        head = (PIPELINE / "triples.tsv").read_text(encoding="utf-8").split("\t", 1)[0]
        assert main(["inspect", str(tmp_path / "ix"), head]) == 0
        out = capsys.readouterr().out
        assert "mention(s)" in out

    def test_inspect_unknown_entity(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["index", "--config", str(cfg)]) == 0
        assert main(["inspect", str(tmp_path / "ix"), "zz unseen zz"]) == 0
        assert "no postings" in capsys.readouterr().out
