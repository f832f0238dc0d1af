"""Tests for the command-line interface."""

import json

import pytest

from app.cli import build_parser, main
from app.core.corpus import CorpusExample, Source, write_corpus
from app.core.intent import Constraint, IntentSpec


@pytest.fixture
def conflicting_file(tmp_path, annotated_selections):
    intent = IntentSpec.build(
        {"G1": 0, "G2": 0, "G3": 0, "G4": 0, "G5": 0, "G6": 0},
        [Constraint(class_id="C7", value=2), Constraint(class_id="C9", value=1)],
    )
    example = CorpusExample.from_intent(
        1, "Spread out, but stay in one place.", annotated_selections, intent, Source.SYNTHETIC
    )
    path = tmp_path / "conflicting.jsonl"
    write_corpus([example], path)
    return path


@pytest.fixture
def generated(tmp_path):
    path = tmp_path / "synthetic.jsonl"
    assert main(["gen-corpus", "--n", "12", "--seed", "4", "--out", str(path)]) == 0
    return path


class TestParser:
    """Test argument parsing."""

    def test_requires_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args([])
        assert exc.value.code == 2

    def test_rejects_zero_examples(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["gen-corpus", "--n", "0", "--out", str(tmp_path / "x.jsonl")])
        assert exc.value.code == 2

    def test_rejects_unknown_encoder(self, state_file):
        with pytest.raises(SystemExit) as exc:
            main(["encode", "--state-file", str(state_file), "--encoder", "f999"])
        assert exc.value.code == 2

    @pytest.mark.parametrize("folds", ["1", "0"])
    def test_rejects_single_fold(self, tmp_path, folds, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--corpus", str(tmp_path / "c.jsonl"), "--folds", folds])
        assert exc.value.code == 2
        assert "at least 2 folds" in capsys.readouterr().err

    def test_training_flags(self):
        args = build_parser().parse_args(
            ["train", "--corpus", "c.jsonl", "--out", "m.bin", "--alpha", "0.3", "--anneal-k", "5"]
        )
        assert args.alpha == 0.3
        assert args.anneal_k == 5.0
        assert args.task == "both"


class TestCorpusCommands:
    """Test gen-corpus and augment."""

    def test_gen_corpus(self, generated, capsys):
        lines = generated.read_text().splitlines()
        assert len(lines) == 12
        assert json.loads(lines[0])["source"] == "synthetic"

    def test_gen_corpus_deterministic(self, generated, tmp_path):
        again = tmp_path / "again.jsonl"
        main(["gen-corpus", "--n", "12", "--seed", "4", "--out", str(again)])
        assert again.read_bytes() == generated.read_bytes()

    def test_gen_corpus_summary(self, tmp_path, capsys):
        main(["gen-corpus", "--n", "3", "--maps", "2,5", "--out", str(tmp_path / "c.jsonl")])
        summary = json.loads(capsys.readouterr().out)
        assert summary["n"] == 3
        assert list(summary["constraint_histogram"]) == [f"C{i}" for i in range(1, 10)]

    def test_augment(self, generated, tmp_path, capsys):
        out = tmp_path / "augmented.jsonl"
        capsys.readouterr()
        code = main(["augment", "--corpus", str(generated), "--out", str(out), "--keep-original"])
        assert code == 0
        assert len(out.read_text().splitlines()) == 24
        assert json.loads(capsys.readouterr().out)["n_out"] == 24


class TestCheck:
    """Test the conflict checker command."""

    def test_clean(self, corpus_file, capsys):
        assert main(["check", "--example-file", str(corpus_file)]) == 0
        out = capsys.readouterr().out
        assert "example 1: clean" in out
        assert "checked 1 examples" in out

    def test_conflicts(self, conflicting_file, capsys):
        assert main(["check", "--example-file", str(conflicting_file)]) == 1
        out = capsys.readouterr().out
        assert "example 1: CONFLICTS" in out
        assert "slots [0, 1]" in out

    def test_empty_file(self, tmp_path, capsys):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert main(["check", "--example-file", str(path)]) == 0
        assert "checked 0 examples" in capsys.readouterr().out

    def test_malformed_file(self, tmp_path, capsys):
        path = tmp_path / "bad.jsonl"
        path.write_text("not json\n")
        assert main(["check", "--example-file", str(path)]) == 1
        assert "error: line 1" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["check", "--example-file", str(tmp_path / "missing.jsonl")]) == 1


class TestGameCommands:
    """Test simulate and encode."""

    def test_simulate(self, capsys):
        code = main(["simulate", "--init-id", "1", "--episodes", "3", "--policy", "heuristic", "--seed", "2"])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["wins"] + summary["losses"] + summary["draws"] == 3
        assert "rewards" not in summary

    def test_simulate_unknown_map(self, capsys):
        assert main(["simulate", "--init-id", "99", "--episodes", "1"]) == 1
        assert "99" in capsys.readouterr().err

    def test_encode(self, state_file, capsys):
        assert main(["encode", "--state-file", str(state_file), "--encoder", "f132"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 2
        assert all(len(line.split(",")) == 132 for line in lines)


class TestModelCommands:
    """Test train, eval and predict end to end on a tiny corpus."""

    @pytest.fixture
    def model_file(self, generated, tmp_path):
        path = tmp_path / "model.bin"
        log = tmp_path / "train.json"
        code = main(
            [
                "train", "--corpus", str(generated), "--out", str(path), "--log", str(log),
                "--epochs", "2", "--feature-dim", "32", "--seed", "1",
            ]
        )
        assert code == 0
        assert len(json.loads(log.read_text())["history"]) == 4
        return path

    def test_train_reproducible(self, model_file, generated, tmp_path):
        again = tmp_path / "again.bin"
        main(
            [
                "train", "--corpus", str(generated), "--out", str(again),
                "--log", str(tmp_path / "again.json"), "--epochs", "2", "--feature-dim", "32",
                "--seed", "1",
            ]
        )
        assert again.read_bytes() == model_file.read_bytes()

    def test_eval_holdout(self, model_file, generated, capsys):
        capsys.readouterr()
        assert main(["eval", "--corpus", str(generated), "--model", str(model_file)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["n_examples"] == 12
        assert "null_baseline_accuracy" in report

    def test_eval_cross_validation(self, generated, tmp_path):
        out = tmp_path / "report.json"
        code = main(
            [
                "eval", "--corpus", str(generated), "--folds", "3", "--epochs", "1",
                "--feature-dim", "32", "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert len(report["folds"]) == 3
        assert report["config"]["folds"] == 3

    def test_predict(self, model_file, capsys):
        capsys.readouterr()
        code = main(
            [
                "predict", "--model", str(model_file), "--text", "I must take Purple.",
                "--selections", '{"Purple_E": 14}', "--map-id", "1",
            ]
        )
        assert code == 0
        intent = json.loads(capsys.readouterr().out)
        assert len(intent["goals"]) == 6
        assert len(intent["constraints"]) == 8

    def test_predict_missing_model(self, tmp_path, capsys):
        code = main(
            ["predict", "--model", str(tmp_path / "none.bin"), "--text", "x", "--selections", "{}"]
        )
        assert code == 1


class TestPipeline:
    """Test that the whole command chain is reproducible from its seeds."""

    FILES = ("corpus.jsonl", "augmented.jsonl", "model.bin", "report.json")

    def _run(self, run_dir, monkeypatch):
        run_dir.mkdir()
        monkeypatch.chdir(run_dir)
        training = [
            "--corpus", "augmented.jsonl", "--epochs", "1", "--feature-dim", "32", "--seed", "2",
        ]
        steps = [
            ["gen-corpus", "--n", "10", "--seed", "6", "--out", "corpus.jsonl"],
            ["augment", "--corpus", "corpus.jsonl", "--out", "augmented.jsonl", "--seed", "6"],
            ["train", "--out", "model.bin", "--log", "train.json", *training],
            ["eval", "--folds", "2", "--out", "report.json", *training],
        ]
        for step in steps:
            assert main(step) == 0
        return {name: (run_dir / name).read_bytes() for name in self.FILES + ("train.json",)}

    def test_same_seeds_same_bytes(self, tmp_path, monkeypatch):
        first = self._run(tmp_path / "first", monkeypatch)
        second = self._run(tmp_path / "second", monkeypatch)
        for name in first:
            assert first[name] == second[name], name
        assert len(json.loads(first["report.json"])["folds"]) == 2
