"""CLI tests: artifact contracts, exit codes, determinism, and output
formats, run in-process through main()."""

import json
import os

import pytest

from fusetext.cli import main
from fusetext.synth import generate_overfit_corpus, write_bundle

FAST_TRAIN = {
    "train": {"epochs": 2, "batch_size": 8},
    "lda": {"topics": 2, "iterations": 30, "infer_iterations": 10},
}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    bundle = generate_overfit_corpus(n_examples=24, seed=4)
    paths = write_bundle(bundle, str(root / "data"), extra_config=FAST_TRAIN)
    return root, paths


@pytest.fixture(scope="module")
def trained(workspace):
    root, paths = workspace
    out = str(root / "run1")
    code = main(["train", "--config", paths["config"], "--data", paths["dataset"], "--out", out])
    assert code == 0
    return root, paths, out


class TestTrain:
    def test_artifacts_and_history_rows(self, trained):
        _, _, out = trained
        ckpt = os.path.join(out, "model.ckpt.json")
        history = os.path.join(out, "history.csv")
        assert os.path.exists(ckpt) and os.path.exists(history)
        lines = open(history).read().strip().split("\n")
        assert lines[0].startswith("epoch,train_loss,lambda1,lambda2")
        assert len(lines) == 1 + 2  # header + one row per epoch

    def test_identical_invocation_is_byte_identical(self, trained):
        root, paths, out = trained
        out2 = str(root / "run2")
        code = main(["train", "--config", paths["config"], "--data", paths["dataset"], "--out", out2])
        assert code == 0
        h1 = open(os.path.join(out, "history.csv"), "rb").read()
        h2 = open(os.path.join(out2, "history.csv"), "rb").read()
        assert h1 == h2
        c1 = open(os.path.join(out, "model.ckpt.json"), "rb").read()
        c2 = open(os.path.join(out2, "model.ckpt.json"), "rb").read()
        assert c1 == c2

    def test_missing_dataset_exits_2(self, workspace, capsys):
        root, paths = workspace
        code = main(["train", "--config", paths["config"], "--data", "/no/such/file.csv",
                     "--out", str(root / "x")])
        assert code == 2
        assert "/no/such/file.csv" in capsys.readouterr().err

    def test_no_partial_artifacts_on_failure(self, workspace):
        root, paths = workspace
        out = str(root / "failed_run")
        code = main(["train", "--config", paths["config"], "--data", "/no/such/file.csv", "--out", out])
        assert code == 2
        assert not os.path.exists(os.path.join(out, "model.ckpt.json"))
        assert not os.path.exists(os.path.join(out, "history.csv"))

    def test_seed_env_override_changes_result(self, workspace, monkeypatch):
        root, paths = workspace
        out_a = str(root / "env_a")
        monkeypatch.setenv("FUSETEXT_SEED", "123")
        assert main(["train", "--config", paths["config"], "--data", paths["dataset"], "--out", out_a]) == 0
        out_b = str(root / "env_b")
        monkeypatch.setenv("FUSETEXT_SEED", "123")
        assert main(["train", "--config", paths["config"], "--data", paths["dataset"], "--out", out_b]) == 0
        monkeypatch.delenv("FUSETEXT_SEED")
        h_a = open(os.path.join(out_a, "history.csv"), "rb").read()
        h_b = open(os.path.join(out_b, "history.csv"), "rb").read()
        assert h_a == h_b

    def test_usage_error_exits_1(self, capsys):
        assert main(["train", "--config"]) == 1
        assert main([]) == 1


class TestEvaluate:
    def test_json_report_keys(self, trained, capsys):
        _, paths, out = trained
        ckpt = os.path.join(out, "model.ckpt.json")
        code = main(["evaluate", "--model", ckpt, "--data", paths["dataset"], "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert {"accuracy", "precision", "recall", "f1"} <= set(doc)

    def test_baseline_table_has_two_model_rows(self, trained, capsys):
        _, paths, out = trained
        ckpt = os.path.join(out, "model.ckpt.json")
        code = main(["evaluate", "--model", ckpt, "--data", paths["dataset"], "--baseline"])
        assert code == 0
        text = capsys.readouterr().out
        rows = [l for l in text.splitlines() if l.startswith(("fusion ", "tfidf_logreg "))]
        assert len(rows) == 2

    def test_baseline_json(self, trained, capsys):
        _, paths, out = trained
        ckpt = os.path.join(out, "model.ckpt.json")
        code = main(["evaluate", "--model", ckpt, "--data", paths["dataset"], "--baseline", "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"fusion", "tfidf_logreg"}
        assert "accuracy" in doc["fusion"]

    def test_corrupt_checkpoint_exits_2(self, workspace, capsys):
        root, paths = workspace
        bad = str(root / "bad.ckpt.json")
        open(bad, "w").write("{broken")
        assert main(["evaluate", "--model", bad, "--data", paths["dataset"]]) == 2


class TestPredict:
    def test_distribution_parses_and_sums_to_one(self, trained, capsys):
        _, paths, out = trained
        ckpt = os.path.join(out, "model.ckpt.json")
        code = main(["predict", "--model", ckpt, "--text", "you boomer elder granny"])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0].startswith("predicted_class: ")
        assert lines[1].startswith("y_binary: ")
        probs = [float(l.split(": ")[1]) for l in lines if l.startswith("y_final[")]
        assert len(probs) == 4
        assert abs(sum(probs) - 1.0) <= 1e-6

    def test_same_text_twice_identical(self, trained, capsys):
        _, paths, out = trained
        ckpt = os.path.join(out, "model.ckpt.json")
        assert main(["predict", "--model", ckpt, "--text", "church pray holy"]) == 0
        first = capsys.readouterr().out
        assert main(["predict", "--model", ckpt, "--text", "church pray holy"]) == 0
        assert capsys.readouterr().out == first

    def test_whitespace_text_exits_2(self, trained, capsys):
        _, paths, out = trained
        ckpt = os.path.join(out, "model.ckpt.json")
        assert main(["predict", "--model", ckpt, "--text", "   "]) == 2
