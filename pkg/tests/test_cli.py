import json
import time

import numpy as np
import pytest

from sme import cli
from sme.modelfile import load_model

from conftest import two_group_records, write_triples


@pytest.fixture
def toy_files(tmp_path):
    tsv = write_triples(tmp_path / "toy.tsv", two_group_records())
    manifest = tmp_path / "toy.json"
    manifest.write_text(json.dumps(
        {"name": "toy", "triples": "toy.tsv", "folds": 4, "seed": 0}))
    return tmp_path, manifest, tsv


def run(argv):
    return cli.main(argv)


class TestInspect:
    def test_toy_counts(self, toy_files, capsys):
        _, manifest, _ = toy_files
        assert run(["inspect", "--dataset", str(manifest)]) == 0
        out = capsys.readouterr().out.strip()
        assert out.startswith("entities=12 relations=2 records=288 valid=")

    def test_percent_formatting(self, tmp_path, capsys):
        # 22.9% positives, like the most positive-heavy benchmark
        records = [(f"e{i}", "r", f"e{(i+1) % 1000}", 1 if i < 229 else 0)
                   for i in range(1000)]
        path = write_triples(tmp_path / "p.tsv", records)
        assert run(["inspect", "--dataset", str(path)]) == 0
        assert "valid=22.9%" in capsys.readouterr().out

    def test_empty_file_is_integrity_error(self, tmp_path, capsys):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        assert run(["inspect", "--dataset", str(path)]) == 3

    def test_missing_file_is_usage_error(self, tmp_path):
        assert run(["inspect", "--dataset", str(tmp_path / "nope.tsv")]) == 2


class TestTrain:
    def test_writes_model_and_trace(self, toy_files, capsys, monkeypatch):
        monkeypatch.setenv("SME_LOG", "info")
        tmp_path, manifest, _ = toy_files
        out = tmp_path / "model.sme"
        code = run(["train", "--dataset", str(manifest), "--fold", "0",
                    "--form", "bilinear", "--dim-d", "4", "--dim-p", "4",
                    "--epochs", "3", "--out", str(out)])
        assert code == 0
        assert out.exists()
        stdout = capsys.readouterr().out
        assert "epoch=0 loss=" in stdout
        model = load_model(out)
        assert model.form == "bilinear"

    def test_bitwise_deterministic(self, toy_files, monkeypatch):
        monkeypatch.setenv("SME_LOG", "quiet")
        tmp_path, manifest, _ = toy_files
        out1, out2 = tmp_path / "m1.sme", tmp_path / "m2.sme"
        args = ["train", "--dataset", str(manifest), "--fold", "1",
                "--form", "linear", "--dim-d", "4", "--dim-p", "4",
                "--epochs", "4", "--seed", "11"]
        assert run(args + ["--out", str(out1)]) == 0
        assert run(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_manifest_usage_exit(self, tmp_path):
        assert run(["train", "--dataset", str(tmp_path / "missing.json")]) == 2

    def test_no_arguments_usage_exit(self):
        assert run([]) == 2


class TestEval:
    def test_report_files(self, toy_files, capsys, monkeypatch):
        monkeypatch.setenv("SME_LOG", "quiet")
        tmp_path, manifest, _ = toy_files
        prefix = tmp_path / "report"
        code = run(["eval", "--dataset", str(manifest), "--form", "linear",
                    "--dim-d", "4", "--dim-p", "4", "--epochs", "2",
                    "--folds", "2", "--out", str(prefix)])
        assert code == 0
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload["dataset"] == "toy"
        assert len(payload["per_fold_auc"]) == 2
        summary = capsys.readouterr().out
        assert f"mean={payload['mean']:.6f}" in summary
        assert f"mean={payload['mean']:.6f}" in (tmp_path / "report.txt").read_text()


class TestScore:
    @pytest.fixture
    def trained_model(self, toy_files, monkeypatch):
        monkeypatch.setenv("SME_LOG", "quiet")
        tmp_path, manifest, _ = toy_files
        out = tmp_path / "model.sme"
        run(["train", "--dataset", str(manifest), "--epochs", "3",
             "--dim-d", "4", "--dim-p", "4", "--out", str(out)])
        return out

    def test_scores_printed(self, trained_model, capsys):
        code = run(["score", "--model", str(trained_model), "e0\tsame\te1"])
        assert code == 0
        out = capsys.readouterr().out.strip()
        fields = out.split("\t")
        assert fields[:3] == ["e0", "same", "e1"]
        float(fields[3])

    def test_purity(self, trained_model, capsys):
        run(["score", "--model", str(trained_model), "e0\tsame\te1"])
        first = capsys.readouterr().out
        run(["score", "--model", str(trained_model), "e0\tsame\te1"])
        assert capsys.readouterr().out == first

    def test_unknown_symbol(self, trained_model, capsys):
        code = run(["score", "--model", str(trained_model), "e0\tsame\tunknown_guy"])
        assert code == 3
        assert "out-of-dictionary" in capsys.readouterr().err

    def test_malformed_triple(self, trained_model):
        assert run(["score", "--model", str(trained_model), "just-one-field"]) == 2


class TestCanonicalSmoke:
    def test_nations_two_fold_under_a_minute(self, tmp_path, monkeypatch):
        from conftest import require_canonical
        monkeypatch.setenv("SME_LOG", "quiet")
        path = require_canonical("nations")
        t0 = time.perf_counter()
        code = run(["eval", "--dataset", str(path), "--form", "bilinear",
                    "--folds", "2", "--seed", "0",
                    "--out", str(tmp_path / "nations_report")])
        secs = time.perf_counter() - t0
        assert code == 0
        assert secs < 60.0

    def test_umls_positives_outscore_corruptions(self):
        from conftest import load_canonical
        from sme.dataset import make_folds, positives_of
        from sme.evaluator import run_fold
        from sme.model import energies_batch
        from sme.trainer import TrainConfig, _corrupt_batch

        d, ts = load_canonical("umls")
        split = make_folds(ts, 10, seed=0)
        model, _, _ = run_fold(d, split, 0, "bilinear", 10, 10, TrainConfig())
        train_ts, _, _ = split.fold_sets(0)
        pos = positives_of(train_ts)
        rng = np.random.default_rng(0)
        take = rng.choice(len(pos), size=200, replace=False)
        lhs, rel, rhs = pos.lhs[take], pos.rel[take], pos.rhs[take]
        c_lhs, c_rel, c_rhs = _corrupt_batch(lhs, rel, rhs, "both", rng,
                                             d.entity_id_array())
        s_pos = -energies_batch(model.emb, model.params, lhs, rel, rhs)
        s_neg = -energies_batch(model.emb, model.params, c_lhs, c_rel, c_rhs)
        assert (s_pos > s_neg).mean() >= 0.90
