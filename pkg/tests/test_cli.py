import json

import pytest

from claimcheck.cli import main
from claimcheck.datagen import read_dataset
from claimcheck.service import Condition, Judgment, Session
from claimcheck.transforms import Label
from conftest import synthetic_corpus


@pytest.fixture
def corpus_file(tmp_path):
    docs = synthetic_corpus(15, seed=4)
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(
        json.dumps({"id": d.id, "text": d.text}, ensure_ascii=False)
        for d in docs) + "\n")
    return str(path)


def run(capsys, *argv):
    main(list(argv))
    return capsys.readouterr().out


class TestGenerate:
    def test_writes_dataset_and_manifest(self, corpus_file, tmp_path, capsys):
        out = str(tmp_path / "data.jsonl")
        text = run(capsys, "generate", "--corpus", corpus_file, "--out", out,
                   "--seed", "11")
        assert "wrote" in text
        examples = read_dataset(out)
        assert examples
        manifest = json.loads((tmp_path / "data.jsonl.manifest.json").read_text())
        assert manifest["example_count"] == len(examples)

    def test_rerun_identical(self, corpus_file, tmp_path, capsys):
        a, b = str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl")
        run(capsys, "generate", "--corpus", corpus_file, "--out", a, "--seed", "3")
        run(capsys, "generate", "--corpus", corpus_file, "--out", b, "--seed", "3")
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    def test_balance_flag(self, corpus_file, tmp_path, capsys):
        out = str(tmp_path / "data.jsonl")
        run(capsys, "generate", "--corpus", corpus_file, "--out", out,
            "--balance", "0.5")
        examples = read_dataset(out)
        neg = sum(1 for e in examples if e.label == Label.INCONSISTENT)
        assert abs(neg / len(examples) - 0.5) <= 0.05

    def test_transform_subset(self, corpus_file, tmp_path, capsys):
        out = str(tmp_path / "data.jsonl")
        run(capsys, "generate", "--corpus", corpus_file, "--out", out,
            "--transforms", "identity,negation")
        kinds = {e.transform.value for e in read_dataset(out)}
        assert kinds <= {"identity", "negation"}


class TestEvaluate:
    def _dataset(self, corpus_file, tmp_path, capsys):
        out = str(tmp_path / "data.jsonl")
        run(capsys, "generate", "--corpus", corpus_file, "--out", out,
            "--noise-p", "0")
        return out

    def test_scorer_report(self, corpus_file, tmp_path, capsys):
        data = self._dataset(corpus_file, tmp_path, capsys)
        report = json.loads(run(capsys, "evaluate", "--data", data,
                                "--scorer", "overlap"))
        assert 0.0 <= report["balanced_accuracy"] <= 1.0
        assert report["positive_class"] == "INCONSISTENT"

    def test_external_predictions(self, corpus_file, tmp_path, capsys):
        data = self._dataset(corpus_file, tmp_path, capsys)
        examples = read_dataset(data)
        pred = tmp_path / "preds.jsonl"
        pred.write_text("\n".join(json.dumps({
            "id": e.id,
            "p_consistent": 0.9 if e.label == Label.CONSISTENT else 0.1,
            "support_span": None, "error_span": None,
        }) for e in examples) + "\n")
        report = json.loads(run(capsys, "evaluate", "--data", data,
                                "--pred", str(pred)))
        assert report["balanced_accuracy"] == 1.0
        assert report["unmatched_predictions"] == 0

    def test_unknown_scorer(self, corpus_file, tmp_path, capsys):
        data = self._dataset(corpus_file, tmp_path, capsys)
        with pytest.raises(SystemExit):
            run(capsys, "evaluate", "--data", data, "--scorer", "bogus")


class TestRank:
    def test_overlap_scorer(self, tmp_path, capsys):
        pairs = tmp_path / "pairs.jsonl"
        rows = [{"article_sent": "Alice visited Paris today.",
                 "claim_pos": "Alice visited Paris today.",
                 "claim_neg": "Completely unrelated words here."}] * 4
        pairs.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        report = json.loads(run(capsys, "rank", "--pairs", str(pairs)))
        assert report["ranking_accuracy"] == 1.0
        assert report["pairs"] == 4


class TestTrainBaseline:
    def test_train_then_evaluate(self, corpus_file, tmp_path, capsys):
        data = str(tmp_path / "data.jsonl")
        run(capsys, "generate", "--corpus", corpus_file, "--out", data,
            "--balance", "0.5")
        model = str(tmp_path / "model.json")
        text = run(capsys, "train-baseline", "--data", data, "--out", model,
                   "--epochs", "100")
        assert "saved to" in text
        report = json.loads(run(capsys, "evaluate", "--data", data,
                                "--scorer", f"baseline:{model}"))
        assert report["balanced_accuracy"] >= 0.6


class TestReport:
    def test_report_recovers_data_path_from_log(self, corpus_file, tmp_path, capsys):
        data = str(tmp_path / "data.jsonl")
        run(capsys, "generate", "--corpus", corpus_file, "--out", data)
        examples = read_dataset(data)[:3]
        log = str(tmp_path / "log.jsonl")
        session = Session("default", examples, n_target=1,
                          highlights_policy="on", log_path=log, data_path=data)
        for e in examples:
            session.submit(Judgment(example_id=e.id, worker_id="w1",
                                    label=Label.CONSISTENT,
                                    condition=Condition.HIGHLIGHTS_ON,
                                    elapsed_ms=1200))
        report = json.loads(run(capsys, "report", "--log", log))
        assert report["judgment_count"] == 3

    def test_report_without_data_path(self, tmp_path):
        log = tmp_path / "log.jsonl"
        log.write_text(json.dumps({"type": "session", "session_id": "default",
                                   "n_target": 3, "highlights_policy": "ab",
                                   "data_path": None}) + "\n")
        with pytest.raises(SystemExit, match="--data"):
            main(["report", "--log", str(log)])
