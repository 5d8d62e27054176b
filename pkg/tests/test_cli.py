import json

import pytest

from nal.cli import main
from conftest import TWO_IMAGE_SOURCE


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data") / "s1"
    code = main(["gen", "--mode", "shapes", "--class", "s1", "--n", "200",
                 "--seed", "0", "--out", str(root)])
    assert code == 0
    return root


@pytest.fixture(scope="module")
def model_path(dataset, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "s1.aba"
    code = main(["learn", "--data", str(dataset), "--class", "s1",
                 "--pos", "5", "--neg", "5", "--seed", "0", "--out", str(path)])
    assert code == 0
    return path


def test_gen_layout(dataset):
    assert (dataset / "scenes.jsonl").exists()
    assert (dataset / "labels.csv").exists()


def test_learn_writes_target_header(model_path):
    text = model_path.read_text()
    assert text.startswith("% target: s_1")
    assert "assumption(" in text


def test_infer(dataset, model_path, capsys):
    facts = dataset / "facts" / "img_0.facts"
    assert main(["infer", "--model", str(model_path), "--facts", str(facts)]) == 0
    assert capsys.readouterr().out.strip() in {"accepted", "rejected", "unclassifiable"}


def test_eval_report(dataset, model_path, tmp_path, capsys):
    report = tmp_path / "report.json"
    code = main(["eval", "--model", str(model_path), "--data", str(dataset),
                 "--split", "test", "--report", str(report)])
    assert code == 0
    payload = json.loads(report.read_text())
    assert "metrics" in payload
    assert report.with_suffix(".confusion.csv").exists()
    out = capsys.readouterr().out
    assert "Accuracy" in out


def test_eval_with_noise(dataset, model_path, tmp_path):
    report = tmp_path / "noisy.json"
    code = main(["eval", "--model", str(model_path), "--data", str(dataset),
                 "--split", "test", "--report", str(report),
                 "--p-attr", "0.05", "--noise-seed", "1"])
    assert code == 0


def test_solve_json(tmp_path, capsys):
    aba = tmp_path / "fw.aba"
    aba.write_text(TWO_IMAGE_SOURCE)
    lp = tmp_path / "fw.lp"
    code = main(["solve", "--aba", str(aba), "--export-lp", str(lp)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["extensions"] == [
        {"assumptions": ["alpha(img_1)"], "closure_size": 6}
    ]
    assert payload["cautious"]["c_1(img_1)"] is True
    assert "c_1(A) :- circle(A), not c_alpha(A)." in lp.read_text()


def test_explain(dataset, model_path, capsys):
    facts = dataset / "facts" / "img_0.facts"
    code = main(["explain", "--model", str(model_path), "--facts", str(facts),
                 "--atom", "s_1(img_0)"])
    assert code == 0
    assert "claim: s_1(img_0)" in capsys.readouterr().out


def test_bench_csv(dataset, tmp_path, capsys):
    out = tmp_path / "bench.csv"
    code = main(["bench", "--data", str(dataset), "--class", "s1",
                 "--counts", "3,5", "--seeds", "0", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("class,n_examples,seed,seconds,outcome")
    assert len(lines) == 3


def test_learn_from_manifest(tmp_path):
    (tmp_path / "bg.aba").write_text(
        "image(img_0). in(img_0, obj_0). square(obj_0). blue(obj_0). "
        "small(obj_0). image(img_1). in(img_1, obj_1). circle(obj_1). "
        "red(obj_1). small(obj_1)."
    )
    (tmp_path / "cmd.pl").write_text("aba_asp('bg.aba', [s_1(img_0)], [s_1(img_1)]).")
    out = tmp_path / "model.aba"
    code = main(["learn", "--manifest", str(tmp_path / "cmd.pl"), "--out", str(out)])
    assert code == 0
    assert out.exists()


def test_validation_error_exit_code(tmp_path):
    bad = tmp_path / "bad.aba"
    bad.write_text("p(a")
    assert main(["solve", "--aba", str(bad)]) == 2


def test_search_failure_exit_code(tmp_path):
    # identical facts labeled positive and negative cannot be separated
    (tmp_path / "bg.aba").write_text(
        "image(img_0). in(img_0, obj_0). square(obj_0). blue(obj_0). small(obj_0). "
        "image(img_1). in(img_1, obj_1). square(obj_1). blue(obj_1). small(obj_1)."
    )
    (tmp_path / "cmd.pl").write_text("aba_asp('bg.aba', [s_1(img_0)], [s_1(img_1)]).")
    code = main(["learn", "--manifest", str(tmp_path / "cmd.pl"),
                 "--out", str(tmp_path / "m.aba")])
    assert code == 3


def test_timeout_exit_code(dataset, tmp_path):
    code = main(["learn", "--data", str(dataset), "--class", "s1",
                 "--pos", "5", "--neg", "5", "--seed", "0",
                 "--timeout", "1e-9", "--out", str(tmp_path / "m.aba")])
    assert code == 4
