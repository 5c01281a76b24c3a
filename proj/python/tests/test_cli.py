import json

import pytest

SUBCOMMANDS = ["run", "ablate", "kappa", "synth", "inspect"]


def write_labels(path, labels):
    path.write_text("id\tlabel\n" + "".join(f"s{i}\t{label}\n" for i, label in enumerate(labels)))
    return path


def error_of(proc):
    return json.loads(proc.stderr)["error"]


def test_run_happy_path(cli, dataset):
    out = dataset["dir"] / "report.json"
    proc = cli("run", "--method", "baseline,se", "--embeddings", ",".join(dataset["models"]),
               "--labels", dataset["labels"], "--fractions", "0.2,0.3", "--epochs", "3", "--lr", "1e-3",
               "--out", out, "--json")
    assert proc.returncode == 0, proc.stderr
    report = json.loads(out.read_text())
    assert len(report["rows"]) == 6
    assert len(report["means"]) == 3


def test_run_to_stdout_is_deterministic(cli, dataset):
    args = ["run", "--method", "se", "--embeddings", ",".join(dataset["models"]), "--labels", dataset["labels"],
            "--fractions", "0.2", "--epochs", "2", "--lr", "1e-3"]
    a, b = cli(*args), cli(*args, "--jobs", "3")
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout


def test_de_without_kg_is_a_usage_error(cli, dataset):
    proc = cli("run", "--method", "de", "--embeddings", ",".join(dataset["models"]), "--labels", dataset["labels"])
    assert proc.returncode == 2
    assert "kg" in error_of(proc)["message"]


def test_kappa_identical_is_one(cli, tmp_path):
    gold = write_labels(tmp_path / "gold.tsv", [0, 1, 1, 0, 2])
    proc = cli("kappa", gold, gold, "--json")
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["kappa"] == 1.0


def test_kappa_at_chance_is_zero(cli, tmp_path):
    gold = write_labels(tmp_path / "gold.tsv", [0, 0, 1, 1])
    pred = write_labels(tmp_path / "pred.tsv", [0, 1, 0, 1])
    result = json.loads(cli("kappa", gold, pred, "--json").stdout)
    assert result["p_o"] == 0.5
    assert abs(result["kappa"]) < 1e-12


def test_kappa_disjoint_ids_fail(cli, tmp_path):
    gold = write_labels(tmp_path / "gold.tsv", [0, 1])
    pred = tmp_path / "pred.tsv"
    pred.write_text("id\tlabel\nx0\t0\nx1\t1\n")
    proc = cli("kappa", gold, pred)
    assert proc.returncode == 1
    assert error_of(proc)["kind"]


def test_synth_round_trip_and_seed(cli, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"n": 30, "classes": 2, "sources": [{"id": "s", "dim": 5, "role": "signal"}]}))
    a = cli("synth", spec, "--out", tmp_path / "a", "--seed", "1", "--json")
    b = cli("synth", spec, "--out", tmp_path / "b", "--seed", "2")
    c = cli("synth", spec, "--out", tmp_path / "c", "--seed", "1")
    assert a.returncode == b.returncode == c.returncode == 0
    summary = json.loads(a.stdout)
    assert summary["embeddings"][0]["n"] == 30
    assert summary["embeddings"][0]["dim"] == 5
    read = lambda d: (tmp_path / d / "s.emb").read_bytes()
    assert read("a") == read("c")
    assert read("a") != read("b")


def test_synth_rejects_empty_spec(cli, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"n": 0, "classes": 2, "sources": [{"id": "s", "dim": 5, "role": "noise"}]}))
    proc = cli("synth", spec, "--out", tmp_path / "out")
    assert proc.returncode != 0


def test_inspect(cli, dataset):
    proc = cli("inspect", dataset["models"][0], "--json")
    assert proc.returncode == 0
    header = json.loads(proc.stdout)
    assert header["n"] == 60
    assert header["dim"] == 8
    stats = json.loads(cli("inspect", dataset["models"][0], "--stats", "--json").stdout)
    assert stats["finite_count"] == 60 * 8
    assert len(stats["columns"]) == 8


def test_inspect_truncated(cli, tmp_path, dataset):
    cut = tmp_path / "cut.emb"
    cut.write_bytes(open(dataset["models"][0], "rb").read()[:30])
    proc = cli("inspect", cut)
    assert proc.returncode != 0
    assert error_of(proc)["kind"] == "Truncated"


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help_exits_zero(cli, sub):
    proc = cli(sub, "--help")
    assert proc.returncode == 0
    assert "Usage" in proc.stdout
