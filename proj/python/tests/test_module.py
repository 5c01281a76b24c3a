import json

import numpy as np
import pytest

import kgens


def test_constants():
    assert kgens.PRNG_NAME == "mt19937_64/kgens-v1"
    assert kgens.REPORT_SCHEMA_VERSION == 1


def test_embedding_round_trip(tmp_path):
    data = np.arange(12, dtype=np.float32).reshape(4, 3) / 7
    path = tmp_path / "vecs.emb"
    kgens.write_embeddings(str(path), data)
    source_id, back = kgens.load_embeddings(str(path))
    assert source_id == "vecs"
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back, data)


def test_truncated_embeddings_raise(tmp_path):
    path = tmp_path / "cut.emb"
    kgens.write_embeddings(str(path), np.ones((4, 3), dtype=np.float32))
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(kgens.KgensError):
        kgens.load_embeddings(str(path))


def test_kappa():
    assert kgens.cohen_kappa([0, 1, 2, 1], [0, 1, 2, 1], 3) == 1.0
    terms = kgens.kappa_terms([0, 0, 1, 1], [0, 1, 0, 1], 2)
    assert terms["p_o"] == 0.5
    assert terms["p_e"] == 0.5
    assert abs(terms["kappa"]) < 1e-12
    assert kgens.accuracy([1, 0], [1, 1]) == 0.5
    with pytest.raises(kgens.KgensError):
        kgens.cohen_kappa([0, 1], [0], 2)


def test_pca_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 6))
    projected, components, variance = kgens.pca(x, 3)
    assert projected.shape == (40, 3)
    np.testing.assert_allclose(components @ components.T, np.eye(3), atol=1e-10)
    expected = np.sort(np.linalg.eigvalsh(np.cov(x, rowvar=False)))[::-1][:3]
    np.testing.assert_allclose(variance, expected, rtol=1e-9)


def test_synth_seed_changes_bytes(tmp_path):
    spec = json.dumps({"n": 10, "classes": 2, "sources": [{"id": "s", "dim": 4, "role": "noise"}]})
    a = kgens.synth(spec, str(tmp_path / "a"), seed=1)
    b = kgens.synth(spec, str(tmp_path / "b"), seed=2)
    c = kgens.synth(spec, str(tmp_path / "c"), seed=1)
    emb = lambda paths: open([p for p in paths if p.endswith(".emb")][0], "rb").read()
    assert emb(a) != emb(b)
    assert emb(a) == emb(c)


def test_synth_rejects_empty(tmp_path):
    spec = json.dumps({"n": 0, "classes": 2, "sources": [{"id": "s", "dim": 4, "role": "noise"}]})
    with pytest.raises(kgens.KgensError):
        kgens.synth(spec, str(tmp_path))


def test_run_returns_report(dataset):
    report = kgens.run(dataset["models"], dataset["labels"], ["baseline", "se", "de"], kg=dataset["kg"],
                       fractions=[0.2, 0.3], epochs=3, lr=1e-3)
    assert report["schema_version"] == 1
    assert report["methods"] == ["baseline:model_a", "baseline:model_b", "se", "de"]
    assert len(report["rows"]) == 8
    for row in report["rows"]:
        assert 0.0 <= row["accuracy"] <= 1.0
        assert row["p_o"] == row["accuracy"]
    assert "beta" in report["rows"][-1]


def test_ablate_returns_points(dataset):
    report = kgens.ablate("alpha", [0.0, 0.5, 1.0], dataset["models"], dataset["labels"],
                          fractions=[0.2], epochs=2, lr=1e-3)
    assert report["kind"] == "ablation"
    assert [p["value"] for p in report["points"]] == [0.0, 0.5, 1.0]


def test_run_errors_are_typed(dataset):
    with pytest.raises(kgens.KgensError):
        kgens.run(dataset["models"], dataset["labels"], ["de"])
