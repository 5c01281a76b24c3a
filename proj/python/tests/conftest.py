import json
import os
import subprocess

import pytest

import kgens

SIGNAL_SPEC = {
    "n": 60,
    "classes": 2,
    "seed": 3,
    "sources": [
        {"id": "model_a", "dim": 8, "role": "signal"},
        {"id": "model_b", "dim": 8, "role": "signal"},
        {"id": "cnet", "dim": 12, "role": "kg-correlated"},
        {"id": "wiki", "dim": 10, "role": "noise"},
    ],
    "label_noise": 0.2,
}


@pytest.fixture
def dataset(tmp_path):
    paths = kgens.synth(json.dumps(SIGNAL_SPEC), str(tmp_path))
    by_name = {os.path.basename(p): p for p in paths}
    return {
        "dir": tmp_path,
        "models": [by_name["model_a.emb"], by_name["model_b.emb"]],
        "kg": [by_name["cnet.emb"], by_name["wiki.emb"]],
        "labels": str(tmp_path / "labels.tsv"),
    }


@pytest.fixture
def cli():
    path = os.environ.get("KGENS_CLI")
    if not path:
        pytest.skip("KGENS_CLI not set")

    def call(*args):
        return subprocess.run([path, *map(str, args)], capture_output=True, text=True, timeout=120)

    return call
