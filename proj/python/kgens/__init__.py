"""Embedding ensembles (baseline, ShE, SE, DE) over precomputed embeddings."""

import json

from ._kgens import (
    PRNG_NAME,
    REPORT_SCHEMA_VERSION,
    KgensError,
    accuracy,
    cohen_kappa,
    kappa_terms,
    load_embeddings,
    pca,
    synth,
    write_embeddings,
)
from . import _kgens


def run(embeddings, labels, methods, **kwargs):
    """Run the split protocol and return the report as a dict."""
    return json.loads(_kgens.run(list(map(str, embeddings)), str(labels), list(methods), **kwargs))


def ablate(param, grid, embeddings, labels, **kwargs):
    """Sweep alpha or beta and return the ablation report as a dict."""
    return json.loads(_kgens.ablate(param, list(grid), list(map(str, embeddings)), str(labels), **kwargs))


__all__ = [
    "PRNG_NAME",
    "REPORT_SCHEMA_VERSION",
    "KgensError",
    "ablate",
    "accuracy",
    "cohen_kappa",
    "kappa_terms",
    "load_embeddings",
    "pca",
    "run",
    "synth",
    "write_embeddings",
]
