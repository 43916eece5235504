import time

import numpy as np
import pytest

from gaitsense.nn.model import Model, ModelConfig, save_model
from gaitsense.nn.train import TrainConfig, evaluate, train
from gaitsense.pipeline import preprocess
from gaitsense.synth import DatasetSpec, GaitClass, synth_dataset, synth_identity_set


def _to_tensors(records, label_fn):
    x = np.stack([preprocess(r).values for r in records]).reshape(
        len(records), 220, 1
    )
    y = np.array([label_fn(r) for r in records])
    return x, y


@pytest.fixture(scope="session")
def posture_run(tmp_path_factory):
    """Train the posture classifier once; shared by several tests.

    Returns a dict with the model path, test accuracy, confusion matrix,
    and total wall-clock seconds (data synthesis through evaluation).
    """
    t0 = time.monotonic()
    train_recs, test_recs = synth_dataset(DatasetSpec())
    xtr, ytr = _to_tensors(train_recs, lambda r: GaitClass[r.label].value)
    xte, yte = _to_tensors(test_recs, lambda r: GaitClass[r.label].value)
    model = Model(ModelConfig(), seed=0)
    train(model, xtr, ytr, TrainConfig(epochs=12))
    acc, cm = evaluate(model, xte, yte)
    elapsed = time.monotonic() - t0
    path = tmp_path_factory.mktemp("models") / "posture.bin"
    save_model(model, path)
    return {"path": str(path), "accuracy": acc, "confusion": cm,
            "elapsed_s": elapsed}


@pytest.fixture(scope="session")
def identity_run(tmp_path_factory):
    """Train the 5-subject identity model once; same dict shape as above."""
    t0 = time.monotonic()
    train_recs, test_recs = synth_identity_set()
    xtr, ytr = _to_tensors(train_recs, lambda r: r.subject)
    xte, yte = _to_tensors(test_recs, lambda r: r.subject)
    model = Model(ModelConfig(n_classes=5), seed=0)
    train(model, xtr, ytr, TrainConfig(epochs=40))
    acc, cm = evaluate(model, xte, yte)
    elapsed = time.monotonic() - t0
    path = tmp_path_factory.mktemp("models") / "identity.bin"
    save_model(model, path)
    return {"path": str(path), "accuracy": acc, "confusion": cm,
            "elapsed_s": elapsed}


@pytest.fixture(scope="session")
def untrained_model_path(tmp_path_factory):
    """A loadable (but untrained) model for protocol-level gateway tests."""
    path = tmp_path_factory.mktemp("models") / "untrained.bin"
    save_model(Model(ModelConfig(), seed=0), path)
    return str(path)
