"""Shared fixtures, mainly trained models reused across test modules.

Training runs once per session: an overfit soft-attention model and an
overfit transformer on the 200-sentence synthetic corpus, plus a
soft-attention model trained on a proper split of a larger synthetic
corpus for generalization and alignment checks.
"""

from __future__ import annotations

import time

import pytest

from adr import harness
from adr.synth import synth_corpus
from adr.text_pipeline import DatasetSplit, ParallelCorpus, split_dataset


@pytest.fixture(scope="session")
def synth200() -> ParallelCorpus:
    return synth_corpus(seed=1, n_sentences=200)


@pytest.fixture(scope="session")
def overfit_split(synth200) -> DatasetSplit:
    dev = ParallelCorpus(synth200.pairs[:20])
    return DatasetSplit(train=synth200, dev=dev, test=dev, seed=None, ratios=None)


def _train_timed(config: harness.TrainConfig, split: DatasetSplit):
    start = time.monotonic()
    ckpt, history = harness.train(config, split)
    elapsed = time.monotonic() - start
    return harness.model_from_checkpoint(ckpt), ckpt, history, elapsed


@pytest.fixture(scope="session")
def overfit_rnn(overfit_split):
    """(model, checkpoint, history, seconds) for a 1L/64 soft-attention overfit."""
    config = harness.TrainConfig(
        architecture="soft_dot", num_layers=1, hidden_dim=64, embed_dim=64,
        attn_dim=64, epochs=300, seed=1,
        target_train_accuracy=0.99, accuracy_check_every=5,
    )
    return _train_timed(config, overfit_split)


@pytest.fixture(scope="session")
def overfit_transformer(overfit_split):
    """(model, checkpoint, history, seconds) for a 2L/64 transformer overfit."""
    config = harness.TrainConfig(
        architecture="transformer", num_layers=2, hidden_dim=64, num_heads=4,
        ff_dim=128, epochs=300, seed=1,
        target_train_accuracy=0.99, accuracy_check_every=5,
    )
    return _train_timed(config, overfit_split)


@pytest.fixture(scope="session")
def generalization_split() -> DatasetSplit:
    return split_dataset(synth_corpus(seed=2, n_sentences=500), seed=3)


@pytest.fixture(scope="session")
def generalization_rnn(generalization_split):
    """Soft-attention model trained on a train/dev/test split, not overfit to test."""
    config = harness.TrainConfig(
        architecture="soft_dot", num_layers=1, hidden_dim=64, embed_dim=64,
        attn_dim=64, epochs=40, seed=5,
        target_train_accuracy=0.995, accuracy_check_every=5,
    )
    return _train_timed(config, generalization_split)
