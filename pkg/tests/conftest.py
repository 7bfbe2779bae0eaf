"""Shared fixtures. One small separable corpus is reused across modules."""

import pytest

from dialectid.synth import generate_synthetic_corpus


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Two-band corpus, small enough that every consumer stays fast."""
    out = tmp_path_factory.mktemp("tiny_corpus")
    return generate_synthetic_corpus(
        str(out),
        seed=5,
        train_per_class=8,
        test_per_class=5,
        utterance_seconds=1.5,
        utterances_per_speaker=4,
    )
