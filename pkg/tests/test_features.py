"""Tests for extraction feature vectors."""

import numpy as np
import pytest

from app.core.exceptions import UnknownTerritoryError
from app.core.features import feature_dim, featurize, featurize_batch, troop_dim, troop_features


def test_dimensions():
    assert troop_dim() == 84
    assert feature_dim(2048) == 2132
    assert featurize("Take Purple.", {"Purple_E": 14}).values.shape == (2132,)


def test_deterministic(annotated_example):
    a = featurize(annotated_example.text, annotated_example.selections, 256, 1)
    b = featurize(annotated_example.text, annotated_example.selections, 256, 1)
    np.testing.assert_array_equal(a.values, b.values)


def test_text_is_case_insensitive():
    lower = featurize("take purple", {"Purple_E": 14}, 128)
    upper = featurize("Take PURPLE", {"Purple_E": 14}, 128)
    np.testing.assert_array_equal(lower.text_features, upper.text_features)
    assert lower.text_features.sum() == 3  # two unigrams, one bigram


def test_troop_features_with_map(annotated_selections):
    features = troop_features(annotated_selections, map_id=1)
    troops, ownership = features[:21], features[21:].reshape(21, 3)
    assert troops[12] == pytest.approx(7 / 14)
    assert troops.sum() == pytest.approx(1.0)
    np.testing.assert_array_equal(ownership.sum(axis=1), np.ones(21))
    assert ownership[12].tolist() == [1.0, 0.0, 0.0]
    # Purple_A belongs to black on map 1
    assert ownership[8].tolist() == [0.0, 1.0, 0.0]
    assert ownership[:, 1].sum() == 10


def test_troop_features_without_map(annotated_selections):
    ownership = troop_features(annotated_selections).reshape(-1)[21:].reshape(21, 3)
    assert ownership[:, 1].sum() == 0
    assert ownership[:, 2].sum() == 18


def test_unknown_territory_rejected(annotated_selections):
    with pytest.raises(UnknownTerritoryError, match="Atlantis"):
        troop_features({**annotated_selections, "Atlantis": 1}, map_id=1)


def test_batch_matches_single(small_corpus):
    examples = small_corpus[:3]
    matrix = featurize_batch(
        [e.text for e in examples], [e.selections for e in examples], [e.map_id for e in examples], 64
    )
    assert matrix.shape == (3, feature_dim(64))
    for row, e in zip(matrix, examples):
        np.testing.assert_array_equal(row, featurize(e.text, e.selections, 64, e.map_id).values)


def test_empty_batch():
    assert featurize_batch([], [], [], 32).shape == (0, 116)
