"""Pytest configuration and fixtures."""

import json
import os
from unittest.mock import patch

import numpy as np
import pytest
from fastapi.testclient import TestClient

# Set test environment variables before importing app
os.environ["LOG_LEVEL"] = "WARNING"
os.environ.pop("MODEL_PATH", None)

ANNOTATED_TEXT = (
    "My plan is to hold Purple as my home base. I will stack a large army on "
    "Purple_E because it faces Red across the only bridge, and keep the rest "
    "of my troops on Purple_C and Purple_D so the whole continent stays "
    "connected. I do not want any troops on Red, it is too exposed to grey. "
    "I would rather defend than attack early."
)


@pytest.fixture
def game_map():
    """Canonical 21-territory map."""
    from app.core.risk_map import build_canonical_map

    return build_canonical_map()


@pytest.fixture
def initial_state(game_map):
    """Map 1 before the ego draft."""
    from app.core.game_engine import get_initializations, load_initialization

    return load_initialization(get_initializations()[1], game_map)


@pytest.fixture
def annotated_selections():
    return {"Purple_E": 7, "Purple_C": 5, "Purple_D": 2}


@pytest.fixture
def annotated_intent():
    """Goals and constraints matching the annotated drafting scenario on map 1."""
    from app.core.intent import Constraint, IntentSpec

    return IntentSpec.build(
        {"G1": 0, "G2": -40, "G3": 80, "G4": -60, "G5": 20, "G6": 0},
        [
            Constraint(class_id="C1", value="Purple"),
            Constraint(class_id="C2", value="Red"),
            Constraint(class_id="C8", value=7),
            Constraint(class_id="C9", value=1),
        ],
    )


@pytest.fixture
def annotated_example(annotated_selections, annotated_intent):
    from app.core.corpus import CorpusExample, Source

    return CorpusExample.from_intent(
        1, ANNOTATED_TEXT, annotated_selections, annotated_intent, Source.HUMAN
    )


@pytest.fixture
def drafted(annotated_selections, game_map):
    """State right after the annotated draft."""
    from app.core.game_engine import drafted_state

    return drafted_state(1, annotated_selections, game_map)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_corpus():
    """Forty seeded synthetic examples."""
    from app.core.corpus_generator import generate_corpus

    return generate_corpus(40, seed=11)


@pytest.fixture
def small_config():
    """Fast training config."""
    from app.core.extractor import TrainConfig

    return TrainConfig(
        epochs=3, batch_size=8, learning_rate=0.05, feature_dim=256, folds=2, seed=5
    )


@pytest.fixture
def corpus_file(tmp_path, annotated_example):
    from app.core.corpus import write_corpus

    path = tmp_path / "corpus.jsonl"
    write_corpus([annotated_example], path)
    return path


@pytest.fixture
def state_file(tmp_path, drafted, initial_state):
    path = tmp_path / "states.json"
    path.write_text(
        json.dumps([initial_state.model_dump(mode="json"), drafted.model_dump(mode="json")])
    )
    return path


@pytest.fixture
def mock_model():
    """Model loader patched to return a zero-initialized model."""
    from app.core.extractor import ExtractionModel, TrainConfig

    model = ExtractionModel.zeros(TrainConfig(feature_dim=64))
    with patch("app.api.routes.intent.load_model", return_value=model) as mock:
        yield mock


@pytest.fixture
def no_model():
    with patch("app.api.routes.intent.load_model", return_value=None) as mock:
        yield mock


@pytest.fixture
def client(mock_model):
    """Create test client with a stub model."""
    from app.main import app

    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture
def client_without_model(no_model):
    from app.main import app

    with TestClient(app) as test_client:
        yield test_client
