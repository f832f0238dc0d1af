"""Feature vectors for the extraction model: hashed n-grams plus troop features."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sklearn.feature_extraction.text import HashingVectorizer

from app.core.exceptions import UnknownTerritoryError
from app.core.game_engine import DRAFT_TROOPS, get_initializations
from app.core.risk_map import GameMap, build_canonical_map

# ego, opponent, empty
OWNERSHIP_STATES = 3


@lru_cache
def _vectorizer(n_features: int) -> HashingVectorizer:
    return HashingVectorizer(
        n_features=n_features,
        ngram_range=(1, 2),
        lowercase=True,
        alternate_sign=False,
        norm=None,
        token_pattern=r"(?u)\b\w+\b",
    )


def troop_dim(game_map: GameMap | None = None) -> int:
    game_map = game_map or build_canonical_map()
    return game_map.n_territories * (1 + OWNERSHIP_STATES)


def feature_dim(text_dim: int, game_map: GameMap | None = None) -> int:
    return text_dim + troop_dim(game_map)


@dataclass(frozen=True)
class FeatureVector:
    text_features: np.ndarray
    troop_features: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.text_features, self.troop_features])


def text_features(texts: list[str], n_features: int) -> np.ndarray:
    """Lowercased word unigram and bigram counts hashed into ``n_features`` columns."""
    return _vectorizer(n_features).transform(texts).toarray()


def troop_features(
    selections: dict[str, int], map_id: int | None = None, game_map: GameMap | None = None
) -> np.ndarray:
    """Ego troops per territory (divided by 14) and ego/opponent/empty one-hots.

    Without a known ``map_id`` every territory outside the selections counts as empty.
    """
    game_map = game_map or build_canonical_map()
    unknown = sorted(set(selections) - set(game_map.territories))
    if unknown:
        raise UnknownTerritoryError(f"Unknown territories in selections: {', '.join(unknown)}")
    n = game_map.n_territories
    troops = np.zeros(n)
    ownership = np.zeros((n, OWNERSHIP_STATES))
    occupied: set[str] = set()
    if map_id is not None:
        init = get_initializations().get(map_id)
        if init is not None:
            occupied = set(init.grey_deployments) | set(init.black_deployments)

    for i, name in enumerate(game_map.territories):
        if name in selections:
            troops[i] = selections[name] / DRAFT_TROOPS
            ownership[i, 0] = 1.0
        elif name in occupied:
            ownership[i, 1] = 1.0
        else:
            ownership[i, 2] = 1.0
    return np.concatenate([troops, ownership.ravel()])


def featurize(
    text: str,
    selections: dict[str, int],
    n_features: int = 2048,
    map_id: int | None = None,
    game_map: GameMap | None = None,
) -> FeatureVector:
    """Deterministic feature vector for one (text, selections) pair."""
    return FeatureVector(
        text_features=text_features([text], n_features)[0],
        troop_features=troop_features(selections, map_id, game_map),
    )


def featurize_batch(
    texts: list[str],
    selections: list[dict[str, int]],
    map_ids: list[int | None],
    n_features: int = 2048,
    game_map: GameMap | None = None,
) -> np.ndarray:
    """Feature matrix with one row per example."""
    if not texts:
        return np.zeros((0, feature_dim(n_features, game_map)))
    text_block = text_features(texts, n_features)
    troop_block = np.stack(
        [troop_features(s, m, game_map) for s, m in zip(selections, map_ids)]
    )
    return np.hstack([text_block, troop_block])
