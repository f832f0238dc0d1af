"""Map topology for the 21-territory Risk board used in the intent study."""

import json
from functools import lru_cache
from itertools import permutations
from pathlib import Path

from pydantic import BaseModel, Field, PrivateAttr, model_validator

from app.config import get_settings
from app.core.exceptions import UnknownTerritoryError
from app.utils.logger import get_logger

logger = get_logger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_MAP_FILE = DATA_DIR / "risk_map.json"

CONTINENT_NAMES = ("Red", "Green", "Purple", "Yellow", "Blue")
MAP_FORMAT_VERSION = 1


class Continent(BaseModel):
    """A named group of territories with its reinforcement bonus."""

    name: str
    bonus: int = Field(..., ge=0)
    territories: list[str] = Field(..., min_length=1)


class GameMap(BaseModel):
    """Immutable board topology.

    Territories are listed in canonical order (continent order Red, Green,
    Purple, Yellow, Blue, then letter order); every index-based structure in the
    package (state vectors, encoders, tie-breaks) uses this order. Edges are
    directed and kept in the canonical edge order that the map file defines.
    """

    model_config = {"frozen": True}

    name: str
    continents: list[Continent]
    territories: list[str]
    edges: list[tuple[str, str]]
    edge_slots: int

    _index: dict[str, int] = PrivateAttr(default_factory=dict)
    _continent_of: list[int] = PrivateAttr(default_factory=list)
    _successors: list[tuple[int, ...]] = PrivateAttr(default_factory=list)
    _predecessors: list[tuple[int, ...]] = PrivateAttr(default_factory=list)
    _edge_pairs: list[tuple[int, int]] = PrivateAttr(default_factory=list)

    @model_validator(mode="after")
    def _check_topology(self) -> "GameMap":
        declared = [t for continent in self.continents for t in continent.territories]
        if declared != self.territories:
            raise ValueError("territories must list every continent's territories in order")
        if len(set(self.territories)) != len(self.territories):
            raise ValueError("territory names must be unique")
        known = set(self.territories)
        for source, target in self.edges:
            if source not in known or target not in known:
                raise ValueError(f"edge ({source}, {target}) references an unknown territory")
            if source == target:
                raise ValueError(f"self-loop on {source}")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges")
        if len(self.edges) > self.edge_slots:
            raise ValueError(f"{len(self.edges)} edges exceed {self.edge_slots} edge slots")
        return self

    def model_post_init(self, __context) -> None:
        self._index = {name: i for i, name in enumerate(self.territories)}
        continent_of = []
        for c_index, continent in enumerate(self.continents):
            continent_of.extend([c_index] * len(continent.territories))
        self._continent_of = continent_of

        successors: list[list[int]] = [[] for _ in self.territories]
        predecessors: list[list[int]] = [[] for _ in self.territories]
        pairs = []
        for source, target in self.edges:
            s, t = self._index[source], self._index[target]
            successors[s].append(t)
            predecessors[t].append(s)
            pairs.append((s, t))
        self._successors = [tuple(sorted(x)) for x in successors]
        self._predecessors = [tuple(sorted(x)) for x in predecessors]
        self._edge_pairs = pairs

    @property
    def n_territories(self) -> int:
        return len(self.territories)

    @property
    def n_continents(self) -> int:
        return len(self.continents)

    @property
    def continent_names(self) -> list[str]:
        return [c.name for c in self.continents]

    @property
    def edge_pairs(self) -> list[tuple[int, int]]:
        """Edges as (source index, target index) in canonical edge order."""
        return self._edge_pairs

    def index(self, territory: str) -> int:
        """Canonical index of a territory name."""
        try:
            return self._index[territory]
        except KeyError:
            raise UnknownTerritoryError(f"Unknown territory: {territory}")

    def continent_of(self, territory: int) -> int:
        """Continent index of a territory index."""
        return self._continent_of[territory]

    def continent_index(self, name: str) -> int:
        try:
            return self.continent_names.index(name)
        except ValueError:
            raise ValueError(f"Unknown continent: {name}")

    def continent_members(self, continent: int) -> list[int]:
        """Territory indices of a continent, in canonical order."""
        return [i for i, c in enumerate(self._continent_of) if c == continent]

    def successors(self, territory: int) -> tuple[int, ...]:
        return self._successors[territory]

    def predecessors(self, territory: int) -> tuple[int, ...]:
        return self._predecessors[territory]

    def has_edge(self, source: int, target: int) -> bool:
        return target in self._successors[source]

    def border_territories(self, continent: int) -> list[int]:
        """Territories of a continent with an incoming edge from outside it."""
        return [
            t
            for t in self.continent_members(continent)
            if any(self._continent_of[p] != continent for p in self._predecessors[t])
        ]


def load_map(path: str | Path) -> GameMap:
    """Load a map file.

    The file lists continents with their territories and bonuses, an
    ``intra_continent_adjacency`` rule (``complete`` or ``explicit``) and the
    explicit directed edges. With ``complete`` adjacency every ordered pair
    inside a continent becomes an edge, emitted before the explicit edges.

    Args:
        path: Path to a ``format_version: 1`` map file

    Returns:
        Validated GameMap
    """
    path = Path(path)
    logger.debug(f"Loading map file: {path}")
    data = json.loads(path.read_text(encoding="utf-8"))

    version = data.get("format_version")
    if version != MAP_FORMAT_VERSION:
        raise ValueError(f"Unsupported map format_version: {version}")

    continents = [Continent(**c) for c in data["continents"]]
    adjacency = data.get("intra_continent_adjacency", "explicit")
    edges: list[tuple[str, str]] = []
    if adjacency == "complete":
        for continent in continents:
            edges.extend(permutations(continent.territories, 2))
    elif adjacency != "explicit":
        raise ValueError(f"Unknown intra_continent_adjacency: {adjacency}")
    edges.extend((source, target) for source, target in data["edges"])

    return GameMap(
        name=data.get("name", path.stem),
        continents=continents,
        territories=[t for c in continents for t in c.territories],
        edges=edges,
        edge_slots=data.get("edge_slots", len(edges)),
    )


@lru_cache
def build_canonical_map() -> GameMap:
    """Return the fixed 21-territory map (cached, identical across calls)."""
    settings = get_settings()
    game_map = load_map(settings.map_file or DEFAULT_MAP_FILE)
    logger.info(
        f"Loaded map '{game_map.name}': {game_map.n_territories} territories, "
        f"{game_map.n_continents} continents, {len(game_map.edges)} edges"
    )
    return game_map
