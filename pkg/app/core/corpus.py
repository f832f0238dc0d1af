"""Corpus records and JSON Lines I/O.

One record per line with the fields ``map_id``, ``text``, ``selections``,
``goals``, ``constraints`` and ``source``.
"""

import json
from enum import StrEnum
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError, model_validator

from app.core.exceptions import CorpusParseError, CorpusValidationError
from app.core.game_engine import DRAFT_TROOPS, get_initializations
from app.core.intent import Constraint, GoalAssignment, IntentSpec
from app.core.risk_map import GameMap, build_canonical_map
from app.utils.logger import get_logger

logger = get_logger(__name__)

MIN_HUMAN_TEXT_LENGTH = 200
RECORD_FIELDS = ("map_id", "text", "selections", "goals", "constraints", "source")


class Source(StrEnum):
    HUMAN = "human"
    SYNTHETIC = "synthetic"
    AUGMENTED = "augmented"


class CorpusExample(BaseModel):
    """One <map, text, selections, constraints, goals> record."""

    map_id: int = Field(..., ge=1)
    text: str = Field(..., min_length=1)
    selections: dict[str, int]
    goals: list[GoalAssignment]
    constraints: list[Constraint | None]
    source: Source = Source.SYNTHETIC

    @model_validator(mode="after")
    def _check_record(self) -> "CorpusExample":
        intent = IntentSpec(goals=self.goals, constraints=self.constraints)
        self.goals = intent.goals
        if any(n < 1 for n in self.selections.values()):
            raise ValueError("selections must place a positive number of troops")
        total = sum(self.selections.values())
        if total != DRAFT_TROOPS:
            raise ValueError(f"selections place {total} troops, expected {DRAFT_TROOPS}")
        if self.source == Source.HUMAN and len(self.text) < MIN_HUMAN_TEXT_LENGTH:
            raise ValueError(
                f"human strategy text must be at least {MIN_HUMAN_TEXT_LENGTH} characters"
            )
        return self

    @property
    def intent(self) -> IntentSpec:
        return IntentSpec(goals=self.goals, constraints=self.constraints)

    @classmethod
    def from_intent(
        cls,
        map_id: int,
        text: str,
        selections: dict[str, int],
        intent: IntentSpec,
        source: Source = Source.SYNTHETIC,
    ) -> "CorpusExample":
        return cls(
            map_id=map_id,
            text=text,
            selections=selections,
            goals=intent.goals,
            constraints=intent.constraints,
            source=source,
        )


def validate_selections(example: CorpusExample, game_map: GameMap | None = None) -> None:
    """Check that selections land on territories left empty by the map initialization.

    Raises:
        CorpusValidationError: On unknown maps or territories, or occupied ones
    """
    game_map = game_map or build_canonical_map()
    inits = get_initializations()
    init = inits.get(example.map_id)
    if init is None:
        raise CorpusValidationError(f"unknown map_id {example.map_id}")
    occupied = set(init.grey_deployments) | set(init.black_deployments)
    for territory in example.selections:
        if territory not in game_map.territories:
            raise CorpusValidationError(f"unknown territory {territory}")
        if territory in occupied:
            raise CorpusValidationError(
                f"{territory} is occupied by an opponent on map {example.map_id}"
            )


def parse_record(line: str, line_number: int, game_map: GameMap | None = None) -> CorpusExample:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        raise CorpusParseError(f"invalid JSON ({e.msg})", line_number)
    if not isinstance(data, dict):
        raise CorpusParseError("record must be a JSON object", line_number)
    missing = [f for f in RECORD_FIELDS if f not in data]
    if missing:
        raise CorpusParseError(f"missing fields {missing}", line_number)

    try:
        example = CorpusExample.model_validate(data)
        validate_selections(example, game_map)
    except ValidationError as e:
        first = e.errors()[0]
        raise CorpusValidationError(first["msg"], line_number)
    except CorpusValidationError as e:
        raise CorpusValidationError(str(e), line_number)
    return example


def read_corpus(path: str | Path, game_map: GameMap | None = None) -> list[CorpusExample]:
    """Read and validate a corpus file.

    Args:
        path: JSON Lines corpus file (blank lines are skipped)
        game_map: Board topology (canonical map by default)

    Returns:
        Examples in file order

    Raises:
        CorpusParseError: Malformed line
        CorpusValidationError: Record violating an invariant (e.g. 13 troops)
    """
    path = Path(path)
    examples = []
    with path.open(encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if line.strip():
                examples.append(parse_record(line, line_number, game_map))
    logger.info(f"Read {len(examples)} examples from {path}")
    return examples


def dump_record(example: CorpusExample, game_map: GameMap | None = None) -> str:
    """Serialize one example; selections are written in canonical territory order."""
    game_map = game_map or build_canonical_map()
    data = example.model_dump(mode="json")
    data["selections"] = {
        name: example.selections[name] for name in sorted(example.selections, key=game_map.index)
    }
    return json.dumps({f: data[f] for f in RECORD_FIELDS}, ensure_ascii=False)


def write_corpus(examples: list[CorpusExample], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for example in examples:
            f.write(dump_record(example) + "\n")
    logger.info(f"Wrote {len(examples)} examples to {path}")
