"""Commander's-intent representation: goals, constraints and intent specs.

A strategy's intent is six goal values in [-100, 100] plus eight constraint
slots. Constraints come from nine templated classes: C1-C4 take a continent,
C5-C9 take a number between 1 and 14. The enumerable label space is those 90
concrete constraints plus Null (label 0).
"""

from bisect import bisect_right
from collections import Counter
from enum import StrEnum

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.exceptions import OutOfRangeError
from app.core.risk_map import CONTINENT_NAMES

GOAL_MIN, GOAL_MAX = -100, 100
N_GOALS = 6
N_BUCKETS = 5
N_SLOTS = 8
MAX_CONSTRAINT_VALUE = 14

# Bucket i covers [edge[i-1], edge[i]); the last bucket is closed at 100.
BUCKET_EDGES = (-60, -20, 20, 60)
BUCKET_MIDPOINTS = (-80, -40, 0, 40, 80)
NEUTRAL_BUCKET = 2


class GoalId(StrEnum):
    G1 = "G1"
    G2 = "G2"
    G3 = "G3"
    G4 = "G4"
    G5 = "G5"
    G6 = "G6"


GOAL_DESCRIPTIONS = {
    GoalId.G1: "Surround enemy territories",
    GoalId.G2: "Maximize number of countries occupied",
    GoalId.G3: "Keep our troops close together",
    GoalId.G4: "Maximize battles throughout the game",
    GoalId.G5: "Fortify borders for the continents you control",
    GoalId.G6: "Battle opposing players one at a time",
}


class ConstraintClass(StrEnum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"
    C6 = "C6"
    C7 = "C7"
    C8 = "C8"
    C9 = "C9"


CONTINENT_CLASSES = (ConstraintClass.C1, ConstraintClass.C2, ConstraintClass.C3, ConstraintClass.C4)
NUMERIC_CLASSES = (
    ConstraintClass.C5,
    ConstraintClass.C6,
    ConstraintClass.C7,
    ConstraintClass.C8,
    ConstraintClass.C9,
)

CONSTRAINT_DESCRIPTIONS = {
    ConstraintClass.C1: "I must have troops on {value}",
    ConstraintClass.C2: "I must not have troops on {value}",
    ConstraintClass.C3: "I must be able to access {value} in one move",
    ConstraintClass.C4: "I need to protect the borders of {value}",
    ConstraintClass.C5: "I need a total of at least {value} troops to defend a continent",
    ConstraintClass.C6: "I must have at least {value} countries",
    ConstraintClass.C7: "I must have troops on at least {value} continents",
    ConstraintClass.C8: "I must place at least {value} troops to effectively defend a country",
    ConstraintClass.C9: "I must have troops on at most {value} continents",
}


def bucketize(value: int) -> int:
    """Map a goal value to its bucket index 0..4.

    Raises:
        OutOfRangeError: If value lies outside [-100, 100]
    """
    if not GOAL_MIN <= value <= GOAL_MAX:
        raise OutOfRangeError(f"Goal value {value} outside [{GOAL_MIN}, {GOAL_MAX}]")
    return bisect_right(BUCKET_EDGES, value)


class GoalAssignment(BaseModel):
    goal_id: GoalId
    value: int = Field(..., ge=GOAL_MIN, le=GOAL_MAX)

    @property
    def bucket(self) -> int:
        return bucketize(self.value)


class Constraint(BaseModel):
    """A concrete constraint: a class and its continent or numeric value."""

    model_config = {"frozen": True}

    class_id: ConstraintClass
    value: str | int

    @model_validator(mode="after")
    def _check_value(self) -> "Constraint":
        if self.class_id in CONTINENT_CLASSES:
            if self.value not in CONTINENT_NAMES:
                raise ValueError(f"{self.class_id} takes a continent, got {self.value!r}")
        elif isinstance(self.value, bool) or not isinstance(self.value, int):
            raise ValueError(f"{self.class_id} takes a number, got {self.value!r}")
        elif not 1 <= self.value <= MAX_CONSTRAINT_VALUE:
            raise ValueError(f"{self.class_id} value {self.value} outside 1..{MAX_CONSTRAINT_VALUE}")
        return self

    @property
    def label(self) -> int:
        return LABEL_INDEX[self]

    def describe(self) -> str:
        return CONSTRAINT_DESCRIPTIONS[self.class_id].format(value=self.value)

    def __str__(self) -> str:
        return f"{self.class_id}({self.value})"


def _build_label_space() -> list[Constraint | None]:
    labels: list[Constraint | None] = [None]
    for class_id in CONTINENT_CLASSES:
        labels.extend(Constraint(class_id=class_id, value=c) for c in CONTINENT_NAMES)
    for class_id in NUMERIC_CLASSES:
        labels.extend(
            Constraint(class_id=class_id, value=v) for v in range(1, MAX_CONSTRAINT_VALUE + 1)
        )
    return labels


LABEL_SPACE = _build_label_space()
LABEL_INDEX = {c: i for i, c in enumerate(LABEL_SPACE) if c is not None}
NULL_LABEL = 0
N_LABELS = len(LABEL_SPACE)


def label_of(constraint: Constraint | None) -> int:
    return NULL_LABEL if constraint is None else LABEL_INDEX[constraint]


def constraint_of(label: int) -> Constraint | None:
    return LABEL_SPACE[label]


class IntentSpec(BaseModel):
    """Six goals (one per goal id, in id order) and eight constraint slots."""

    goals: list[GoalAssignment]
    constraints: list[Constraint | None]

    @field_validator("goals")
    @classmethod
    def _check_goals(cls, goals: list[GoalAssignment]) -> list[GoalAssignment]:
        if sorted(g.goal_id for g in goals) != list(GoalId):
            raise ValueError("goals must assign each of G1..G6 exactly once")
        return sorted(goals, key=lambda g: g.goal_id)

    @field_validator("constraints")
    @classmethod
    def _check_constraints(cls, constraints: list[Constraint | None]) -> list[Constraint | None]:
        if len(constraints) != N_SLOTS:
            raise ValueError(f"constraints must have exactly {N_SLOTS} slots")
        present = [c for c in constraints if c is not None]
        if len(set(present)) != len(present):
            raise ValueError("duplicate constraints are not allowed")
        return constraints

    @classmethod
    def build(
        cls, goals: dict[GoalId | str, int], constraints: list[Constraint] | None = None
    ) -> "IntentSpec":
        """Build a spec from a goal mapping and up to eight constraints (padded with Null)."""
        constraints = list(constraints or [])
        if len(constraints) > N_SLOTS:
            raise ValueError(f"at most {N_SLOTS} constraints")
        return cls(
            goals=[GoalAssignment(goal_id=GoalId(k), value=v) for k, v in goals.items()],
            constraints=constraints + [None] * (N_SLOTS - len(constraints)),
        )

    @property
    def active_constraints(self) -> list[Constraint]:
        return [c for c in self.constraints if c is not None]

    def goal_value(self, goal_id: GoalId | str) -> int:
        return next(g.value for g in self.goals if g.goal_id == goal_id)

    def goal_buckets(self) -> list[int]:
        return [g.bucket for g in self.goals]

    def constraint_labels(self) -> list[int]:
        return [label_of(c) for c in self.constraints]


class PredictionScore(BaseModel):
    goals_correct: int = Field(..., ge=0, le=N_GOALS)
    constraints_correct: int = Field(..., ge=0, le=N_SLOTS)


def score_prediction(pred: IntentSpec, gold: IntentSpec) -> PredictionScore:
    """Count correct goals (bucket equality) and matched constraint slots.

    The constraint count is the size of a maximum matching between the two
    8-slot multisets, Null matching Null; for equality matching that is the
    multiset intersection size.
    """
    goals_correct = sum(
        p == g for p, g in zip(pred.goal_buckets(), gold.goal_buckets())
    )
    overlap = Counter(pred.constraint_labels()) & Counter(gold.constraint_labels())
    return PredictionScore(
        goals_correct=goals_correct, constraints_correct=sum(overlap.values())
    )
