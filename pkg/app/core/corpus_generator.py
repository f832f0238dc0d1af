"""Synthetic corpus generation from templates.

Each example samples a consistent intent, finds a 14-troop draft that satisfies
every constraint on the chosen map, and renders one templated sentence per
constraint and per non-neutral goal.
"""

import json
from collections import Counter
from functools import lru_cache
from itertools import combinations
from pathlib import Path

import numpy as np
from pydantic import BaseModel, model_validator

from app.config import get_settings
from app.core.constraint_checker import check_against_selections, check_consistency
from app.core.corpus import CorpusExample, Source
from app.core.exceptions import InfeasibleIntentError
from app.core.game_engine import (
    DRAFT_TROOPS,
    EGO,
    GameState,
    apply_selections,
    get_initializations,
    load_initialization,
)
from app.core.intent import (
    CONTINENT_CLASSES,
    N_BUCKETS,
    N_LABELS,
    N_SLOTS,
    NEUTRAL_BUCKET,
    NULL_LABEL,
    Constraint,
    ConstraintClass,
    GoalAssignment,
    GoalId,
    IntentSpec,
    constraint_of,
)
from app.core.risk_map import DATA_DIR, GameMap, build_canonical_map
from app.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_TEMPLATES_FILE = DATA_DIR / "templates.json"
MIN_TEMPLATES = 3
MIN_CONSTRAINTS, MAX_CONSTRAINTS = 3, N_SLOTS
MAX_SAMPLING_ATTEMPTS = 1000

C = ConstraintClass


class TemplateBank(BaseModel):
    """Surface-text templates per constraint class and per (goal, bucket)."""

    constraints: dict[ConstraintClass, list[str]]
    goals: dict[GoalId, dict[int, list[str]]]

    @model_validator(mode="after")
    def _check_coverage(self) -> "TemplateBank":
        for class_id in ConstraintClass:
            templates = self.constraints.get(class_id, [])
            if len(set(templates)) < MIN_TEMPLATES:
                raise ValueError(f"{class_id} needs at least {MIN_TEMPLATES} distinct templates")
            slot = "{continent}" if class_id in CONTINENT_CLASSES else "{number}"
            if not all(slot in t for t in templates):
                raise ValueError(f"every {class_id} template must contain {slot}")
        for goal_id in GoalId:
            for bucket in range(N_BUCKETS):
                templates = self.goals.get(goal_id, {}).get(bucket, [])
                if len(set(templates)) < MIN_TEMPLATES:
                    raise ValueError(
                        f"{goal_id} bucket {bucket} needs at least "
                        f"{MIN_TEMPLATES} distinct templates"
                    )
        return self

    def render_constraint(self, c: Constraint, rng: np.random.Generator) -> str:
        templates = self.constraints[c.class_id]
        template = templates[int(rng.integers(len(templates)))]
        return template.format(continent=c.value, number=c.value)

    def render_goal(self, goal: GoalAssignment, rng: np.random.Generator) -> str:
        templates = self.goals[goal.goal_id][goal.bucket]
        return templates[int(rng.integers(len(templates)))]


def load_template_bank(path: str | Path) -> TemplateBank:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("format_version") != 1:
        raise ValueError(f"Unsupported template format_version: {data.get('format_version')}")
    return TemplateBank(
        constraints=data["constraints"],
        goals={g: {int(b): ts for b, ts in buckets.items()} for g, buckets in data["goals"].items()},
    )


@lru_cache
def get_template_bank() -> TemplateBank:
    settings = get_settings()
    return load_template_bank(settings.templates_file or DEFAULT_TEMPLATES_FILE)


# ============== Intent sampling ==============


def sample_intent(rng: np.random.Generator) -> IntentSpec:
    """Sample six uniform goal values and 3-8 distinct, mutually consistent constraints.

    Constraints fill the first slots; the rest are Null.
    """
    values = rng.integers(-100, 101, size=len(GoalId))
    goals = {goal_id: int(v) for goal_id, v in zip(GoalId, values)}
    for _ in range(MAX_SAMPLING_ATTEMPTS):
        k = int(rng.integers(MIN_CONSTRAINTS, MAX_CONSTRAINTS + 1))
        labels = rng.choice(np.arange(NULL_LABEL + 1, N_LABELS), size=k, replace=False)
        spec = IntentSpec.build(goals, [constraint_of(int(label)) for label in labels])
        if check_consistency(spec).is_clean:
            return spec
    raise InfeasibleIntentError("Could not sample a consistent intent")


def _intent_key(intent: IntentSpec) -> tuple:
    return (
        tuple(g.value for g in intent.goals),
        tuple(sorted(intent.constraint_labels())),
    )


# ============== Draft search ==============


def _values(intent: IntentSpec, class_id: ConstraintClass) -> list:
    return [c.value for c in intent.active_constraints if c.class_id == class_id]


def _draft_for(
    occupied: tuple[int, ...],
    intent: IntentSpec,
    state: GameState,
    game_map: GameMap,
    rng: np.random.Generator,
) -> dict[int, int] | None:
    """Try to build a draft that touches exactly the ``occupied`` continents."""
    empty = {i for i, owner in enumerate(state.owner) if owner is None}
    allowed = [i for i in sorted(empty) if game_map.continent_of(i) in occupied]
    chosen: set[int] = set()

    # Whole border of every protected continent
    for name in _values(intent, C.C4):
        borders = game_map.border_territories(game_map.continent_index(name))
        if any(t not in empty for t in borders):
            return None
        chosen.update(borders)

    # One foothold per occupied continent
    for continent in occupied:
        members = [t for t in allowed if game_map.continent_of(t) == continent]
        if not members:
            return None
        if not chosen.intersection(members):
            chosen.add(members[int(rng.integers(len(members)))])

    # A gateway into each continent that must stay reachable
    for name in _values(intent, C.C3):
        target = game_map.continent_index(name)
        if target in occupied:
            continue
        gateways = [
            t
            for t in allowed
            if any(game_map.continent_of(n) == target for n in game_map.successors(t))
        ]
        if not gateways:
            return None
        if not chosen.intersection(gateways):
            chosen.add(gateways[int(rng.integers(len(gateways)))])

    # Pad up to the territory minimum
    min_territories = max(_values(intent, C.C6), default=0)
    spare = [t for t in allowed if t not in chosen]
    rng.shuffle(spare)
    while len(chosen) < min_territories and spare:
        chosen.add(spare.pop())
    if len(chosen) < min_territories or len(chosen) > DRAFT_TROOPS:
        return None

    # One troop each, then stack the rest
    remaining = DRAFT_TROOPS - len(chosen)
    territories = sorted(chosen)
    heavy_need = max(_values(intent, C.C8), default=0)
    continent_need = max(_values(intent, C.C5), default=0)
    for heavy in rng.permutation(territories):
        heavy = int(heavy)
        in_continent = sum(
            1 for t in territories if game_map.continent_of(t) == game_map.continent_of(heavy)
        )
        extra = max(heavy_need - 1, continent_need - in_continent, 0)
        if extra > remaining:
            continue
        draft = {t: 1 for t in territories}
        draft[heavy] += extra
        for _ in range(remaining - extra):
            draft[territories[int(rng.integers(len(territories)))]] += 1
        return draft
    return None


def find_selections(
    intent: IntentSpec,
    state: GameState,
    rng: np.random.Generator,
    game_map: GameMap | None = None,
) -> dict[str, int]:
    """Search for a 14-troop draft satisfying every constraint of ``intent``.

    Candidate sets of occupied continents are tried in random order; within a
    set, required territories are placed first, then the troop surplus.

    Raises:
        InfeasibleIntentError: If no placement satisfies all constraints
    """
    game_map = game_map or build_canonical_map()
    n = game_map.n_continents
    required = {game_map.continent_index(v) for v in _values(intent, C.C1) + _values(intent, C.C4)}
    excluded = {game_map.continent_index(v) for v in _values(intent, C.C2)}
    at_least = max(_values(intent, C.C7), default=1)
    at_most = min(_values(intent, C.C9), default=n)

    candidates = [
        subset
        for size in range(max(at_least, 1), min(at_most, n) + 1)
        for subset in combinations(range(n), size)
        if required <= set(subset) and not excluded & set(subset)
    ]
    for index in rng.permutation(len(candidates)):
        draft = _draft_for(candidates[int(index)], intent, state, game_map, rng)
        if draft is None:
            continue
        selections = {game_map.territories[t]: count for t, count in sorted(draft.items())}
        drafted = apply_selections(state, selections, game_map)
        if check_against_selections(intent, drafted, EGO, game_map).is_clean:
            return selections
    raise InfeasibleIntentError(
        f"No 14-troop draft satisfies {[str(c) for c in intent.active_constraints]}"
    )


# ============== Rendering ==============


def realize(
    intent: IntentSpec,
    state: GameState,
    bank: TemplateBank,
    rng: np.random.Generator,
    map_id: int = 1,
    game_map: GameMap | None = None,
    include_neutral: bool = False,
) -> CorpusExample:
    """Turn an intent into a synthetic example on a pre-draft state.

    Args:
        intent: A consistent intent
        state: Pre-draft state of map ``map_id`` (ego player drafting)
        bank: Template bank
        rng: Seeded random source
        map_id: Initialization id recorded in the example
        game_map: Board topology (canonical map by default)
        include_neutral: Also render sentences for neutral goal buckets

    Returns:
        A synthetic CorpusExample whose selections satisfy every constraint

    Raises:
        InfeasibleIntentError: If no draft satisfies the constraints
    """
    selections = find_selections(intent, state, rng, game_map)
    sentences = [bank.render_constraint(c, rng) for c in intent.active_constraints]
    sentences.extend(
        bank.render_goal(goal, rng)
        for goal in intent.goals
        if include_neutral or goal.bucket != NEUTRAL_BUCKET
    )
    order = rng.permutation(len(sentences))
    text = " ".join(sentences[int(i)] for i in order)
    return CorpusExample.from_intent(map_id, text, selections, intent, Source.SYNTHETIC)


def generate_corpus(
    n: int,
    seed: int = 0,
    maps: list[int] | None = None,
    bank: TemplateBank | None = None,
    retry_budget: int | None = None,
    include_neutral: bool = False,
    game_map: GameMap | None = None,
) -> list[CorpusExample]:
    """Generate ``n`` unique, self-validating synthetic examples.

    Example ``i`` draws from ``default_rng([seed, i])`` so the output depends
    only on (n, seed, maps, bank).

    Raises:
        InfeasibleIntentError: If an example exhausts its retry budget
    """
    settings = get_settings()
    game_map = game_map or build_canonical_map()
    bank = bank or get_template_bank()
    retry_budget = retry_budget or settings.generation_retry_budget
    inits = get_initializations()
    maps = maps or sorted(inits)
    starts = {map_id: load_initialization(inits[map_id], game_map) for map_id in maps}

    examples = []
    seen: set[tuple] = set()
    for index in range(n):
        rng = np.random.default_rng([seed, index])
        for _ in range(retry_budget):
            map_id = maps[int(rng.integers(len(maps)))]
            intent = sample_intent(rng)
            key = _intent_key(intent)
            if key in seen:
                continue
            try:
                example = realize(
                    intent, starts[map_id], bank, rng, map_id, game_map, include_neutral
                )
            except InfeasibleIntentError:
                logger.debug(f"Example {index}: infeasible intent on map {map_id}, retrying")
                continue
            seen.add(key)
            examples.append(example)
            break
        else:
            raise InfeasibleIntentError(
                f"Example {index}: no feasible intent within {retry_budget} attempts"
            )

    logger.info(f"Generated {len(examples)} synthetic examples (seed={seed})")
    return examples


def constraint_histogram(examples: list[CorpusExample]) -> dict[str, int]:
    """Count of non-null constraints per class, in class order."""
    counts = Counter(c.class_id for e in examples for c in e.constraints if c is not None)
    return {class_id.value: counts.get(class_id, 0) for class_id in ConstraintClass}
