"""Constraint evaluation against game states and intent consistency checks."""

from collections import defaultdict

from pydantic import BaseModel, Field

from app.core.game_engine import EGO, GameState
from app.core.intent import Constraint, ConstraintClass, IntentSpec
from app.core.risk_map import GameMap, build_canonical_map

C = ConstraintClass


class Conflict(BaseModel):
    """One violated rule and the constraint slots involved."""

    slots: list[int]
    rule_id: str
    message: str


class ConflictReport(BaseModel):
    conflicts: list[Conflict] = Field(default_factory=list)

    @property
    def is_clean(self) -> bool:
        return not self.conflicts


def _continent_troops(state: GameState, player: int, game_map: GameMap) -> list[int]:
    totals = [0] * game_map.n_continents
    for i, owner in enumerate(state.owner):
        if owner == player:
            totals[game_map.continent_of(i)] += state.troops[i]
    return totals


def evaluate_constraint(
    c: Constraint, state: GameState, player: int = EGO, game_map: GameMap | None = None
) -> bool:
    """Whether ``player``'s position in ``state`` satisfies constraint ``c``.

    Continent classes: C1 troops on the continent, C2 none there, C3 troops there
    or an owned territory with an edge into it, C4 every border territory owned.
    Numeric classes: C5 some continent holds at least v troops, C6 at least v
    territories, C7 troops on at least v continents, C8 some territory holds at
    least v troops, C9 troops on at most v continents.
    """
    game_map = game_map or build_canonical_map()
    owned = state.owned_by(player)
    per_continent = _continent_troops(state, player, game_map)
    occupied = sum(1 for total in per_continent if total > 0)

    if c.class_id in (C.C1, C.C2, C.C3, C.C4):
        continent = game_map.continent_index(c.value)
        present = per_continent[continent] > 0
        if c.class_id == C.C1:
            return present
        if c.class_id == C.C2:
            return not present
        if c.class_id == C.C3:
            return present or any(
                game_map.continent_of(t) == continent
                for s in owned
                for t in game_map.successors(s)
            )
        return all(state.owner[t] == player for t in game_map.border_territories(continent))

    if c.class_id == C.C5:
        return max(per_continent) >= c.value
    if c.class_id == C.C6:
        return len(owned) >= c.value
    if c.class_id == C.C7:
        return occupied >= c.value
    if c.class_id == C.C8:
        return max((state.troops[i] for i in owned), default=0) >= c.value
    return occupied <= c.value


def check_consistency(spec: IntentSpec, n_continents: int = 5) -> ConflictReport:
    """Flag internally contradictory constraint sets.

    Rules: duplicate constraints; C1 and C2 on one continent; C4 and C2 on one
    continent; a C7 minimum above a C9 maximum; a C7 minimum above the number of
    continents C2 leaves open; more C1 continents than a C9 maximum.
    """
    conflicts = []
    slots_by_constraint: dict[Constraint, list[int]] = defaultdict(list)
    by_class: dict[ConstraintClass, list[tuple[int, Constraint]]] = defaultdict(list)
    for slot, c in enumerate(spec.constraints):
        if c is None:
            continue
        slots_by_constraint[c].append(slot)
        by_class[c.class_id].append((slot, c))

    for c, slots in slots_by_constraint.items():
        if len(slots) > 1:
            conflicts.append(
                Conflict(slots=slots, rule_id="duplicate", message=f"{c} appears {len(slots)} times")
            )

    excluded = {c.value: slot for slot, c in by_class[C.C2]}
    for class_id, rule_id in ((C.C1, "have_and_avoid"), (C.C4, "protect_and_avoid")):
        for slot, c in by_class[class_id]:
            if c.value in excluded:
                conflicts.append(
                    Conflict(
                        slots=[slot, excluded[c.value]],
                        rule_id=rule_id,
                        message=f"{c} contradicts {C.C2}({c.value})",
                    )
                )

    for min_slot, at_least in by_class[C.C7]:
        for max_slot, at_most in by_class[C.C9]:
            if at_least.value > at_most.value:
                conflicts.append(
                    Conflict(
                        slots=[min_slot, max_slot],
                        rule_id="min_above_max_continents",
                        message=f"troops on at least {at_least.value} but at most "
                        f"{at_most.value} continents",
                    )
                )

        open_continents = n_continents - len(excluded)
        if at_least.value > open_continents:
            conflicts.append(
                Conflict(
                    slots=[min_slot, *sorted(excluded.values())],
                    rule_id="min_above_open_continents",
                    message=f"troops on at least {at_least.value} continents but only "
                    f"{open_continents} are allowed",
                )
            )

    required = sorted({c.value for _, c in by_class[C.C1]})
    for max_slot, at_most in by_class[C.C9]:
        if len(required) > at_most.value:
            conflicts.append(
                Conflict(
                    slots=[slot for slot, _ in by_class[C.C1]] + [max_slot],
                    rule_id="required_above_max_continents",
                    message=f"troops required on {len(required)} continents but at most "
                    f"{at_most.value} allowed",
                )
            )

    return ConflictReport(conflicts=conflicts)


def check_against_selections(
    spec: IntentSpec,
    state: GameState,
    player: int = EGO,
    game_map: GameMap | None = None,
) -> ConflictReport:
    """One conflict per non-null constraint that the drafted position violates."""
    game_map = game_map or build_canonical_map()
    conflicts = [
        Conflict(
            slots=[slot],
            rule_id="unsatisfied",
            message=f"{c} not satisfied: {c.describe()}",
        )
        for slot, c in enumerate(spec.constraints)
        if c is not None and not evaluate_constraint(c, state, player, game_map)
    ]
    return ConflictReport(conflicts=conflicts)
