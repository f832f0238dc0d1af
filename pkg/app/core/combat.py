"""Dice combat: sampled battles and the exact per-round outcome table."""

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np
from pydantic import BaseModel, Field

from app.core.exceptions import InvalidTroopCountError

MAX_ATTACK_DICE = 3
MAX_DEFEND_DICE = 2
DIE_FACES = 6


class CombatRound(BaseModel):
    """One roll-off between attacker and defender."""

    attacker_dice: int
    defender_dice: int
    attacker_losses: int
    defender_losses: int


class BattleOutcome(BaseModel):
    """Result of a battle fought to completion."""

    attacker_losses: int = Field(..., ge=0)
    defender_losses: int = Field(..., ge=0)
    conquered: bool
    troops_moved: int = Field(..., ge=0)
    rounds: list[CombatRound] = Field(default_factory=list)


def attacker_dice_for(troops: int) -> int:
    """Dice rolled by an attacker; one troop always stays on the source."""
    return min(MAX_ATTACK_DICE, troops - 1)


def defender_dice_for(troops: int) -> int:
    return min(MAX_DEFEND_DICE, troops)


def compare_rolls(attack: list[int], defend: list[int]) -> tuple[int, int]:
    """Compare sorted rolls pairwise; the defender wins ties.

    Returns:
        (attacker_losses, defender_losses)
    """
    attacker_losses = defender_losses = 0
    for a, d in zip(sorted(attack, reverse=True), sorted(defend, reverse=True)):
        if a > d:
            defender_losses += 1
        else:
            attacker_losses += 1
    return attacker_losses, defender_losses


def roll_combat_round(
    attacker_dice: int, defender_dice: int, rng: np.random.Generator
) -> CombatRound:
    """Roll one combat round with the given dice counts."""
    attack = [int(x) for x in rng.integers(1, DIE_FACES + 1, size=attacker_dice)]
    defend = [int(x) for x in rng.integers(1, DIE_FACES + 1, size=defender_dice)]
    attacker_losses, defender_losses = compare_rolls(attack, defend)
    return CombatRound(
        attacker_dice=attacker_dice,
        defender_dice=defender_dice,
        attacker_losses=attacker_losses,
        defender_losses=defender_losses,
    )


def resolve_battle(
    att_troops: int, def_troops: int, tr: int, rng: np.random.Generator
) -> BattleOutcome:
    """Fight combat rounds until the attacker is down to one troop or the defender is gone.

    Args:
        att_troops: Troops on the attacking territory (at least 2)
        def_troops: Troops on the defending territory (at least 1)
        tr: Troops to move in on conquest (1 .. att_troops - 1)
        rng: Seeded random source

    Returns:
        BattleOutcome; on conquest ``troops_moved`` is ``tr`` clamped to the
        surviving attackers minus the one that stays behind.

    Raises:
        InvalidTroopCountError: If the preconditions are violated
    """
    if att_troops < 2 or def_troops < 1 or not 1 <= tr <= att_troops - 1:
        raise InvalidTroopCountError(
            f"Invalid battle: attacker={att_troops}, defender={def_troops}, tr={tr}"
        )

    # Dice shrink as the armies do
    attackers, defenders = att_troops, def_troops
    rounds = []
    while attackers >= 2 and defenders >= 1:
        combat_round = roll_combat_round(
            attacker_dice_for(attackers), defender_dice_for(defenders), rng
        )
        attackers -= combat_round.attacker_losses
        defenders -= combat_round.defender_losses
        rounds.append(combat_round)

    conquered = defenders == 0
    return BattleOutcome(
        attacker_losses=att_troops - attackers,
        defender_losses=def_troops - defenders,
        conquered=conquered,
        troops_moved=min(tr, attackers - 1) if conquered else 0,
        rounds=rounds,
    )


@lru_cache
def combat_round_distribution(att_dice: int, def_dice: int) -> dict[tuple[int, int], Fraction]:
    """Exact outcome table of a single combat round.

    Enumerates all 6^(att_dice + def_dice) ordered rolls.

    Returns:
        Mapping (attacker_losses, defender_losses) -> exact probability
    """
    if not 1 <= att_dice <= MAX_ATTACK_DICE or not 1 <= def_dice <= MAX_DEFEND_DICE:
        raise InvalidTroopCountError(f"Dice counts out of range: {att_dice}v{def_dice}")

    faces = range(1, DIE_FACES + 1)
    counts: Counter[tuple[int, int]] = Counter()
    for roll in product(faces, repeat=att_dice + def_dice):
        counts[compare_rolls(list(roll[:att_dice]), list(roll[att_dice:]))] += 1

    total = DIE_FACES ** (att_dice + def_dice)
    return {outcome: Fraction(n, total) for outcome, n in sorted(counts.items())}


def round_win_probability(att_troops: int, def_troops: int) -> float:
    """Probability that one round costs the defender more troops than the attacker.

    An unoccupied target (``def_troops == 0``) is taken without a fight and has
    probability 1; an attacker that cannot roll has probability 0.
    """
    if def_troops == 0:
        return 1.0
    if att_troops < 2:
        return 0.0
    table = combat_round_distribution(attacker_dice_for(att_troops), defender_dice_for(def_troops))
    return float(sum(p for (a, d), p in table.items() if d > a))
