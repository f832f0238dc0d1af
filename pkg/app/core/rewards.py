"""Reward functions over single transitions, from the ego player's perspective."""

from enum import StrEnum

from app.core.game_engine import EGO, Action, GameState, Outcome, Phase, is_terminal
from app.core.risk_map import GameMap, build_canonical_map

WIN_WEIGHT = 10.0
LOSS_PENALTY = -10.0


class RewardKind(StrEnum):
    SPARSE = "sparse"
    TURN_COUNT = "turn_count"
    SURVIVAL = "survival"
    RULES_BASED = "rules_based"


def _entered(prev: GameState, next_state: GameState, outcome: Outcome) -> bool:
    return is_terminal(prev) == Outcome.ONGOING and is_terminal(next_state) == outcome


def _completed_ego_turn(prev: GameState) -> bool:
    # every Freemove action ends the mover's turn
    return prev.current_player == EGO and prev.phase == Phase.FREEMOVE


def _rules_based(
    prev: GameState, action: Action, next_state: GameState, game_map: GameMap
) -> float:
    if prev.current_player != EGO:
        return 0.0
    value = 1.0
    if next_state.phase != prev.phase or next_state.current_player != prev.current_player:
        value += 1.0
    if not action.is_phase_end:
        if action.p == Phase.ATTACK:
            target = game_map.index(action.t)
            if prev.owner[target] != EGO and next_state.owner[target] == EGO:
                value += 1.0
        else:
            value += 1.0
    if _entered(prev, next_state, Outcome.EGO_WIN):
        value += WIN_WEIGHT
    return value


def reward(
    prev: GameState,
    action: Action,
    next_state: GameState,
    kind: RewardKind | str,
    game_map: GameMap | None = None,
) -> float:
    """Scalar reward for the transition ``prev --action--> next_state``.

    Sparse: +1 on entering EgoWin, -1 on entering EgoLoss.
    TurnCount: +1 when the ego player completes a turn.
    Survival: TurnCount plus -10 on entering EgoLoss.
    RulesBased (ego actions only): +1 for the action, +1 when it completes a
    phase, +1 when it succeeds in-phase (placement, conquest, transfer) and
    +10 on entering EgoWin.
    """
    kind = RewardKind(kind)
    game_map = game_map or build_canonical_map()

    if kind == RewardKind.SPARSE:
        if _entered(prev, next_state, Outcome.EGO_WIN):
            return 1.0
        if _entered(prev, next_state, Outcome.EGO_LOSS):
            return -1.0
        return 0.0

    if kind in (RewardKind.TURN_COUNT, RewardKind.SURVIVAL):
        value = 1.0 if _completed_ego_turn(prev) else 0.0
        if kind == RewardKind.SURVIVAL and _entered(prev, next_state, Outcome.EGO_LOSS):
            value += LOSS_PENALTY
        return value

    return _rules_based(prev, action, next_state, game_map)
