"""Scripted opponent policy.

The policy is deterministic: every tie is broken by the lowest territory index
(or lowest edge pair) in canonical order. It works for any seat, so the
simulator also uses it as the "heuristic" ego policy.
"""

import numpy as np

from app.core.combat import round_win_probability
from app.core.exceptions import IllegalActionError
from app.core.game_engine import (
    Action,
    GameState,
    Outcome,
    Phase,
    attack_edges,
    draftable_territories,
    is_terminal,
)
from app.core.risk_map import GameMap, build_canonical_map

# Below this many territories the drafter spreads onto empty ground.
SPREAD_TERRITORIES = 5
ATTACK_THRESHOLD = 0.5


def _continent_troops(state: GameState, player: int, game_map: GameMap) -> list[int]:
    totals = [0] * game_map.n_continents
    for i, owner in enumerate(state.owner):
        if owner == player:
            totals[game_map.continent_of(i)] += state.troops[i]
    return totals


def _draft_target(state: GameState, player: int, game_map: GameMap) -> int:
    """Continent concentration: the empty territory whose continent holds most of our troops."""
    owned = state.owned_by(player)
    empty = [i for i in draftable_territories(state, player) if state.owner[i] is None]
    if empty and len(owned) < SPREAD_TERRITORIES:
        totals = _continent_troops(state, player, game_map)
        return min(empty, key=lambda i: (-totals[game_map.continent_of(i)], i))
    candidates = owned or draftable_territories(state, player)
    return min(candidates, key=lambda i: (state.troops[i], i))


def _is_frontier(state: GameState, territory: int, player: int, game_map: GameMap) -> bool:
    neighbours = game_map.successors(territory) + game_map.predecessors(territory)
    return any(state.owner[n] != player for n in neighbours)


def _reinforce_target(state: GameState, player: int, game_map: GameMap) -> int:
    """Strengthen the weakest border: the frontier territory with the fewest troops."""
    owned = state.owned_by(player)
    frontier = [i for i in owned if _is_frontier(state, i, player, game_map)]
    return min(frontier or owned, key=lambda i: (state.troops[i], i))


def _best_attack(
    state: GameState, player: int, game_map: GameMap
) -> tuple[int, int] | None:
    candidates = []
    for s, t in attack_edges(state, player, game_map):
        p = round_win_probability(state.troops[s], state.troops[t])
        if p >= ATTACK_THRESHOLD:
            candidates.append((-p, s, t))
    if not candidates:
        return None
    _, s, t = min(candidates)
    return s, t


def opponent_heuristic(
    state: GameState,
    rng: np.random.Generator | None = None,
    game_map: GameMap | None = None,
) -> Action:
    """Choose the scripted action for the player to move.

    Draft: continent concentration while holding fewer than five territories,
    then stack the weakest holding. Reinforce: weakest frontier territory.
    Attack: the edge with the best single-round win probability, taken only when
    that probability is at least 0.5, moving everything but one troop.
    Freemove: none.

    Args:
        state: Current state (any seat may be to move)
        rng: Accepted for interface symmetry with stochastic policies; unused
        game_map: Board topology (canonical map by default)

    Returns:
        A legal action
    """
    if is_terminal(state) != Outcome.ONGOING:
        raise IllegalActionError("The game is over")
    game_map = game_map or build_canonical_map()
    player = state.current_player
    names = game_map.territories

    if state.phase == Phase.DRAFT:
        return Action(p=Phase.DRAFT, s=names[_draft_target(state, player, game_map)])

    if state.phase == Phase.REINFORCE:
        return Action(p=Phase.REINFORCE, s=names[_reinforce_target(state, player, game_map)])

    if state.phase == Phase.ATTACK:
        edge = _best_attack(state, player, game_map)
        if edge is None:
            return Action.end(Phase.ATTACK)
        s, t = edge
        return Action(p=Phase.ATTACK, s=names[s], t=names[t], tr=state.troops[s] - 1)

    return Action.end(Phase.FREEMOVE)
