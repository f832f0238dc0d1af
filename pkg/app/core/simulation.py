"""Headless rollouts: scripted ego policies against the heuristic opponents."""

from collections.abc import Callable
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, Field

from app.core.game_engine import (
    EGO,
    Action,
    GameState,
    Outcome,
    apply_action,
    get_initializations,
    is_terminal,
    legal_actions,
    load_initialization,
    new_game,
)
from app.core.opponent import opponent_heuristic
from app.core.rewards import RewardKind, reward
from app.core.risk_map import GameMap, build_canonical_map
from app.utils.logger import get_logger

logger = get_logger(__name__)

Policy = Callable[[GameState, np.random.Generator, GameMap], Action]


class PolicyName(StrEnum):
    RANDOM = "random"
    HEURISTIC = "heuristic"


def random_policy(state: GameState, rng: np.random.Generator, game_map: GameMap) -> Action:
    """Uniform choice over the legal actions."""
    actions = legal_actions(state, game_map)
    return actions[int(rng.integers(len(actions)))]


def heuristic_policy(state: GameState, rng: np.random.Generator, game_map: GameMap) -> Action:
    return opponent_heuristic(state, rng, game_map)


POLICIES: dict[PolicyName, Policy] = {
    PolicyName.RANDOM: random_policy,
    PolicyName.HEURISTIC: heuristic_policy,
}


class EpisodeResult(BaseModel):
    outcome: Outcome
    total_reward: float
    turns: int
    steps: int


class SimulationSummary(BaseModel):
    """Aggregate statistics over a batch of episodes."""

    init_id: int | None
    policy: PolicyName
    reward_kind: RewardKind
    seed: int
    episodes: int
    wins: int = 0
    losses: int = 0
    draws: int = 0
    mean_reward: float = 0.0
    mean_turns: float = 0.0
    rewards: list[float] = Field(default_factory=list)


def run_episode(
    state: GameState,
    policy: PolicyName | str,
    reward_kind: RewardKind | str,
    rng: np.random.Generator,
    game_map: GameMap | None = None,
) -> EpisodeResult:
    """Play one game to its end.

    The ego player follows ``policy``; opponents (including their draft on an
    empty board) follow the heuristic. Rewards accumulate over every
    transition, whichever player moved.
    """
    game_map = game_map or build_canonical_map()
    ego_policy = POLICIES[PolicyName(policy)]
    total = 0.0
    steps = 0

    while is_terminal(state) == Outcome.ONGOING:
        if state.current_player == EGO:
            action = ego_policy(state, rng, game_map)
        else:
            action = opponent_heuristic(state, rng, game_map)
        next_state = apply_action(state, action, rng, game_map)
        total += reward(state, action, next_state, reward_kind, game_map)
        state = next_state
        steps += 1

    return EpisodeResult(
        outcome=is_terminal(state),
        total_reward=total,
        turns=state.turn_number,
        steps=steps,
    )


def simulate(
    init_id: int | None,
    episodes: int,
    policy: PolicyName | str = PolicyName.RANDOM,
    reward_kind: RewardKind | str = RewardKind.SPARSE,
    seed: int = 0,
    game_map: GameMap | None = None,
) -> SimulationSummary:
    """Run a batch of seeded episodes.

    Args:
        init_id: Map initialization id, or None for an empty board
        episodes: Number of games
        policy: Ego policy name
        reward_kind: Reward function
        seed: Master seed; episode ``i`` uses ``default_rng([seed, i])``

    Returns:
        SimulationSummary with outcome counts and mean reward / turns

    Raises:
        KeyError: If ``init_id`` is not a known initialization
    """
    game_map = game_map or build_canonical_map()
    if init_id is not None:
        inits = get_initializations()
        if init_id not in inits:
            raise KeyError(f"Unknown map initialization id: {init_id}")
        start = load_initialization(inits[init_id], game_map)
    else:
        start = new_game(game_map)

    summary = SimulationSummary(
        init_id=init_id,
        policy=PolicyName(policy),
        reward_kind=RewardKind(reward_kind),
        seed=seed,
        episodes=episodes,
    )
    turns = []
    for episode in range(episodes):
        rng = np.random.default_rng([seed, episode])
        result = run_episode(start, policy, reward_kind, rng, game_map)
        summary.rewards.append(result.total_reward)
        turns.append(result.turns)
        if result.outcome == Outcome.EGO_WIN:
            summary.wins += 1
        elif result.outcome == Outcome.EGO_LOSS:
            summary.losses += 1
        else:
            summary.draws += 1
        logger.debug(f"Episode {episode}: {result.outcome} reward={result.total_reward}")

    if episodes:
        summary.mean_reward = float(np.mean(summary.rewards))
        summary.mean_turns = float(np.mean(turns))
    logger.info(
        f"Simulated {episodes} episodes ({summary.policy}): "
        f"{summary.wins} wins, {summary.losses} losses, {summary.draws} draws"
    )
    return summary
