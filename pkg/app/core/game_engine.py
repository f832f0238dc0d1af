"""Deterministic Risk game engine: state, actions, phases and transitions.

Player 0 is the ego player (the human/agent, "white"); players 1 and 2 are the
grey and black opponents. A game starts either from a fixed map
initialization (opponents already deployed, ego drafting) or from an empty
board where the opponents draft first. After the draft every player runs
Reinforce -> Attack -> Freemove in turn order 0, 1, 2; ``turn_number`` counts
completed rounds.
"""

import json
from enum import StrEnum
from functools import lru_cache
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.config import get_settings
from app.core.combat import BattleOutcome, resolve_battle
from app.core.exceptions import IllegalActionError, InvalidInitializationError
from app.core.risk_map import DATA_DIR, GameMap, build_canonical_map
from app.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_INITIALIZATIONS_FILE = DATA_DIR / "initializations.json"

EGO, GREY, BLACK = 0, 1, 2
N_PLAYERS = 3
PLAYER_NAMES = {EGO: "white", GREY: "grey", BLACK: "black"}
DRAFT_TROOPS = 14
DRAFT_ORDER = (GREY, BLACK, EGO)
TURN_CAP = 100
MIN_REINFORCEMENTS = 3


class Phase(StrEnum):
    DRAFT = "Draft"
    REINFORCE = "Reinforce"
    ATTACK = "Attack"
    FREEMOVE = "Freemove"


PHASE_ORDER = (Phase.DRAFT, Phase.REINFORCE, Phase.ATTACK, Phase.FREEMOVE)


class Outcome(StrEnum):
    ONGOING = "Ongoing"
    EGO_WIN = "EgoWin"
    EGO_LOSS = "EgoLoss"
    DRAW = "Draw"


class GameState(BaseModel):
    """Complete game state; indices follow the canonical territory order."""

    owner: list[int | None]
    troops: list[int]
    phase: Phase
    current_player: int = Field(..., ge=0, lt=N_PLAYERS)
    troops_to_place: list[int]
    turn_number: int = Field(default=0, ge=0)
    players_alive: list[bool]
    phase_budget: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_invariants(self) -> "GameState":
        if len(self.owner) != len(self.troops):
            raise ValueError("owner and troops must have the same length")
        for i, (owner, troops) in enumerate(zip(self.owner, self.troops)):
            if owner is None and troops != 0:
                raise ValueError(f"unowned territory {i} holds {troops} troops")
            if owner is not None and (troops < 1 or not 0 <= owner < N_PLAYERS):
                raise ValueError(f"territory {i} owned by {owner} holds {troops} troops")
        if len(self.troops_to_place) != N_PLAYERS or len(self.players_alive) != N_PLAYERS:
            raise ValueError(f"per-player fields must have {N_PLAYERS} entries")
        if any(n < 0 for n in self.troops_to_place):
            raise ValueError("troops_to_place must be non-negative")
        return self

    def owned_by(self, player: int) -> list[int]:
        """Territory indices owned by a player, in canonical order."""
        return [i for i, owner in enumerate(self.owner) if owner == player]

    def player_troops(self, player: int) -> int:
        return sum(t for t, owner in zip(self.troops, self.owner) if owner == player)


class Action(BaseModel):
    """The four-item action tuple <p, s, t, tr>.

    A phase-end action carries only ``p`` (``s`` is None).
    """

    model_config = {"frozen": True}

    p: Phase
    s: str | None = None
    t: str | None = None
    tr: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_shape(self) -> "Action":
        moves = self.p in (Phase.ATTACK, Phase.FREEMOVE) and self.s is not None
        if moves and (self.t is None or self.tr is None):
            raise ValueError(f"{self.p} actions require a target and a troop count")
        if not moves and (self.t is not None or self.tr is not None):
            raise ValueError(f"{self.p} actions take no target or troop count")
        return self

    @property
    def is_phase_end(self) -> bool:
        return self.s is None

    @classmethod
    def end(cls, phase: Phase) -> "Action":
        return cls(p=phase)


class MapInitialization(BaseModel):
    """A fixed pre-draft deployment of both opponents."""

    id: int = Field(..., ge=1)
    grey_deployments: dict[str, int]
    black_deployments: dict[str, int]
    source: str = "synthetic"


# ============== Initializations ==============


def load_initializations(path: str | Path) -> dict[int, MapInitialization]:
    """Load a ``format_version: 1`` initialization file keyed by map id."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("format_version") != 1:
        raise ValueError(f"Unsupported initialization format_version: {data.get('format_version')}")
    inits = {}
    for record in data["initializations"]:
        init = MapInitialization(
            id=record["id"],
            grey_deployments=record["grey"],
            black_deployments=record["black"],
            source=record.get("source", "synthetic"),
        )
        inits[init.id] = init
    return inits


@lru_cache
def get_initializations() -> dict[int, MapInitialization]:
    """Get the cached map initializations (packaged file unless overridden)."""
    settings = get_settings()
    inits = load_initializations(settings.initializations_file or DEFAULT_INITIALIZATIONS_FILE)
    logger.info(f"Loaded {len(inits)} map initializations")
    return inits


def load_initialization(init: MapInitialization, game_map: GameMap | None = None) -> GameState:
    """Build the pre-draft state for a map initialization.

    Raises:
        InvalidInitializationError: On unknown territories, non-positive counts,
            overlapping deployments or totals other than 14
    """
    game_map = game_map or build_canonical_map()
    for name, deployment in (("grey", init.grey_deployments), ("black", init.black_deployments)):
        unknown = set(deployment) - set(game_map.territories)
        if unknown:
            raise InvalidInitializationError(f"{name} deploys on unknown territories {sorted(unknown)}")
        if any(n < 1 for n in deployment.values()):
            raise InvalidInitializationError(f"{name} deployments must be positive")
        total = sum(deployment.values())
        if total != DRAFT_TROOPS:
            raise InvalidInitializationError(
                f"{name} deploys {total} troops in map {init.id}, expected {DRAFT_TROOPS}"
            )
    overlap = set(init.grey_deployments) & set(init.black_deployments)
    if overlap:
        raise InvalidInitializationError(f"grey and black both deploy on {sorted(overlap)}")

    owner: list[int | None] = [None] * game_map.n_territories
    troops = [0] * game_map.n_territories
    for player, deployment in ((GREY, init.grey_deployments), (BLACK, init.black_deployments)):
        for name, count in deployment.items():
            i = game_map.index(name)
            owner[i] = player
            troops[i] = count

    return GameState(
        owner=owner,
        troops=troops,
        phase=Phase.DRAFT,
        current_player=EGO,
        troops_to_place=[DRAFT_TROOPS, 0, 0],
        players_alive=[True] * N_PLAYERS,
        phase_budget=DRAFT_TROOPS,
    )


def new_game(game_map: GameMap | None = None) -> GameState:
    """Empty board; grey and black draft before the ego player."""
    game_map = game_map or build_canonical_map()
    return GameState(
        owner=[None] * game_map.n_territories,
        troops=[0] * game_map.n_territories,
        phase=Phase.DRAFT,
        current_player=DRAFT_ORDER[0],
        troops_to_place=[DRAFT_TROOPS] * N_PLAYERS,
        players_alive=[True] * N_PLAYERS,
        phase_budget=DRAFT_TROOPS,
    )


# ============== Rules ==============


def reinforcement_count(state: GameState, player: int, game_map: GameMap | None = None) -> int:
    """Reinforcements: max(3, territories // 3) plus bonuses of fully owned continents."""
    if not state.players_alive[player]:
        return 0
    game_map = game_map or build_canonical_map()
    owned = state.owned_by(player)
    bonus = sum(
        continent.bonus
        for c_index, continent in enumerate(game_map.continents)
        if all(state.owner[t] == player for t in game_map.continent_members(c_index))
    )
    return max(MIN_REINFORCEMENTS, len(owned) // 3) + bonus


def draftable_territories(state: GameState, player: int) -> list[int]:
    """Territories a player may draft onto: unowned or already their own."""
    return [i for i, owner in enumerate(state.owner) if owner is None or owner == player]


def attack_edges(
    state: GameState, player: int, game_map: GameMap | None = None
) -> list[tuple[int, int]]:
    """Edges (canonical order) along which ``player`` could attack in this position."""
    game_map = game_map or build_canonical_map()
    return [
        (s, t)
        for s, t in game_map.edge_pairs
        if state.owner[s] == player and state.owner[t] != player and state.troops[s] >= 2
    ]


def freemove_edges(
    state: GameState, player: int, game_map: GameMap | None = None
) -> list[tuple[int, int]]:
    """Edges (canonical order) along which ``player`` could transfer troops."""
    game_map = game_map or build_canonical_map()
    return [
        (s, t)
        for s, t in game_map.edge_pairs
        if state.owner[s] == player and state.owner[t] == player and state.troops[s] >= 2
    ]


def is_terminal(state: GameState) -> Outcome:
    """Game outcome from the ego player's perspective.

    The draft is never terminal (the ego player owns nothing until it drafts).
    """
    if state.phase == Phase.DRAFT:
        return Outcome.ONGOING
    owned = sum(1 for owner in state.owner if owner == EGO)
    if owned == len(state.owner):
        return Outcome.EGO_WIN
    if owned == 0:
        return Outcome.EGO_LOSS
    if state.turn_number >= TURN_CAP:
        return Outcome.DRAW
    return Outcome.ONGOING


def legal_actions(state: GameState, game_map: GameMap | None = None) -> list[Action]:
    """All actions legal for the current player.

    Draft and Reinforce list one single-troop placement per eligible territory
    and advance automatically once the budget is spent. Attack and Freemove
    list every (edge, troop count) pair plus the phase-end action.
    """
    if is_terminal(state) != Outcome.ONGOING:
        return []
    game_map = game_map or build_canonical_map()
    player = state.current_player
    names = game_map.territories

    if state.phase == Phase.DRAFT:
        if state.troops_to_place[player] == 0:
            return []
        return [Action(p=Phase.DRAFT, s=names[i]) for i in draftable_territories(state, player)]

    if state.phase == Phase.REINFORCE:
        return [Action(p=Phase.REINFORCE, s=names[i]) for i in state.owned_by(player)]

    edges = (
        attack_edges(state, player, game_map)
        if state.phase == Phase.ATTACK
        else freemove_edges(state, player, game_map)
    )
    actions = [
        Action(p=state.phase, s=names[s], t=names[t], tr=tr)
        for s, t in edges
        for tr in range(1, state.troops[s])
    ]
    actions.append(Action.end(state.phase))
    return actions


def _check_legal(state: GameState, action: Action, game_map: GameMap) -> None:
    """Raise IllegalActionError unless ``action`` is in legal_actions(state)."""
    if is_terminal(state) != Outcome.ONGOING:
        raise IllegalActionError("The game is over")
    if action.p != state.phase:
        raise IllegalActionError(f"{action.p} action during {state.phase} phase")

    player = state.current_player
    if action.is_phase_end:
        if state.phase in (Phase.DRAFT, Phase.REINFORCE):
            raise IllegalActionError(
                f"{state.phase} ends only when all {state.troops_to_place[player]} troops are placed"
            )
        return

    try:
        s = game_map.index(action.s)
        t = game_map.index(action.t) if action.t is not None else None
    except ValueError as e:
        raise IllegalActionError(str(e))

    if state.phase == Phase.DRAFT:
        if state.troops_to_place[player] == 0:
            raise IllegalActionError("No troops left to draft")
        if state.owner[s] not in (None, player):
            raise IllegalActionError(f"{action.s} is occupied by another player")
    elif state.phase == Phase.REINFORCE:
        if state.owner[s] != player:
            raise IllegalActionError(f"{action.s} is not owned by player {player}")
    else:
        edges = (
            attack_edges(state, player, game_map)
            if state.phase == Phase.ATTACK
            else freemove_edges(state, player, game_map)
        )
        if (s, t) not in edges:
            raise IllegalActionError(f"No legal {state.phase} from {action.s} to {action.t}")
        if not 1 <= action.tr <= state.troops[s] - 1:
            raise IllegalActionError(
                f"Cannot move {action.tr} troops from {action.s} holding {state.troops[s]}"
            )


# ============== Transitions ==============


def _start_turn(state: GameState, player: int, game_map: GameMap) -> None:
    budget = reinforcement_count(state, player, game_map)
    state.current_player = player
    state.phase = Phase.REINFORCE
    state.troops_to_place[player] = budget
    state.phase_budget = budget


def _end_turn(state: GameState, game_map: GameMap) -> None:
    """Pass play to the next living player; completing a round bumps the turn."""
    current = state.current_player
    for step in range(1, N_PLAYERS + 1):
        candidate = (current + step) % N_PLAYERS
        if state.players_alive[candidate]:
            # wrapping past the last seat completes a round
            if current + step >= N_PLAYERS:
                state.turn_number += 1
            _start_turn(state, candidate, game_map)
            return


def _finish_draft_step(state: GameState, game_map: GameMap) -> None:
    """Hand the draft to the next drafter, or start the first turn."""
    order = list(DRAFT_ORDER)
    position = order.index(state.current_player)
    for player in order[position + 1 :]:
        if state.troops_to_place[player] > 0:
            state.current_player = player
            state.phase_budget = state.troops_to_place[player]
            return
    first = next(p for p in range(N_PLAYERS) if state.players_alive[p])
    _start_turn(state, first, game_map)


def _place(state: GameState, territory: int, player: int) -> None:
    state.owner[territory] = player
    state.troops[territory] += 1
    state.troops_to_place[player] -= 1


def _eliminate_if_beaten(state: GameState, player: int) -> None:
    if player != EGO and not any(owner == player for owner in state.owner):
        state.players_alive[player] = False
        logger.debug(f"Player {PLAYER_NAMES[player]} eliminated")


def apply_action(
    state: GameState,
    action: Action,
    rng: np.random.Generator | None = None,
    game_map: GameMap | None = None,
) -> GameState:
    """Apply a legal action and return the successor state.

    Args:
        state: Current state (left unchanged)
        action: An action from legal_actions(state)
        rng: Seeded random source; required for attacks on occupied territories
        game_map: Board topology (canonical map by default)

    Returns:
        The successor GameState

    Raises:
        IllegalActionError: If the action is not legal in ``state``
    """
    game_map = game_map or build_canonical_map()
    _check_legal(state, action, game_map)
    next_state, _ = _transition(state, action, rng, game_map)
    return next_state


def apply_action_with_outcome(
    state: GameState,
    action: Action,
    rng: np.random.Generator | None = None,
    game_map: GameMap | None = None,
) -> tuple[GameState, BattleOutcome | None]:
    """Same as apply_action, also returning the battle outcome of an attack."""
    game_map = game_map or build_canonical_map()
    _check_legal(state, action, game_map)
    return _transition(state, action, rng, game_map)


def _transition(
    state: GameState,
    action: Action,
    rng: np.random.Generator | None,
    game_map: GameMap,
) -> tuple[GameState, BattleOutcome | None]:
    new = state.model_copy(deep=True)
    player = new.current_player
    outcome = None

    if action.p == Phase.DRAFT:
        _place(new, game_map.index(action.s), player)
        if new.troops_to_place[player] == 0:
            _finish_draft_step(new, game_map)

    elif action.p == Phase.REINFORCE:
        _place(new, game_map.index(action.s), player)
        if new.troops_to_place[player] == 0:
            new.phase = Phase.ATTACK
            new.phase_budget = 0

    elif action.p == Phase.ATTACK:
        if action.is_phase_end:
            new.phase = Phase.FREEMOVE
        else:
            outcome = _attack(new, game_map.index(action.s), game_map.index(action.t), action.tr, rng)

    elif action.is_phase_end:
        _end_turn(new, game_map)

    else:
        s, t = game_map.index(action.s), game_map.index(action.t)
        new.troops[s] -= action.tr
        new.troops[t] += action.tr
        # a single transfer ends the turn
        _end_turn(new, game_map)

    return new, outcome


def _attack(
    state: GameState, s: int, t: int, tr: int, rng: np.random.Generator | None
) -> BattleOutcome:
    attacker = state.current_player
    defender = state.owner[t]

    if defender is None:
        # unoccupied territory: taken without a fight
        state.troops[s] -= tr
        state.owner[t] = attacker
        state.troops[t] = tr
        return BattleOutcome(attacker_losses=0, defender_losses=0, conquered=True, troops_moved=tr)

    if rng is None:
        raise ValueError("A random source is required to resolve an attack")
    outcome = resolve_battle(state.troops[s], state.troops[t], tr, rng)
    state.troops[s] -= outcome.attacker_losses
    state.troops[t] -= outcome.defender_losses
    if outcome.conquered:
        state.owner[t] = attacker
        state.troops[t] = outcome.troops_moved
        state.troops[s] -= outcome.troops_moved
        _eliminate_if_beaten(state, defender)
    return outcome


def apply_selections(
    state: GameState, selections: dict[str, int], game_map: GameMap | None = None
) -> GameState:
    """Apply a complete ego draft at once.

    Args:
        state: A Draft-phase state with the ego player to move
        selections: territory -> troops, summing to the ego player's draft budget

    Returns:
        The state after the draft (first turn under way)

    Raises:
        IllegalActionError: If the selections are not a legal complete draft
    """
    game_map = game_map or build_canonical_map()
    if state.phase != Phase.DRAFT or state.current_player != EGO:
        raise IllegalActionError("Selections apply only while the ego player is drafting")
    budget = state.troops_to_place[EGO]
    total = sum(selections.values())
    if total != budget:
        raise IllegalActionError(f"Selections place {total} troops, expected {budget}")

    new = state.model_copy(deep=True)
    draftable = set(draftable_territories(state, EGO))
    for name in sorted(selections, key=game_map.index):
        count = selections[name]
        territory = game_map.index(name)
        if count < 1:
            raise IllegalActionError(f"Selection on {name} must be positive")
        if territory not in draftable:
            raise IllegalActionError(f"{name} is occupied by another player")
        for _ in range(count):
            _place(new, territory, EGO)
    _finish_draft_step(new, game_map)
    return new


def drafted_state(
    map_id: int, selections: dict[str, int], game_map: GameMap | None = None
) -> GameState:
    """State right after the ego player drafts ``selections`` on map ``map_id``."""
    inits = get_initializations()
    if map_id not in inits:
        raise InvalidInitializationError(f"Unknown map initialization id: {map_id}")
    game_map = game_map or build_canonical_map()
    return apply_selections(load_initialization(inits[map_id], game_map), selections, game_map)
