"""Fixed-length state encoders for downstream learners.

Six encoders turn a GameState into a numeric vector seen from the ego player:

* ``f54``/``f54n``: signed troop counts against each opponent, continent owner
  codes and seven game scalars
* ``f132``/``f132n``: ownership one-hots, troop counts, continent-owner one-hots
  and the same seven scalars
* ``f134n``: ``f132n`` plus the phase and the share of the phase budget spent
* ``f298n``: ``f132n`` plus attack-possible and freemove-possible flags per edge slot

The ``n`` variants are normalized into [0, 1].
"""

from enum import StrEnum

import numpy as np
from pydantic import BaseModel

from app.core.exceptions import UnknownEncoderError
from app.core.game_engine import (
    BLACK,
    DRAFT_TROOPS,
    EGO,
    GREY,
    N_PLAYERS,
    PHASE_ORDER,
    TURN_CAP,
    GameState,
    Phase,
    legal_actions,
)
from app.core.risk_map import GameMap, build_canonical_map

TROOP_SCALE = 40.0
MAX_REINFORCEMENTS = 19
OWNER_CODES = N_PLAYERS  # 0 = nobody, 1..3 = player id + 1


class EncoderId(StrEnum):
    F54 = "f54"
    F54N = "f54n"
    F132 = "f132"
    F132N = "f132n"
    F134N = "f134n"
    F298N = "f298n"


ENCODER_LENGTHS = {
    EncoderId.F54: 54,
    EncoderId.F54N: 54,
    EncoderId.F132: 132,
    EncoderId.F132N: 132,
    EncoderId.F134N: 134,
    EncoderId.F298N: 298,
}


class EncodedState(BaseModel):
    encoder_id: EncoderId
    values: list[float]


def parse_encoder_id(name: str) -> EncoderId:
    try:
        return EncoderId(name.lower())
    except ValueError:
        valid = ", ".join(e.value for e in EncoderId)
        raise UnknownEncoderError(f"Unknown encoder '{name}'; valid encoders: {valid}")


def _continent_owners(state: GameState, game_map: GameMap) -> list[int | None]:
    """Player owning each continent outright, or None."""
    owners = []
    for c in range(game_map.n_continents):
        holders = {state.owner[t] for t in game_map.continent_members(c)}
        owners.append(holders.pop() if len(holders) == 1 else None)
    return owners


def _scalars(state: GameState, normalized: bool, game_map: GameMap) -> list[float]:
    """Areas held, troops to draft, troops to reinforce, players alive, turn, ego to move, phase."""
    ego_turn = state.current_player == EGO
    to_draft = state.troops_to_place[EGO] if state.phase == Phase.DRAFT else 0
    to_reinforce = state.troops_to_place[EGO] if state.phase == Phase.REINFORCE and ego_turn else 0
    values = [
        float(len(state.owned_by(EGO))),
        float(to_draft),
        float(to_reinforce),
        float(sum(state.players_alive)),
        float(state.turn_number),
        float(ego_turn),
        float(PHASE_ORDER.index(state.phase)),
    ]
    if normalized:
        scales = [
            game_map.n_territories,
            DRAFT_TROOPS,
            MAX_REINFORCEMENTS,
            N_PLAYERS,
            TURN_CAP,
            1,
            len(PHASE_ORDER) - 1,
        ]
        values = [min(v / scale, 1.0) for v, scale in zip(values, scales)]
    return values


def _encode_54(state: GameState, normalized: bool, game_map: GameMap) -> np.ndarray:
    troops = np.asarray(state.troops, dtype=float)
    ego = np.array([owner == EGO for owner in state.owner])
    blocks = []
    for opponent in (GREY, BLACK):
        theirs = np.array([owner == opponent for owner in state.owner])
        signed = np.where(ego, troops, np.where(theirs, -troops, 0.0))
        if normalized:
            signed = np.clip((signed / TROOP_SCALE + 1.0) / 2.0, 0.0, 1.0)
        blocks.append(signed)

    codes = np.array(
        [0.0 if owner is None else owner + 1.0 for owner in _continent_owners(state, game_map)]
    )
    if normalized:
        codes = codes / OWNER_CODES
    blocks.append(codes)
    blocks.append(np.array(_scalars(state, normalized, game_map)))
    return np.concatenate(blocks)


def _one_hot_owner(owner: int | None) -> list[float]:
    """Four slots: ego, opponent 1, opponent 2, nobody."""
    slot = N_PLAYERS if owner is None else owner
    return [1.0 if k == slot else 0.0 for k in range(N_PLAYERS + 1)]


def _encode_132(state: GameState, normalized: bool, game_map: GameMap) -> np.ndarray:
    ownership = [x for owner in state.owner for x in _one_hot_owner(owner)]
    troops = np.asarray(state.troops, dtype=float)
    if normalized:
        troops = np.clip(troops / TROOP_SCALE, 0.0, 1.0)
    continents = [x for owner in _continent_owners(state, game_map) for x in _one_hot_owner(owner)]
    return np.concatenate(
        [
            np.array(ownership),
            troops,
            np.array(continents),
            np.array(_scalars(state, normalized, game_map)),
        ]
    )


def _phase_features(state: GameState) -> np.ndarray:
    phase = PHASE_ORDER.index(state.phase) / (len(PHASE_ORDER) - 1)
    if state.phase in (Phase.ATTACK, Phase.FREEMOVE):
        spent = 1.0
    elif state.phase_budget > 0:
        remaining = state.troops_to_place[state.current_player]
        spent = (state.phase_budget - remaining) / state.phase_budget
    else:
        spent = 0.0
    return np.array([phase, min(max(spent, 0.0), 1.0)])


def _edge_flags(state: GameState, phase: Phase, game_map: GameMap) -> np.ndarray:
    """1 per edge slot with a legal ego action of ``phase`` on that edge."""
    flags = np.zeros(game_map.edge_slots)
    if state.current_player != EGO or state.phase != phase:
        return flags
    available = {
        (game_map.index(action.s), game_map.index(action.t))
        for action in legal_actions(state, game_map)
        if action.s is not None and action.t is not None
    }
    for slot, pair in enumerate(game_map.edge_pairs[: game_map.edge_slots]):
        if pair in available:
            flags[slot] = 1.0
    return flags


def encode(
    state: GameState, encoder_id: EncoderId | str, game_map: GameMap | None = None
) -> EncodedState:
    """Encode a state with one of the six encoders.

    Args:
        state: Any valid game state
        encoder_id: Encoder id (``f54`` .. ``f298n``)
        game_map: Board topology (canonical map by default)

    Returns:
        EncodedState whose length matches ENCODER_LENGTHS

    Raises:
        UnknownEncoderError: If the encoder id is not one of the six
    """
    encoder_id = parse_encoder_id(encoder_id) if isinstance(encoder_id, str) else encoder_id
    game_map = game_map or build_canonical_map()

    if encoder_id in (EncoderId.F54, EncoderId.F54N):
        vector = _encode_54(state, encoder_id == EncoderId.F54N, game_map)
    else:
        vector = _encode_132(state, encoder_id != EncoderId.F132, game_map)
        if encoder_id == EncoderId.F134N:
            vector = np.concatenate([vector, _phase_features(state)])
        elif encoder_id == EncoderId.F298N:
            vector = np.concatenate(
                [
                    vector,
                    _edge_flags(state, Phase.ATTACK, game_map),
                    _edge_flags(state, Phase.FREEMOVE, game_map),
                ]
            )

    return EncodedState(encoder_id=encoder_id, values=[float(v) for v in vector])


def format_vector(values: list[float]) -> str:
    """Comma-separated decimal rendering used by the CLI."""
    return ",".join(f"{v:.6g}" for v in values)
