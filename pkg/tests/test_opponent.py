"""Tests for the scripted opponent policy."""

import numpy as np
import pytest

from app.core.exceptions import IllegalActionError
from app.core.game_engine import (
    TURN_CAP,
    Action,
    Outcome,
    Phase,
    apply_action,
    is_terminal,
    legal_actions,
    new_game,
)
from app.core.opponent import opponent_heuristic


class TestOpponentHeuristic:
    """Test the deterministic heuristic."""

    def test_first_draft_is_lowest_index(self):
        assert opponent_heuristic(new_game()) == Action(p=Phase.DRAFT, s="Red_A")

    def test_draft_concentrates_on_continent(self):
        state = apply_action(new_game(), Action(p=Phase.DRAFT, s="Green_C"))
        assert opponent_heuristic(state) == Action(p=Phase.DRAFT, s="Green_A")

    def test_reinforces_weakest_frontier(self, drafted):
        assert opponent_heuristic(drafted) == Action(p=Phase.REINFORCE, s="Purple_D")

    def test_attacks_with_all_but_one(self, drafted):
        state = drafted
        while state.phase == Phase.REINFORCE:
            state = apply_action(state, Action(p=Phase.REINFORCE, s="Purple_E"))
        # Purple_C and Purple_E both roll three dice against Purple_B; lower index wins
        assert opponent_heuristic(state) == Action(
            p=Phase.ATTACK, s="Purple_C", t="Purple_B", tr=4
        )

    def test_freemove_ends_turn(self, drafted):
        state = drafted.model_copy(update={"phase": Phase.FREEMOVE})
        assert opponent_heuristic(state) == Action.end(Phase.FREEMOVE)

    def test_game_over(self, drafted):
        state = drafted.model_copy(update={"turn_number": TURN_CAP})
        with pytest.raises(IllegalActionError):
            opponent_heuristic(state)

    def test_actions_always_legal(self):
        """Every seat driven by the heuristic only ever plays legal actions."""
        rng = np.random.default_rng(0)
        state = new_game()
        for _ in range(2000):
            if is_terminal(state) != Outcome.ONGOING:
                break
            action = opponent_heuristic(state, rng)
            assert action in legal_actions(state)
            state = apply_action(state, action, rng)
