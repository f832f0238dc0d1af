"""Tests for dice combat."""

from fractions import Fraction

import numpy as np
import pytest

from app.core.combat import (
    attacker_dice_for,
    combat_round_distribution,
    compare_rolls,
    defender_dice_for,
    resolve_battle,
    roll_combat_round,
    round_win_probability,
)
from app.core.exceptions import InvalidTroopCountError


class TestRolls:
    """Test dice counts and roll comparison."""

    @pytest.mark.parametrize("troops,dice", [(2, 1), (3, 2), (4, 3), (10, 3)])
    def test_attacker_dice(self, troops, dice):
        assert attacker_dice_for(troops) == dice

    @pytest.mark.parametrize("troops,dice", [(1, 1), (2, 2), (7, 2)])
    def test_defender_dice(self, troops, dice):
        assert defender_dice_for(troops) == dice

    def test_defender_wins_ties(self):
        assert compare_rolls([6, 3], [6, 2]) == (1, 1)
        assert compare_rolls([4], [4]) == (1, 0)

    def test_highest_dice_compared(self):
        """Only min(attacker, defender) dice are compared."""
        assert compare_rolls([1, 6, 5], [4, 3]) == (0, 2)

    def test_losses_equal_comparisons(self, rng):
        for att, dfn in [(3, 2), (3, 1), (1, 2), (2, 2)]:
            combat_round = roll_combat_round(att, dfn, rng)
            assert combat_round.attacker_losses + combat_round.defender_losses == min(att, dfn)


class TestExactDistribution:
    """Test the enumerated outcome table."""

    def test_three_versus_two(self):
        table = combat_round_distribution(3, 2)
        assert table[(0, 2)] == Fraction(2890, 7776)
        assert table[(1, 1)] == Fraction(2611, 7776)
        assert table[(2, 0)] == Fraction(2275, 7776)
        assert sum(table.values()) == 1

    def test_single_dice(self):
        assert combat_round_distribution(1, 1)[(0, 1)] == Fraction(15, 36)
        assert combat_round_distribution(2, 1)[(0, 1)] == Fraction(125, 216)

    def test_out_of_range(self):
        with pytest.raises(InvalidTroopCountError):
            combat_round_distribution(4, 2)

    def test_round_win_probability(self):
        assert round_win_probability(4, 2) == pytest.approx(2890 / 7776)
        assert round_win_probability(2, 1) == pytest.approx(15 / 36)
        assert round_win_probability(5, 0) == 1.0
        assert round_win_probability(1, 3) == 0.0

    @pytest.mark.slow
    def test_sampled_frequencies_match(self):
        """100,000 seeded 3v2 rounds land within 0.01 of the exact table."""
        rng = np.random.default_rng(2024)
        n = 100_000
        attack = np.sort(rng.integers(1, 7, size=(n, 3)), axis=1)[:, ::-1][:, :2]
        defend = np.sort(rng.integers(1, 7, size=(n, 2)), axis=1)[:, ::-1]
        defender_losses = (attack > defend).sum(axis=1)
        for losses, exact in [(2, 2890 / 7776), (1, 2611 / 7776), (0, 2275 / 7776)]:
            assert abs(np.mean(defender_losses == losses) - exact) < 0.01

    @pytest.mark.slow
    def test_sampled_rounds_match_single_dice(self):
        rng = np.random.default_rng(99)
        for att, dfn, exact in [(1, 1, 15 / 36), (2, 1, 125 / 216)]:
            wins = sum(
                roll_combat_round(att, dfn, rng).defender_losses == 1 for _ in range(20_000)
            )
            assert abs(wins / 20_000 - exact) < 0.01


class TestResolveBattle:
    """Test full battles."""

    def test_battle_ends(self, rng):
        outcome = resolve_battle(6, 3, 4, rng)
        assert outcome.conquered or outcome.attacker_losses == 5
        for combat_round in outcome.rounds:
            comparisons = min(combat_round.attacker_dice, combat_round.defender_dice)
            assert combat_round.attacker_losses + combat_round.defender_losses == comparisons

    def test_moved_troops_clamped(self):
        """Conquering moves at most the surviving attackers less one."""
        for seed in range(50):
            outcome = resolve_battle(5, 1, 4, np.random.default_rng(seed))
            if outcome.conquered:
                assert 1 <= outcome.troops_moved <= 4 - outcome.attacker_losses
                assert outcome.troops_moved <= 4

    def test_deterministic(self):
        a = resolve_battle(8, 4, 3, np.random.default_rng(7))
        b = resolve_battle(8, 4, 3, np.random.default_rng(7))
        assert a == b

    @pytest.mark.parametrize("att,dfn,tr", [(1, 1, 1), (3, 0, 1), (3, 2, 3), (3, 2, 0)])
    def test_invalid_counts(self, att, dfn, tr, rng):
        with pytest.raises(InvalidTroopCountError):
            resolve_battle(att, dfn, tr, rng)
