"""Tests for goal and constraint losses."""

from itertools import permutations

import numpy as np
import pytest
from scipy.special import softmax

from app.core.exceptions import NonSquareError
from app.core.losses import (
    Alignment,
    AnnealSchedule,
    anneal,
    constraint_loss,
    constraint_loss_grad,
    default_ce,
    goal_loss,
    goal_loss_grad,
    hungarian,
    oaxe_loss,
)


def _brute_force(cost: np.ndarray) -> float:
    n = cost.shape[0]
    return min(sum(cost[i, p[i]] for i in range(n)) for p in permutations(range(n)))


def _numeric_grad(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        step = np.zeros_like(x)
        step[index] = eps
        grad[index] = (f(x + step) - f(x - step)) / (2 * eps)
    return grad


class TestHungarian:
    """Test the assignment solver."""

    def test_known_matrix(self):
        alignment = hungarian([[4, 1, 3], [2, 0, 5], [3, 2, 2]])
        assert alignment.cost == 5.0
        assert alignment.permutation == [1, 0, 2]

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 6])
    def test_matches_brute_force(self, n):
        rng = np.random.default_rng(n)
        for _ in range(20):
            cost = rng.uniform(0, 10, size=(n, n))
            assert hungarian(cost).cost == pytest.approx(_brute_force(cost))

    @pytest.mark.slow
    def test_matches_brute_force_eight(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            cost = rng.integers(0, 5, size=(8, 8)).astype(float)
            assert hungarian(cost).cost == pytest.approx(_brute_force(cost))

    @pytest.mark.parametrize("cost", [np.zeros((2, 3)), np.zeros((0, 0)), np.zeros(4)])
    def test_non_square(self, cost):
        with pytest.raises(NonSquareError):
            hungarian(cost)

    def test_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            hungarian([[1.0, np.inf], [0.0, 1.0]])

    def test_alignment_must_be_bijection(self):
        with pytest.raises(ValueError, match="bijection"):
            Alignment(permutation=[0, 0], cost=0.0)

    def test_slot_targets(self):
        assert Alignment(permutation=[2, 0, 1], cost=0.0).slot_targets([7, 8, 9]) == [8, 9, 7]


class TestConstraintLoss:
    """Test default-order and order-agnostic cross entropy."""

    def test_oaxe_ignores_order(self):
        dists = np.array([[0.1, 0.9, 0.0], [0.8, 0.1, 0.1], [0.0, 0.0, 1.0]])
        loss, alignment = oaxe_loss(dists, [0, 1, 2])
        assert alignment.permutation == [1, 0, 2]
        assert loss == pytest.approx(-np.log(0.8) - np.log(0.9))
        assert default_ce(dists, [1, 0, 2]) == pytest.approx(loss)

    def test_oaxe_never_exceeds_ce(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            dists = softmax(rng.normal(size=(8, 91)), axis=-1)
            targets = list(rng.integers(0, 91, size=8))
            assert oaxe_loss(dists, targets)[0] <= default_ce(dists, targets) + 1e-9

    @pytest.mark.slow
    def test_oaxe_matches_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            dists = softmax(rng.normal(size=(8, 91)), axis=-1)
            targets = list(rng.integers(0, 91, size=8))
            cost = -np.log(dists[:, targets]).T
            assert oaxe_loss(dists, targets)[0] == pytest.approx(_brute_force(cost))

    def test_temperature_endpoints(self):
        rng = np.random.default_rng(1)
        dists = softmax(rng.normal(size=(8, 91)), axis=-1)
        targets = list(rng.integers(0, 91, size=8))
        assert constraint_loss(dists, targets, 1.0) == pytest.approx(default_ce(dists, targets))
        assert constraint_loss(dists, targets, 0.0) == pytest.approx(oaxe_loss(dists, targets)[0])

    @pytest.mark.parametrize("t_m", [0.0, 0.5, 1.0])
    def test_gradient(self, t_m):
        rng = np.random.default_rng(2)
        logits = rng.normal(size=(4, 6))
        targets = [0, 3, 3, 5]
        loss, grad, alignment = constraint_loss_grad(logits, targets, t_m)

        def f(x):
            return constraint_loss(softmax(x, axis=-1), targets, t_m, alignment)

        assert loss == pytest.approx(f(logits))
        np.testing.assert_allclose(grad, _numeric_grad(f, logits), atol=1e-5)


class TestGoalLoss:
    """Test the ordinal goal loss."""

    def test_perfect_prediction(self):
        dists = np.eye(5)[[0, 2, 4]]
        assert goal_loss(dists, [0, 2, 4], 0.5) == pytest.approx(0.0, abs=1e-9)

    def test_squared_error_term(self):
        dists = np.full((1, 5), 0.2)
        assert goal_loss(dists, [0], 0.0) == pytest.approx(4.0)
        assert goal_loss(dists, [2], 0.0) == pytest.approx(0.0)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_gradient(self, alpha):
        rng = np.random.default_rng(3)
        logits = rng.normal(size=(6, 5))
        targets = [0, 1, 2, 3, 4, 2]
        loss, grad = goal_loss_grad(logits, targets, alpha)

        def f(x):
            return goal_loss(softmax(x, axis=-1), targets, alpha)

        assert loss == pytest.approx(f(logits))
        np.testing.assert_allclose(grad, _numeric_grad(f, logits), atol=1e-5)


class TestAnneal:
    """Test the logistic temperature schedule."""

    def test_endpoints(self):
        schedule = AnnealSchedule(total_steps=100)
        assert anneal(0, schedule) == pytest.approx(1.0)
        assert anneal(100, schedule) == pytest.approx(0.0)
        assert anneal(50, schedule) == pytest.approx(0.5)

    def test_monotone(self):
        schedule = AnnealSchedule(total_steps=40, k=4.0, m=0.3)
        values = [anneal(step, schedule) for step in range(41)]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("step", [-1, 11])
    def test_out_of_range(self, step):
        with pytest.raises(ValueError, match="outside"):
            anneal(step, AnnealSchedule(total_steps=10))

    @pytest.mark.parametrize("m", [0.0, 1.0])
    def test_midpoint_bounds(self, m):
        with pytest.raises(ValueError):
            AnnealSchedule(total_steps=10, m=m)
