import numpy as np
import pytest

from src.application.services.grpo import (
    batch_gradient,
    build_group,
    grpo_gradient,
    grpo_loss,
    optimizer_step,
    ranking_weights,
)
from src.application.services.policy import action_distribution, action_log_probs
from src.domain.entities import (
    AdamState,
    GroupSample,
    PolicyGradient,
    PolicyParameters,
    QualityScores,
    QuestionCandidate,
    RewardBreakdown,
)
from src.domain.exceptions import ConfigError, ContractViolationError, NonFiniteGradientError
from src.domain.value_objects import GrpoConfig


def make_group(params, features, actions, rewards, tau=1.0):
    features = np.asarray(features, dtype=np.float64)
    log_probs = action_log_probs(params, features)
    return GroupSample(
        features=features,
        actions=tuple(actions),
        rewards=tuple(rewards),
        log_probs=tuple(float(log_probs[a]) for a in actions),
        weights=tuple(float(w) for w in ranking_weights(rewards, tau)),
    )


def flat(params):
    return np.concatenate([params.theta.ravel(), params.bias])


def unflat(vector, n_actions, n_features):
    split = n_actions * n_features
    return PolicyParameters(vector[:split].reshape(n_actions, n_features).copy(), vector[split:].copy())


def scored(index, total, features):
    reward = RewardBreakdown(weighted_ig=total, quality=QualityScores(0.0, 0.0, 0.0, 0.0, 0.0), quality_lambda=0.5)
    return QuestionCandidate(text=f"q{index}", log_prob=-1.0, template_index=index, features=features, reward=reward)


class TestRankingWeights:
    def test_two_candidates(self):
        weights = ranking_weights([1.0, 0.0], tau=1.0)
        assert weights == pytest.approx([0.731059, 0.268941], abs=1e-6)

    def test_sum_to_one(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            weights = ranking_weights(rng.normal(size=int(rng.integers(2, 9))), tau=float(rng.uniform(0.05, 5)))
            assert weights.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(weights >= 0)

    def test_large_tau_is_uniform(self):
        assert ranking_weights([3.0, -1.0, 0.5, 2.0], tau=1e6) == pytest.approx([0.25] * 4, abs=1e-5)

    def test_small_tau_is_one_hot(self):
        assert ranking_weights([1.0, 0.5, 0.2], tau=1e-3) == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)

    def test_underflow_stays_positive(self):
        weights = ranking_weights([1000.0, 0.0, -1000.0], tau=1e-3)
        assert np.all(weights > 0)
        assert weights[0] == pytest.approx(1.0, abs=1e-12)

    def test_order_preserving(self):
        rewards = [0.3, 1.2, -0.4, 0.9]
        weights = ranking_weights(rewards, tau=0.5)
        assert list(np.argsort(weights)) == list(np.argsort(rewards))

    def test_shift_invariance(self):
        rewards = np.array([0.3, 1.2, -0.4])
        assert np.allclose(ranking_weights(rewards, 0.7), ranking_weights(rewards + 5.0, 0.7), atol=1e-9)

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_tau_must_be_positive(self, tau):
        with pytest.raises(ConfigError, match="grpo.tau"):
            ranking_weights([1.0, 0.0], tau)


class TestBuildGroup:
    def test_weights_follow_rewards(self):
        features = np.ones(3)
        group = build_group([scored(0, 1.0, features), scored(2, 0.0, features)], tau=1.0)
        assert group.actions == (0, 2)
        assert group.weights == pytest.approx((0.731059, 0.268941), abs=1e-6)

    def test_needs_two_candidates(self):
        with pytest.raises(ContractViolationError):
            build_group([scored(0, 1.0, np.ones(3))], tau=1.0)

    def test_small_tau_group_is_valid(self):
        features = np.ones(3)
        candidates = [scored(0, 5.0, features), scored(1, 0.0, features), scored(2, -5.0, features)]
        group = build_group(candidates, tau=1e-3)
        assert all(w > 0 for w in group.weights)

    def test_zero_weight_rejected(self):
        with pytest.raises(ContractViolationError, match="positive"):
            GroupSample(
                features=np.ones(3),
                actions=(0, 1),
                rewards=(1.0, 0.0),
                log_probs=(-1.0, -1.0),
                weights=(1.0, 0.0),
            )

    def test_needs_rewards(self):
        bare = QuestionCandidate(text="q", template_index=1, features=np.ones(3))
        with pytest.raises(ContractViolationError):
            build_group([scored(0, 1.0, np.ones(3)), bare], tau=1.0)


class TestLossAndGradient:
    def test_uniform_policy_loss(self):
        params = PolicyParameters.zeros(4, 2)
        group = make_group(params, [1.0, 0.5], actions=(0, 3), rewards=(0.4, 0.1))
        assert grpo_loss(group) == pytest.approx(1.386294, abs=1e-6)
        assert grpo_loss(group, params) == pytest.approx(1.386294, abs=1e-6)

    def test_loss_shift_invariance(self):
        rng = np.random.default_rng(6)
        params = PolicyParameters(rng.normal(size=(4, 3)), rng.normal(size=4))
        features = rng.uniform(size=3)
        base = make_group(params, features, (1, 2, 3), (0.2, 0.9, 0.5))
        shifted = make_group(params, features, (1, 2, 3), (10.2, 10.9, 10.5))
        assert grpo_loss(base, params) == pytest.approx(grpo_loss(shifted, params), abs=1e-9)

    def test_same_action_twice(self):
        params = PolicyParameters.zeros(4, 2)
        group = make_group(params, [1.0, 0.5], actions=(1, 1), rewards=(0.7, 0.2))
        gradient = grpo_gradient(group, params)
        assert gradient.bias == pytest.approx([0.25, -0.75, 0.25, 0.25], abs=1e-12)
        assert np.allclose(gradient.theta, np.outer(gradient.bias, [1.0, 0.5]))

    def test_equal_rewards_give_mean_likelihood_gradient(self):
        rng = np.random.default_rng(2)
        params = PolicyParameters(rng.normal(size=(5, 2)), rng.normal(size=5))
        features = np.array([0.3, 0.8])
        actions = (0, 2, 4)
        group = make_group(params, features, actions, (0.5, 0.5, 0.5))
        probs = np.exp(action_log_probs(params, features))
        expected = np.mean([probs - np.eye(5)[a] for a in actions], axis=0)
        assert np.allclose(grpo_gradient(group, params).bias, expected, atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        n_actions, n_features, h = 4, 3, 1e-6
        for _ in range(100):
            params = PolicyParameters(rng.normal(size=(n_actions, n_features)), rng.normal(size=n_actions))
            k = int(rng.integers(2, 5))
            group = make_group(
                params,
                rng.uniform(size=n_features),
                tuple(int(a) for a in rng.integers(0, n_actions, size=k)),
                tuple(float(r) for r in rng.normal(size=k)),
                tau=float(rng.uniform(0.1, 2.0)),
            )
            analytic = flat(grpo_gradient(group, params))
            base = flat(params)
            numeric = np.zeros_like(base)
            for i in range(base.size):
                up, down = base.copy(), base.copy()
                up[i] += h
                down[i] -= h
                numeric[i] = (
                    grpo_loss(group, unflat(up, n_actions, n_features))
                    - grpo_loss(group, unflat(down, n_actions, n_features))
                ) / (2 * h)
            error = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1e-8)
            assert error < 1e-5

    def test_batch_gradient_is_the_mean(self):
        params = PolicyParameters.zeros(4, 2)
        first = make_group(params, [1.0, 0.0], (0, 1), (1.0, 0.0))
        second = make_group(params, [0.0, 1.0], (2, 3), (0.0, 1.0))
        gradient, loss = batch_gradient([first, second], params)
        expected = (grpo_gradient(first, params).bias + grpo_gradient(second, params).bias) / 2
        assert np.allclose(gradient.bias, expected)
        assert loss == pytest.approx(1.386294, abs=1e-6)

    def test_empty_batch(self):
        with pytest.raises(ContractViolationError):
            batch_gradient([], PolicyParameters.zeros(2, 2))


class TestOptimizerStep:
    def test_first_step_lowers_group_loss(self):
        rng = np.random.default_rng(1)
        config = GrpoConfig(learning_rate=0.01, weight_decay=0.0, tau=1.0)
        for _ in range(100):
            params = PolicyParameters(rng.normal(0.0, 0.1, size=(4, 3)), rng.normal(0.0, 0.1, size=4))
            group = make_group(
                params,
                rng.uniform(size=3),
                tuple(int(a) for a in rng.integers(0, 4, size=2)),
                tuple(float(r) for r in rng.normal(size=2)),
            )
            updated, _ = optimizer_step(params, grpo_gradient(group, params), config, AdamState.zeros_like(params))
            assert grpo_loss(group, updated) < grpo_loss(group, params)

    @pytest.mark.parametrize("learning_rate", [1e-4, 0.01, 0.05])
    def test_first_step_raises_the_better_candidate(self, learning_rate):
        # bank and feature sizes of the default template policy, near its zero start
        n_actions, n_features = 24, 23
        rng = np.random.default_rng(4)
        config = GrpoConfig(learning_rate=learning_rate, weight_decay=0.0, tau=1.0)
        for _ in range(100):
            params = PolicyParameters(
                rng.normal(0.0, 0.1, size=(n_actions, n_features)), rng.normal(0.0, 0.1, size=n_actions)
            )
            features = rng.uniform(size=n_features)
            actions = tuple(int(a) for a in rng.choice(n_actions, size=2, replace=False))
            rewards = tuple(float(r) for r in rng.normal(size=2))
            better = actions[int(np.argmax(rewards))]
            group = make_group(params, features, actions, rewards)
            updated, _ = optimizer_step(params, grpo_gradient(group, params), config, AdamState.zeros_like(params))
            assert action_distribution(updated, features)[better] > action_distribution(params, features)[better]

    def test_probability_above_its_ranking_weight_moves_down(self):
        # the loss is minimized at pi = ranking weights, so an over-confident candidate is pulled back
        bias = np.zeros(24)
        bias[0] = 5.0
        params = PolicyParameters(np.zeros((24, 23)), bias)
        features = np.zeros(23)
        group = make_group(params, features, actions=(0, 1), rewards=(1.0, 0.0))
        before = action_distribution(params, features)
        assert before[0] > group.weights[0]

        config = GrpoConfig(learning_rate=0.01, weight_decay=0.0, tau=1.0)
        updated, _ = optimizer_step(params, grpo_gradient(group, params), config, AdamState.zeros_like(params))
        after = action_distribution(updated, features)
        assert group.weights[0] < after[0] < before[0]
        assert after[1] > before[1]

    def test_zero_gradient_without_decay_is_a_fixed_point(self):
        params = PolicyParameters(np.full((3, 2), 0.4), np.array([0.1, -0.2, 0.3]))
        zero = PolicyGradient(np.zeros((3, 2)), np.zeros(3))
        updated, state = optimizer_step(
            params, zero, GrpoConfig(weight_decay=0.0), AdamState.zeros_like(params)
        )
        assert updated.equals(params)
        assert state.step == 1

    def test_decoupled_weight_decay(self):
        params = PolicyParameters(np.ones((1, 1)), np.ones(1))
        zero = PolicyGradient(np.zeros((1, 1)), np.zeros(1))
        config = GrpoConfig(learning_rate=1e-4, weight_decay=0.01)
        updated, _ = optimizer_step(params, zero, config, AdamState.zeros_like(params))
        assert updated.theta[0, 0] == pytest.approx(0.999999, abs=1e-12)
        assert updated.bias[0] == pytest.approx(0.999999, abs=1e-12)

    def test_hand_computed_step(self):
        params = PolicyParameters(np.full((1, 1), 0.5), np.zeros(1))
        gradient = PolicyGradient(np.full((1, 1), 0.2), np.zeros(1))
        config = GrpoConfig(learning_rate=0.1, weight_decay=0.01)
        updated, state = optimizer_step(params, gradient, config, AdamState.zeros_like(params))
        expected = 0.5 - 0.1 * 0.01 * 0.5 - 0.1 * 0.2 / (0.2 + 1e-8)
        assert updated.theta[0, 0] == pytest.approx(expected, abs=1e-12)
        assert state.m_theta[0, 0] == pytest.approx(0.02, abs=1e-12)
        assert state.v_theta[0, 0] == pytest.approx(4e-5, abs=1e-15)

    def test_non_finite_gradient(self):
        params = PolicyParameters.zeros(2, 2)
        gradient = PolicyGradient(np.array([[np.nan, 0.0], [0.0, 0.0]]), np.zeros(2))
        with pytest.raises(NonFiniteGradientError):
            optimizer_step(params, gradient, GrpoConfig(), AdamState.zeros_like(params))

    def test_shape_mismatch(self):
        params = PolicyParameters.zeros(2, 2)
        with pytest.raises(ContractViolationError):
            optimizer_step(
                params, PolicyGradient(np.zeros((3, 2)), np.zeros(3)), GrpoConfig(), AdamState.zeros_like(params)
            )

    def test_state_round_trip(self):
        params = PolicyParameters(np.ones((2, 2)), np.ones(2))
        gradient = PolicyGradient(np.full((2, 2), 0.3), np.full(2, -0.1))
        _, state = optimizer_step(params, gradient, GrpoConfig(), AdamState.zeros_like(params))
        restored = AdamState.from_dict(state.to_dict())
        assert restored.step == 1
        assert np.array_equal(restored.m_theta, state.m_theta)
        assert np.array_equal(restored.v_bias, state.v_bias)
