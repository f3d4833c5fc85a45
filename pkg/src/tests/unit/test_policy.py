import numpy as np
import pytest

from src.application.services.policy import (
    ORACLE_EXHAUSTED_QUESTION,
    OraclePolicy,
    SoftmaxQuestionPolicy,
    StateFeaturizer,
    TemplateBank,
    action_distribution,
    action_log_probs,
    sample_candidates,
    top_mass_category,
    uniform_policy,
)
from src.application.services.coverage import update_coverage
from src.domain.entities import (
    CoverageRecord,
    CoverageState,
    DetectionMethod,
    DialogueContext,
    MatchResult,
    PolicyParameters,
)
from src.domain.exceptions import ContractViolationError


def params_with_bias(bias, n_features=3):
    bias = np.asarray(bias, dtype=np.float64)
    return PolicyParameters(np.zeros((bias.size, n_features)), bias)


@pytest.fixture
def bank(registry):
    return TemplateBank.default(registry)


@pytest.fixture
def featurizer(registry):
    return StateFeaturizer(registry)


@pytest.fixture
def context(chest_case):
    return DialogueContext(chest_case, CoverageState.initial(chest_case.entities), turn=0, max_turns=8)


class TestActionDistribution:
    def test_zero_parameters_are_uniform(self):
        probs = action_distribution(PolicyParameters.zeros(4, 3), np.ones(3))
        assert np.allclose(probs, 0.25)

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        theta = rng.normal(size=(5, 3))
        bias = rng.normal(size=5)
        features = rng.uniform(size=3)
        base = action_distribution(PolicyParameters(theta, bias), features)
        shifted = action_distribution(PolicyParameters(theta, bias + 17.0), features)
        assert np.allclose(base, shifted, atol=1e-12)
        assert np.argmax(base) == np.argmax(shifted)

    def test_dominant_bias(self):
        probs = action_distribution(params_with_bias([5.0, 0.0, 0.0, 0.0]), np.zeros(3))
        expected_top = np.exp(5.0) / (np.exp(5.0) + 3.0)
        assert probs[0] == pytest.approx(expected_top, abs=1e-12)
        assert probs[0] == pytest.approx(0.980187, abs=1e-6)
        assert list(probs[1:]) == pytest.approx([0.006604] * 3, abs=1e-6)
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolationError):
            action_distribution(PolicyParameters.zeros(4, 3), np.zeros(5))

    def test_plain_list_features(self):
        params = params_with_bias([1.0, 0.0, 0.0])
        from_list = action_log_probs(params, [0.5, 0.0, 1.0])
        from_array = action_log_probs(params, np.array([0.5, 0.0, 1.0]))
        assert np.array_equal(from_list, from_array)

    def test_log_probs_finite_for_large_logits(self):
        log_probs = action_log_probs(params_with_bias([800.0, -800.0, 0.0]), np.zeros(3))
        assert np.all(np.isfinite(log_probs))


class TestSampleCandidates:
    def test_replay_with_same_seed(self):
        params = params_with_bias([0.3, -0.2, 0.1, 0.0])
        first = sample_candidates(params, np.zeros(3), 2, np.random.default_rng(42))
        second = sample_candidates(params, np.zeros(3), 2, np.random.default_rng(42))
        assert [c.template_index for c in first] == [c.template_index for c in second]

    def test_frequency_matches_distribution(self):
        params = params_with_bias([5.0, 0.0, 0.0, 0.0])
        draws = sample_candidates(params, np.zeros(3), 1000, np.random.default_rng(0))
        frequency = np.mean([c.template_index == 0 for c in draws])
        assert abs(frequency - action_distribution(params, np.zeros(3))[0]) <= 0.03

    def test_recorded_log_prob(self):
        params = params_with_bias([0.5, 1.5, -1.0])
        probs = action_distribution(params, np.zeros(3))
        for candidate in sample_candidates(params, np.zeros(3), 20, np.random.default_rng(3)):
            assert candidate.log_prob == pytest.approx(np.log(probs[candidate.template_index]), abs=1e-12)

    def test_needs_a_candidate(self):
        with pytest.raises(ContractViolationError):
            sample_candidates(PolicyParameters.zeros(3, 3), np.zeros(3), 0, np.random.default_rng(0))


class TestTemplateBank:
    def test_default_size(self, bank, registry):
        assert len(bank) == 2 * len(registry) + 4 == 24

    def test_every_category_has_a_template(self, bank, registry):
        assert {t.category for t in bank.templates if t.category} == set(registry.labels)

    def test_hint_templates_name_an_uncovered_surface(self, bank, chest_case):
        coverage = CoverageState.initial(chest_case.entities)
        assert "chest pain" in bank.render(0, coverage)

    def test_render_is_pure(self, bank, chest_case):
        coverage = CoverageState.initial(chest_case.entities)
        assert [bank.render(i, coverage) for i in range(len(bank))] == [
            bank.render(i, coverage) for i in range(len(bank))
        ]

    def test_index_out_of_range(self, bank, chest_case):
        with pytest.raises(ContractViolationError):
            bank.render(len(bank), CoverageState.initial(chest_case.entities))

    def test_top_mass_category(self, registry, chest_case):
        coverage = CoverageState.initial(chest_case.entities)
        assert top_mass_category(coverage, registry) == "symptom"

    def test_top_mass_tie_goes_to_registry_order(self, registry, chest_case):
        # dizziness and two days both weigh 0.9 once chest pain is gone
        coverage = CoverageState(chest_case.entities, {})
        coverage = update_coverage(coverage, [MatchResult("cp", DetectionMethod.EXACT, 1.0)], 0)
        assert top_mass_category(coverage, registry) == "temporal_pattern"

    def test_schema_hash_is_stable(self, registry):
        assert TemplateBank.default(registry).schema_hash() == TemplateBank.default(registry).schema_hash()


class TestStateFeaturizer:
    def test_dimension(self, featurizer, registry):
        assert featurizer.dim == 2 * len(registry) + 3 == 23

    def test_features_in_unit_interval(self, featurizer, context):
        phi = featurizer.featurize(context)
        assert phi.shape == (23,)
        assert np.all((phi >= 0.0) & (phi <= 1.0))

    def test_chief_complaint_one_hot(self, featurizer, context, registry):
        phi = featurizer.featurize(context)
        one_hot = phi[len(registry) + 3:]
        assert one_hot.sum() == 1.0
        assert one_hot[registry.index("symptom")] == 1.0


class TestPolicies:
    def test_uniform_policy_proposes_k(self, bank, featurizer, context):
        policy = uniform_policy(bank, featurizer, group_size=3)
        candidates = policy.propose(context, np.random.default_rng(0))
        assert len(candidates) == 3
        assert all(c.log_prob == pytest.approx(-np.log(24)) for c in candidates)
        assert all(c.text == bank.render(c.template_index, context.coverage) for c in candidates)

    def test_parameters_must_fit_bank(self, bank, featurizer):
        with pytest.raises(ContractViolationError):
            SoftmaxQuestionPolicy(PolicyParameters.zeros(5, featurizer.dim), bank, featurizer)

    def test_oracle_names_uncovered_entities(self, context):
        (candidate,) = OraclePolicy(cap=2).propose(context, np.random.default_rng(0))
        assert candidate.text == "Tell me about the chest pain and the dizziness?"

    def test_oracle_when_exhausted(self, chest_case):
        coverage = CoverageState(chest_case.entities, {})
        covered = {e.id: CoverageRecord(0, DetectionMethod.EXACT) for e in chest_case.entities}
        done = DialogueContext(chest_case, CoverageState(coverage.all_entities, covered), 1, 8)
        (candidate,) = OraclePolicy().propose(done, np.random.default_rng(0))
        assert candidate.text == ORACLE_EXHAUSTED_QUESTION


class TestPolicyParameters:
    def test_dict_round_trip(self):
        rng = np.random.default_rng(8)
        params = PolicyParameters(rng.normal(size=(4, 3)), rng.normal(size=4))
        assert PolicyParameters.from_dict(params.to_dict()).equals(params)

    def test_rejects_non_finite(self):
        with pytest.raises(ContractViolationError):
            PolicyParameters(np.full((2, 2), np.nan), np.zeros(2))
