import math

import numpy as np
import pytest

from src.application.services import IQualityAssessor
from src.application.services.infogain import (
    binary_entropy,
    entity_gain,
    estimate_all,
    estimate_coverage_probability,
    information_gain,
    mix_coverage_signals,
)
from src.domain.entities import CoverageEstimate, CoverageProbabilities
from src.domain.exceptions import (
    ContractViolationError,
    DomainValueError,
    RewardComputationError,
)
from src.domain.value_objects import ClipBounds, MixtureWeights
from src.infrastructure.embeddings.lexical_embedding import LexicalEmbeddingProvider
from src.tests.conftest import make_entity

MAX_GAIN = 0.713603


def probabilities(values):
    return CoverageProbabilities(
        estimates={
            entity_id: CoverageEstimate(entity_id=entity_id, p=p, sem=p, llm=p, key=p)
            for entity_id, p in values.items()
        }
    )


def entities(n, category="symptom", weight=1.0):
    return [make_entity(f"e{i}", f"finding {i}", category, weight) for i in range(n)]


class FixedAssessor(IQualityAssessor):
    def __init__(self, value):
        self.value = value

    def relevance(self, entity, question):
        return self.value

    def assess(self, question, conversation, digest):
        raise AssertionError("not used")


class BrokenAssessor(FixedAssessor):
    def relevance(self, entity, question):
        raise RuntimeError("endpoint exploded")


class TestBinaryEntropy:
    def test_maximal_at_one_half(self):
        assert binary_entropy(0.5) == 1.0

    def test_degenerate_distributions(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_clip_floor_value(self):
        assert binary_entropy(0.05) == pytest.approx(0.286397, abs=1e-6)

    @pytest.mark.parametrize("p", [-0.1, 1.1, math.nan])
    def test_outside_domain(self, p):
        with pytest.raises(DomainValueError):
            binary_entropy(p)

    def test_symmetry(self):
        for p in np.linspace(0.0, 1.0, 41):
            assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)

    def test_entity_gain_upper_bound(self):
        assert entity_gain(0.05) == pytest.approx(MAX_GAIN, abs=1e-6)
        assert entity_gain(0.95) == pytest.approx(MAX_GAIN, abs=1e-6)


class TestInformationGain:
    def test_three_entity_example(self):
        uncovered = entities(3)
        gain = information_gain(uncovered, probabilities({"e0": 0.9, "e1": 0.5, "e2": 0.05}))
        assert gain.prior_entropy == 3.0
        assert gain.conditional_entropy == pytest.approx(1.755393, abs=1e-5)
        assert gain.ig == pytest.approx(1.244607, abs=1e-5)

    def test_all_one_half_gives_zero(self):
        uncovered = entities(4)
        gain = information_gain(uncovered, probabilities({e.id: 0.5 for e in uncovered}))
        assert gain.ig == 0.0
        assert gain.weighted_ig == 0.0

    def test_category_weight(self):
        uncovered = [make_entity("s", "severe", "severity", 0.8)]
        gain = information_gain(uncovered, probabilities({"s": 0.05}))
        assert gain.weighted_ig == pytest.approx(0.570882, abs=1e-5)
        assert gain.per_category_ig == {"severity": pytest.approx(MAX_GAIN, abs=1e-6)}

    def test_unit_weights_reduce_to_plain_gain(self):
        rng = np.random.default_rng(11)
        uncovered = entities(6)
        gain = information_gain(
            uncovered, probabilities({e.id: float(rng.uniform(0.05, 0.95)) for e in uncovered})
        )
        assert gain.weighted_ig == pytest.approx(gain.ig, abs=1e-12)
        assert sum(gain.per_category_ig.values()) == pytest.approx(gain.ig, abs=1e-12)

    def test_empty_uncovered_set(self):
        gain = information_gain([], probabilities({}))
        assert (gain.prior_entropy, gain.conditional_entropy, gain.ig) == (0.0, 0.0, 0.0)

    def test_probabilities_must_match_uncovered(self):
        uncovered = entities(2)
        with pytest.raises(ContractViolationError):
            information_gain(uncovered, probabilities({"e0": 0.5}))
        with pytest.raises(ContractViolationError):
            information_gain(uncovered, probabilities({"e0": 0.5, "e1": 0.5, "zz": 0.5}))

    def test_bounds_over_random_clipped_vectors(self):
        rng = np.random.default_rng(0)
        pools = {n: entities(n) for n in range(1, 16)}
        for _ in range(10_000):
            n = int(rng.integers(1, 16))
            uncovered = pools[n]
            values = rng.uniform(0.05, 0.95, size=n)
            gain = information_gain(uncovered, probabilities(dict(zip((e.id for e in uncovered), values))))
            assert gain.ig >= 0.0
            assert gain.ig <= MAX_GAIN * n + 1e-9
            if np.any(values != 0.5):
                assert gain.ig > 0.0

    @pytest.mark.parametrize("p", [0.05, 0.3, 0.499, 0.501, 0.7, 0.95])
    @pytest.mark.parametrize("position", [0, 2, 4])
    def test_any_probability_off_one_half_gives_positive_gain(self, p, position):
        uncovered = entities(5)
        values = {e.id: 0.5 for e in uncovered}
        values[f"e{position}"] = p
        gain = information_gain(uncovered, probabilities(values))
        assert gain.ig > 0.0
        assert gain.weighted_ig > 0.0

    def test_moving_away_from_one_half_never_lowers_gain(self):
        uncovered = entities(3)
        base = {"e0": 0.5, "e1": 0.7, "e2": 0.2}
        previous = information_gain(uncovered, probabilities(base)).ig
        for p in (0.4, 0.3, 0.2, 0.1, 0.05):
            current = information_gain(uncovered, probabilities({**base, "e0": p})).ig
            assert current >= previous
            previous = current


class TestCoverageProbability:
    def test_equal_weight_mixture(self):
        p = mix_coverage_signals(0.9, 0.6, 1.0, MixtureWeights(), ClipBounds())
        assert p == pytest.approx(0.8333, abs=1e-4)

    def test_equal_signals_for_any_weights(self):
        p = mix_coverage_signals(0.5, 0.5, 0.5, MixtureWeights(0.2, 0.3, 0.5), ClipBounds())
        assert p == pytest.approx(0.5, abs=1e-12)

    def test_zero_signals_clip_to_floor(self):
        assert mix_coverage_signals(0.0, 0.0, 0.0, MixtureWeights(), ClipBounds()) == 0.05

    def test_never_leaves_clip_range(self):
        rng = np.random.default_rng(5)
        clip = ClipBounds()
        for _ in range(10_000):
            sem, llm, key = rng.uniform(0.0, 1.0, size=3)
            weights = MixtureWeights(*(float(w) for w in rng.dirichlet([1.0, 1.0, 1.0])))
            p = mix_coverage_signals(sem, llm, key, weights, clip)
            assert 0.05 <= p <= 0.95

    def test_estimate_clamps_assessor_signal(self, provider):
        entity = make_entity("cp", "chest pain", "symptom")
        estimate = estimate_coverage_probability(entity, "Any chest pain?", provider, FixedAssessor(7.0))
        assert estimate.llm == 1.0
        assert estimate.key == 1.0
        assert 0.05 <= estimate.p <= 0.95

    def test_unrelated_question_scores_lower(self, provider):
        entity = make_entity("cp", "chest pain", "symptom")
        assessor = FixedAssessor(0.5)
        related = estimate_coverage_probability(entity, "Do you have chest pain?", provider, assessor)
        unrelated = estimate_coverage_probability(entity, "Do you own a bicycle?", provider, assessor)
        assert related.p > unrelated.p

    def test_failure_carries_entity_id(self, provider):
        entity = make_entity("cp", "chest pain", "symptom")
        with pytest.raises(RewardComputationError) as info:
            estimate_coverage_probability(entity, "Any pain?", provider, BrokenAssessor(0.0))
        assert info.value.entity_id == "cp"

    def test_estimate_all_covers_every_entity(self, provider):
        uncovered = entities(4)
        probs = estimate_all(uncovered, "Any findings?", provider, FixedAssessor(0.5))
        assert set(probs.estimates) == {e.id for e in uncovered}

    def test_mixture_weights_must_sum_to_one(self):
        with pytest.raises(DomainValueError):
            MixtureWeights(0.5, 0.5, 0.5)


class CountingAssessor(FixedAssessor):
    def __init__(self, value):
        super().__init__(value)
        self.batches = []

    def relevance_many(self, entities, question):
        self.batches.append([e.id for e in entities])
        return super().relevance_many(entities, question)


class CountingProvider(LexicalEmbeddingProvider):
    def __init__(self):
        super().__init__()
        self.batches = []

    def embed_many(self, texts):
        self.batches.append(list(texts))
        return super().embed_many(texts)


class TestEstimateAllBatching:
    def test_one_batch_per_signal(self):
        uncovered = [make_entity("cp", "chest pain", "symptom"), make_entity("d", "dizziness", "symptom")]
        provider, assessor = CountingProvider(), CountingAssessor(0.4)
        estimate_all(uncovered, "Any chest pain?", provider, assessor)
        assert assessor.batches == [["cp", "d"]]
        assert provider.batches == [["Any chest pain?", "chest pain", "dizziness"]]

    def test_matches_single_entity_estimates(self, provider):
        uncovered = [make_entity("cp", "chest pain", "symptom"), make_entity("n", "nausea", "associated_symptom")]
        assessor = FixedAssessor(0.3)
        probs = estimate_all(uncovered, "Is the chest pain worse at night?", provider, assessor)
        for entity in uncovered:
            single = estimate_coverage_probability(entity, "Is the chest pain worse at night?", provider, assessor)
            assert probs.estimates[entity.id] == single

    def test_batch_failure_is_a_reward_error(self, provider):
        with pytest.raises(RewardComputationError, match="endpoint exploded"):
            estimate_all(entities(3), "Any pain?", provider, BrokenAssessor(0.0))

    def test_nothing_uncovered(self, provider):
        assert estimate_all([], "Any pain?", provider, BrokenAssessor(0.0)).estimates == {}
