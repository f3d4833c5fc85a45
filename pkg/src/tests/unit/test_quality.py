import numpy as np
import pytest

from src.application.services.quality import HeuristicQualityAssessor, combine_reward
from src.application.services.rewards import RewardScorer, realized_gain
from src.domain.entities import (
    QUALITY_DIMENSIONS,
    CoverageState,
    QualityScores,
    UncoveredDigest,
)
from src.domain.exceptions import ContractViolationError, DomainValueError
from src.domain.value_objects import RewardSettings
from src.tests.conftest import make_entity

CHEST = make_entity("cp", "chest pain", "symptom")
ONSET = make_entity("td", "two days", "temporal_pattern", 0.9)
SITE = make_entity("st", "sternum", "location", 0.8)


def digest(*uncovered):
    return UncoveredDigest(uncovered=tuple(uncovered), all_entities=(CHEST, ONSET, SITE))


def scores(*values, provenance="heuristic"):
    return QualityScores.from_mapping(dict(zip(QUALITY_DIMENSIONS, values)), provenance)


class TestHeuristicAssessor:
    def test_bare_question_mark(self, assessor):
        result = assessor.assess("?", "", digest(CHEST, ONSET))
        assert result.specificity == 0.0
        assert result.patient_engagement == 1.0
        assert result.information_gathering <= 0.05 + 1e-12
        assert result.clinical_relevance == 0.0
        assert result.comprehensiveness == 0.0

    def test_nothing_left_to_gather(self, assessor):
        result = assessor.assess("When did the chest pain start?", "", digest())
        assert result.information_gathering == 0.0
        assert result.comprehensiveness == 0.0

    def test_targeted_question_gathers_more(self, assessor):
        state = digest(CHEST, ONSET, SITE)
        targeted = assessor.assess("When did the chest pain start?", "", state)
        vague = assessor.assess("Tell me more.", "", state)
        assert targeted.information_gathering >= vague.information_gathering

    def test_specificity_counts_stopwords(self, assessor):
        assert assessor.assess("What is the pain?", "", digest(CHEST)).specificity == pytest.approx(0.25)

    def test_engagement_decays_for_long_statements(self, assessor):
        question = " ".join(["symptom"] * 45)
        assert assessor.assess(question, "", digest(CHEST)).patient_engagement == pytest.approx(0.25)

    def test_relevance_baseline(self, assessor):
        assert assessor.relevance(CHEST, "?") == 0.0
        assert assessor.relevance(CHEST, "Any fever?") == 0.5
        assert assessor.relevance(CHEST, "Is the pain sharp?") == 0.75
        assert assessor.relevance(CHEST, "Any chest pain?") == 1.0

    def test_deterministic(self, provider):
        rng = np.random.default_rng(4)
        words = ["chest", "pain", "when", "did", "start", "sternum", "days", "how", "bad", "?"]
        first = HeuristicQualityAssessor(provider)
        second = HeuristicQualityAssessor(provider)
        for _ in range(50):
            question = " ".join(rng.choice(words, size=int(rng.integers(1, 8))))
            state = digest(CHEST, ONSET)
            assert first.assess(question, "", state) == second.assess(question, "", state)

    def test_scores_stay_in_unit_interval(self, assessor):
        for question in ("chest pain chest pain?", "What timing location severity?", "x"):
            result = assessor.assess(question, "", digest(CHEST, ONSET, SITE))
            assert all(0.0 <= v <= 1.0 for v in result.as_dict().values())


class TestQualityScores:
    def test_aggregate_is_mean(self):
        assert scores(0.8, 0.7, 0.9, 0.85, 0.6).aggregate == pytest.approx(0.77, abs=1e-9)

    def test_out_of_range_rejected(self):
        with pytest.raises(ContractViolationError):
            scores(1.2, 0.5, 0.5, 0.5, 0.5)


class TestCombineReward:
    def test_example(self):
        reward = combine_reward(1.244607, scores(0.8, 0.8, 0.8, 0.8, 0.8), 0.5)
        assert reward.total == pytest.approx(1.644607, abs=1e-6)

    def test_zero_lambda_is_pure_gain(self):
        assert combine_reward(1.2, scores(0.3, 0.9, 0.1, 0.5, 0.7), 0.0).total == 1.2

    def test_pure_quality(self):
        assert combine_reward(0.0, scores(1.0, 1.0, 1.0, 1.0, 1.0), 0.5).total == pytest.approx(0.5)

    def test_negative_lambda(self):
        with pytest.raises(DomainValueError):
            combine_reward(1.0, scores(0.5, 0.5, 0.5, 0.5, 0.5), -0.1)

    def test_monotone_in_every_dimension(self):
        base = [0.4, 0.4, 0.4, 0.4, 0.4]
        reference = combine_reward(1.0, scores(*base), 0.5).total
        for i in range(len(QUALITY_DIMENSIONS)):
            raised = list(base)
            raised[i] = 0.6
            assert combine_reward(1.0, scores(*raised), 0.5).total > reference
        assert combine_reward(1.1, scores(*base), 0.5).total > reference


class TestRewardScorer:
    QUESTIONS = (
        "Can you tell me more about the chest pain?",
        "Would you describe the timing as two days?",
        "What brings you in today?",
        "Do you notice it around the sternum?",
    )

    def test_total_identity(self, scorer):
        coverage = CoverageState.initial((CHEST, ONSET, SITE))
        for question in self.QUESTIONS:
            reward = scorer.score(question, coverage)
            assert reward.total == pytest.approx(
                reward.weighted_ig + reward.quality_lambda * reward.quality.aggregate
            )
            assert set(reward.probabilities.estimates) == {"cp", "td", "st"}

    def test_zero_lambda_ranks_by_gain(self, provider, assessor):
        scorer = RewardScorer(provider, assessor, RewardSettings(quality_lambda=0.0))
        coverage = CoverageState.initial((CHEST, ONSET, SITE))
        rewards = scorer.score_many(self.QUESTIONS, coverage)
        assert list(np.argsort([r.total for r in rewards])) == list(
            np.argsort([r.weighted_ig for r in rewards])
        )

    def test_realized_gain_weights_revealed_entities(self):
        coverage = CoverageState.initial((CHEST, ONSET, SITE))
        assert realized_gain(("td", "st"), coverage) == pytest.approx(1.7)
        assert realized_gain((), coverage) == 0.0
