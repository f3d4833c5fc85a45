"""
Template-bank question policies.

The learnable doctor is a linear softmax over a fixed bank of question
templates, conditioned on a small feature summary of the dialogue state.
Slots are filled from the current coverage, so the rendered text is a pure
function of (template index, state).
"""
import hashlib
import json
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.application.services import IQuestionPolicy
from src.application.services.coverage import exact_match
from src.application.services.quality import category_phrase
from src.domain.entities import (
    CategoryRegistry,
    CoverageState,
    DialogueContext,
    PolicyParameters,
    QuestionCandidate,
)
from src.domain.exceptions import ContractViolationError

SLOT_HINT = "hint"
SLOT_CATEGORY = "category"

HINT_TEMPLATES: Dict[str, str] = {
    "symptom": "Can you tell me more about the {hint}?",
    "temporal_pattern": "Would you describe the timing as {hint}?",
    "severity": "Would you rate it as {hint}?",
    "location": "Do you notice it around the {hint}?",
    "quality_character": "Would you call the feeling {hint}?",
    "aggravating_factor": "Does {hint} make it worse?",
    "alleviating_factor": "Does {hint} make it better?",
    "associated_symptom": "Have you also had any {hint}?",
    "medical_history": "Have you been diagnosed with {hint}?",
    "medication": "Are you currently taking {hint}?",
}
CATEGORY_TEMPLATES: Dict[str, str] = {
    "symptom": "What {category} are bothering you?",
    "temporal_pattern": "Can you walk me through the {category}?",
    "severity": "How would you judge the {category}?",
    "location": "Can you point to the {category}?",
    "quality_character": "How would you put the {category} into words?",
    "aggravating_factor": "Have you noticed any {category}?",
    "alleviating_factor": "Has anything given you {category}?",
    "associated_symptom": "Have there been any {category}?",
    "medical_history": "Could you go over your {category}?",
    "medication": "Which {category} do you use?",
}
CATEGORY_PHRASES: Dict[str, str] = {
    "symptom": "other symptoms",
    "temporal_pattern": "timing",
    "severity": "severity",
    "location": "location",
    "quality_character": "character",
    "aggravating_factor": "triggers",
    "alleviating_factor": "relief",
    "associated_symptom": "associated symptoms",
    "medical_history": "medical history",
    "medication": "medications",
}
FALLBACK_HINT_TEMPLATE = "Can you tell me about the {hint}?"
FALLBACK_CATEGORY_TEMPLATE = "Is there any {category} to mention?"

ORACLE_EXHAUSTED_QUESTION = "Is there anything else you would like to tell me?"


@dataclass(frozen=True)
class QuestionTemplate:
    """A question pattern with an optional slot.

    ``category`` pins the slot to one registry category; when it is None the
    slot is filled from the category with the largest uncovered weighted mass.
    """
    text: str
    slot: Optional[str] = None
    category: Optional[str] = None


def phrase_for(label: str) -> str:
    return CATEGORY_PHRASES.get(label, category_phrase(label))


def top_mass_category(coverage: CoverageState, registry: CategoryRegistry) -> str:
    """Category with the largest w_c * |uncovered in c|; ties go to registry order."""
    counts: Dict[str, int] = {}
    for entity in coverage.uncovered:
        counts[entity.category] = counts.get(entity.category, 0) + 1
    best_label = registry.labels[0]
    best_mass = 0.0
    for label in registry.labels:
        mass = registry.weight(label) * counts.get(label, 0)
        if mass > best_mass:
            best_label, best_mass = label, mass
    return best_label


def hint_for(label: str, coverage: CoverageState) -> str:
    for entity in coverage.uncovered:
        if entity.category == label:
            return entity.surface
    return phrase_for(label)


class TemplateBank:
    """Ordered question templates: one hint and one category template per category plus generics."""

    def __init__(self, registry: CategoryRegistry, templates: Sequence[QuestionTemplate]):
        covered = {t.category for t in templates if t.category is not None}
        missing = [label for label in registry.labels if label not in covered]
        if missing:
            raise ContractViolationError(f"template bank lacks templates for {missing}")
        if len(templates) < len(registry):
            raise ContractViolationError("template bank must hold at least one template per category")
        self.registry = registry
        self.templates: Tuple[QuestionTemplate, ...] = tuple(templates)

    @classmethod
    def default(cls, registry: CategoryRegistry = CategoryRegistry()) -> "TemplateBank":
        templates: List[QuestionTemplate] = []
        for label in registry.labels:
            templates.append(
                QuestionTemplate(HINT_TEMPLATES.get(label, FALLBACK_HINT_TEMPLATE), SLOT_HINT, label)
            )
        for label in registry.labels:
            templates.append(
                QuestionTemplate(
                    CATEGORY_TEMPLATES.get(label, FALLBACK_CATEGORY_TEMPLATE), SLOT_CATEGORY, label
                )
            )
        templates.extend(
            (
                QuestionTemplate("What brings you in today?"),
                QuestionTemplate("Is there anything else you would like to tell me?"),
                QuestionTemplate("Could you tell me about the {hint}?", SLOT_HINT),
                QuestionTemplate("Do you have any {category} you haven't mentioned?", SLOT_CATEGORY),
            )
        )
        return cls(registry, templates)

    def __len__(self) -> int:
        return len(self.templates)

    def render(self, index: int, coverage: CoverageState) -> str:
        if not (0 <= index < len(self.templates)):
            raise ContractViolationError(f"template index {index} outside bank of {len(self)}")
        template = self.templates[index]
        if template.slot is None:
            return template.text
        label = template.category or top_mass_category(coverage, self.registry)
        if template.slot == SLOT_HINT:
            return template.text.format(hint=hint_for(label, coverage))
        return template.text.format(category=phrase_for(label))

    def schema_hash(self) -> str:
        payload = json.dumps(
            [[t.text, t.slot, t.category] for t in self.templates], separators=(",", ":")
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class StateFeaturizer:
    """Fixed-length feature summary phi(s_t); every entry lies in [0, 1]."""

    def __init__(self, registry: CategoryRegistry = CategoryRegistry()):
        self.registry = registry
        self.names: Tuple[str, ...] = (
            tuple(f"uncovered:{label}" for label in registry.labels)
            + ("turn_fraction", "covered_fraction", "last_answer_informative")
            + tuple(f"chief_complaint:{label}" for label in registry.labels)
        )

    @property
    def dim(self) -> int:
        return len(self.names)

    def chief_complaint_category(self, context: DialogueContext) -> str:
        case = context.case
        for entity in case.entities:
            if exact_match(entity, case.chief_complaint):
                return entity.category
        return case.entities[0].category

    def featurize(self, context: DialogueContext) -> np.ndarray:
        n_categories = len(self.registry)
        n_entities = len(context.coverage.all_entities)
        phi = np.zeros(self.dim)
        for entity in context.coverage.uncovered:
            if entity.category in self.registry:
                phi[self.registry.index(entity.category)] += 1.0 / n_entities
        phi[n_categories] = min(context.turn / context.max_turns, 1.0)
        phi[n_categories + 1] = context.coverage.fraction_covered
        phi[n_categories + 2] = 1.0 if context.last_answer_informative else 0.0
        label = self.chief_complaint_category(context)
        if label in self.registry:
            phi[n_categories + 3 + self.registry.index(label)] = 1.0
        return phi

    def schema_hash(self) -> str:
        return hashlib.sha256("\n".join(self.names).encode("utf-8")).hexdigest()


def _logits(params: PolicyParameters, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1 or features.shape[0] != params.n_features:
        raise ContractViolationError(
            f"feature vector of shape {features.shape} does not match F={params.n_features}"
        )
    return params.theta @ features + params.bias


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    return shifted - np.log(np.sum(np.exp(shifted)))


def action_distribution(params: PolicyParameters, features: np.ndarray) -> np.ndarray:
    """softmax(theta . phi + b) over the template bank."""
    logits = _logits(params, features)
    shifted = np.exp(logits - np.max(logits))
    return shifted / np.sum(shifted)


def action_log_probs(params: PolicyParameters, features: np.ndarray) -> np.ndarray:
    return log_softmax(_logits(params, features))


def sample_candidates(
    params: PolicyParameters,
    features: np.ndarray,
    k: int,
    rng: np.random.Generator,
    render: Optional[Callable[[int], str]] = None,
) -> List[QuestionCandidate]:
    """K independent draws with replacement, each with its exact log-probability."""
    if k < 1:
        raise ContractViolationError(f"candidate count must be >= 1, got {k}")
    probs = action_distribution(params, features)
    log_probs = action_log_probs(params, features)
    indices = rng.choice(len(probs), size=k, replace=True, p=probs)
    return [
        QuestionCandidate(
            text=render(int(i)) if render else f"template-{int(i)}",
            log_prob=float(log_probs[int(i)]),
            template_index=int(i),
            features=features,
        )
        for i in indices
    ]


class SoftmaxQuestionPolicy(IQuestionPolicy):
    """Learnable linear-softmax policy over a template bank."""

    def __init__(
        self,
        params: PolicyParameters,
        bank: TemplateBank,
        featurizer: StateFeaturizer,
        group_size: int = 2,
    ):
        if params.n_actions != len(bank) or params.n_features != featurizer.dim:
            raise ContractViolationError(
                f"parameters {params.theta.shape} do not fit bank M={len(bank)}, F={featurizer.dim}"
            )
        self.params = params
        self.bank = bank
        self.featurizer = featurizer
        self.group_size = group_size

    def propose(self, context: DialogueContext, rng: np.random.Generator) -> List[QuestionCandidate]:
        features = self.featurizer.featurize(context)
        return sample_candidates(
            self.params,
            features,
            self.group_size,
            rng,
            render=lambda index: self.bank.render(index, context.coverage),
        )

    def with_params(self, params: PolicyParameters) -> "SoftmaxQuestionPolicy":
        return SoftmaxQuestionPolicy(params, self.bank, self.featurizer, self.group_size)


def uniform_policy(
    bank: TemplateBank, featurizer: StateFeaturizer, group_size: int = 2
) -> SoftmaxQuestionPolicy:
    """Untrained baseline: theta = 0, b = 0."""
    return SoftmaxQuestionPolicy(
        PolicyParameters.zeros(len(bank), featurizer.dim), bank, featurizer, group_size
    )


class OraclePolicy(IQuestionPolicy):
    """Asks directly about up to ``cap`` uncovered entities per turn."""

    def __init__(self, cap: int = 2):
        if cap < 1:
            raise ContractViolationError("oracle cap must be >= 1")
        self.cap = cap

    def propose(self, context: DialogueContext, rng: np.random.Generator) -> List[QuestionCandidate]:
        targets = [entity.surface for entity in context.coverage.uncovered[: self.cap]]
        if not targets:
            return [QuestionCandidate(text=ORACLE_EXHAUSTED_QUESTION)]
        named = " and the ".join(targets)
        return [QuestionCandidate(text=f"Tell me about the {named}?")]
