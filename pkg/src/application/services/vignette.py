"""
Synthetic vignette generation.

Cases are assembled from a per-category phrase vocabulary. Within a case
the important words of different entities never overlap, so every entity
is recoverable from the HPI text and from patient answers by exact phrase
matching alone.
"""
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

from src.domain.entities import CategoryRegistry, ClinicalEntity, Sex, VignetteCase
from src.domain.exceptions import CaseValidationError, DomainValueError
from src.shared.text import important_words

Phrase = Tuple[str, Tuple[str, ...]]

VOCABULARY: Dict[str, Tuple[Phrase, ...]] = {
    "symptom": (
        ("chest pain", ("chest discomfort",)),
        ("headache", ("cephalgia",)),
        ("nausea", ("queasiness",)),
        ("shortness of breath", ("breathlessness",)),
        ("dizziness", ("lightheadedness",)),
        ("fatigue", ("tiredness",)),
        ("fever", ("high temperature",)),
        ("cough", ()),
        ("abdominal pain", ("stomach ache",)),
        ("palpitations", ("racing heart",)),
        ("sore throat", ()),
        ("rash", ("skin eruption",)),
        ("joint pain", ("arthralgia",)),
    ),
    "temporal_pattern": (
        ("two days", ("48 hours",)),
        ("one week", ("seven days",)),
        ("three weeks", ()),
        ("sudden onset", ("abrupt start",)),
        ("gradual onset", ()),
        ("intermittent episodes", ("episodic",)),
        ("morning predominance", ()),
        ("several months", ()),
        ("nightly recurrence", ()),
        ("since yesterday", ()),
    ),
    "severity": (
        ("mild", ("slight",)),
        ("moderate", ()),
        ("severe", ("intense",)),
        ("seven out of ten", ()),
        ("worst ever", ()),
        ("barely noticeable", ()),
        ("disabling", ("incapacitating",)),
        ("excruciating", ()),
    ),
    "location": (
        ("left arm", ()),
        ("lower back", ()),
        ("right upper quadrant", ()),
        ("sternum", ("breastbone",)),
        ("temples", ()),
        ("epigastrium", ()),
        ("neck", ()),
        ("jaw", ()),
        ("shoulder blade", ()),
    ),
    "quality_character": (
        ("sharp", ()),
        ("dull ache", ()),
        ("burning", ()),
        ("squeezing", ("tightness",)),
        ("throbbing", ("pulsating",)),
        ("stabbing", ()),
        ("cramping", ()),
        ("tingling", ()),
        ("pressure", ("heaviness",)),
    ),
    "aggravating_factor": (
        ("exertion", ("physical activity",)),
        ("lying flat", ()),
        ("eating", ("meals",)),
        ("climbing stairs", ()),
        ("deep breathing", ()),
        ("bright light", ()),
        ("cold air", ()),
        ("bending forward", ()),
        ("prolonged standing", ()),
    ),
    "alleviating_factor": (
        ("rest", ()),
        ("antacids", ()),
        ("sitting upright", ()),
        ("ice packs", ()),
        ("dark quiet room", ()),
        ("heat application", ()),
        ("sleep", ()),
        ("leaning forward", ()),
        ("elevation", ()),
    ),
    "associated_symptom": (
        ("vomiting", ()),
        ("sweating", ("diaphoresis",)),
        ("blurred vision", ()),
        ("chills", ()),
        ("numbness", ()),
        ("loss of appetite", ()),
        ("weight loss", ()),
        ("night sweats", ()),
        ("photophobia", ("light sensitivity",)),
        ("swollen ankles", ()),
    ),
    "medical_history": (
        ("hypertension", ("high blood pressure",)),
        ("type 2 diabetes", ("diabetes mellitus",)),
        ("asthma", ()),
        ("prior myocardial infarction", ("previous heart attack",)),
        ("migraines", ()),
        ("hyperlipidemia", ("high cholesterol",)),
        ("gastroesophageal reflux", ("acid reflux",)),
        ("hypothyroidism", ()),
        ("chronic kidney disease", ()),
        ("anxiety disorder", ()),
    ),
    "medication": (
        ("aspirin", ()),
        ("metformin", ()),
        ("lisinopril", ()),
        ("albuterol inhaler", ()),
        ("omeprazole", ()),
        ("atorvastatin", ()),
        ("oral contraceptives", ()),
        ("acetaminophen", ("paracetamol",)),
        ("levothyroxine", ()),
        ("sertraline", ()),
    ),
}

STATEMENT_FRAMES: Dict[str, str] = {
    "symptom": "The patient reports {s}.",
    "temporal_pattern": "The timing is described as {s}.",
    "severity": "The severity is rated as {s}.",
    "location": "The problem is located at the {s}.",
    "quality_character": "The sensation is described as {s}.",
    "aggravating_factor": "Symptoms worsen with {s}.",
    "alleviating_factor": "Symptoms improve with {s}.",
    "associated_symptom": "Associated findings include {s}.",
    "medical_history": "Past medical history is notable for {s}.",
    "medication": "Current medications include {s}.",
}
FALLBACK_FRAME = "The patient mentions {s}."

DEFAULT_ENTITY_RANGE = (10, 15)
_MAX_ATTEMPTS = 200


def render_statement(entity: ClinicalEntity) -> str:
    """One-sentence clinical statement of an entity, containing its surface verbatim."""
    return STATEMENT_FRAMES.get(entity.category, FALLBACK_FRAME).format(s=entity.surface)


def chief_complaint_sentence(chief_complaint: str) -> str:
    return f"The patient presents with {chief_complaint}."


def footprint(surface: str, aliases: Sequence[str]) -> Set[str]:
    words: Set[str] = set(important_words(surface))
    for alias in aliases:
        words |= important_words(alias)
    return words


def _pick_phrases(
    categories: Sequence[str], rng: np.random.Generator
) -> List[Tuple[str, Phrase]]:
    chosen: List[Tuple[str, Phrase]] = []
    used: Set[str] = set()
    for label in categories:
        pool = [
            phrase
            for phrase in VOCABULARY[label]
            if not (footprint(phrase[0], phrase[1]) & used)
        ]
        if not pool:
            raise CaseValidationError(f"vocabulary for {label!r} exhausted within one case")
        phrase = pool[int(rng.integers(len(pool)))]
        used |= footprint(phrase[0], phrase[1])
        chosen.append((label, phrase))
    return chosen


def generate_synthetic_cases(
    n: int,
    seed: int,
    registry: CategoryRegistry = CategoryRegistry(),
    entity_range: Tuple[int, int] = DEFAULT_ENTITY_RANGE,
) -> List[VignetteCase]:
    """Deterministic synthetic vignettes with categories assigned round-robin."""
    low, high = entity_range
    if low < 1 or high < low:
        raise DomainValueError(f"entity range must satisfy 1 <= min <= max, got {entity_range}")
    missing = [label for label in registry.labels if label not in VOCABULARY]
    if missing:
        raise CaseValidationError(
            f"no synthetic vocabulary for categories: {', '.join(missing)}"
        )

    rng = np.random.default_rng(seed)
    labels = registry.labels
    cases: List[VignetteCase] = []
    for index in range(n):
        size = int(rng.integers(low, high + 1))
        categories = [labels[j % len(labels)] for j in range(size)]
        for _ in range(_MAX_ATTEMPTS):
            try:
                picks = _pick_phrases(categories, rng)
                break
            except CaseValidationError:
                continue
        else:
            raise CaseValidationError(f"could not assemble {size} disjoint entities")

        case_id = f"syn-{seed}-{index:04d}"
        entities = tuple(
            ClinicalEntity(
                id=f"e{j:02d}",
                surface=surface,
                category=label,
                importance_weight=registry.weight(label),
                aliases=aliases,
            )
            for j, (label, (surface, aliases)) in enumerate(picks)
        )
        age = int(rng.integers(18, 86))
        sex = (Sex.FEMALE, Sex.MALE)[int(rng.integers(2))]
        chief = next((e.surface for e in entities if e.category == "symptom"), entities[0].surface)
        statements = tuple(render_statement(entity) for entity in entities)
        hpi_text = " ".join((f"A {age}-year-old {sex.value} presents with {chief}.",) + statements)
        cases.append(
            VignetteCase(
                case_id=case_id,
                age=age,
                sex=sex,
                chief_complaint=chief,
                hpi_text=hpi_text,
                entities=entities,
                ground_truth_statements=statements,
            )
        )
    return cases
