"""
Case repository for the IGFT desk trainer.

Cases are stored as JSON Lines, one case per line. Parse failures carry a
path:line locator; data-model violations are reported the same way. Entity
weights are not stored: they come from the category registry at load time.
"""
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from src.domain.entities import CategoryRegistry, ClinicalEntity, Sex, VignetteCase
from src.domain.exceptions import (
    CaseFileParseError,
    CaseValidationError,
    StorageError,
    UnknownCaseError,
)
from src.shared.logging import get_logger

logger = get_logger(__name__)

_CASE_KEYS = ("case_id", "age", "sex", "chief_complaint", "hpi_text", "entities")
_ENTITY_KEYS = ("id", "surface", "category")


def case_to_record(case: VignetteCase) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "case_id": case.case_id,
        "age": case.age,
        "sex": case.sex.value,
        "chief_complaint": case.chief_complaint,
        "hpi_text": case.hpi_text,
        "entities": [
            {
                "id": entity.id,
                "surface": entity.surface,
                "category": entity.category,
                "aliases": list(entity.aliases),
            }
            for entity in case.entities
        ],
    }
    if case.ground_truth_statements is not None:
        record["ground_truth_statements"] = list(case.ground_truth_statements)
    return record


def _entity_from_record(raw: Any, registry: CategoryRegistry, where: str) -> ClinicalEntity:
    if not isinstance(raw, dict):
        raise CaseValidationError(f"{where}: entity must be an object")
    missing = [key for key in _ENTITY_KEYS if key not in raw]
    if missing:
        raise CaseValidationError(f"{where}: entity missing {', '.join(missing)}")
    category = raw["category"]
    if category not in registry:
        raise CaseValidationError(
            f"{where}: entity {raw['id']!r} has unknown category {category!r}"
        )
    return ClinicalEntity(
        id=str(raw["id"]),
        surface=str(raw["surface"]),
        category=category,
        importance_weight=registry.weight(category),
        aliases=tuple(str(alias) for alias in raw.get("aliases", ())),
    )


def case_from_record(
    record: Dict[str, Any], registry: CategoryRegistry, where: str = "case"
) -> VignetteCase:
    missing = [key for key in _CASE_KEYS if key not in record]
    if missing:
        raise CaseValidationError(f"{where}: missing {', '.join(missing)}")
    try:
        sex = Sex(record["sex"])
    except ValueError:
        raise CaseValidationError(f"{where}: unknown sex {record['sex']!r}") from None
    try:
        entities = tuple(
            _entity_from_record(raw, registry, where) for raw in record["entities"]
        )
        statements = record.get("ground_truth_statements")
        return VignetteCase(
            case_id=str(record["case_id"]),
            age=int(record["age"]),
            sex=sex,
            chief_complaint=str(record["chief_complaint"]),
            hpi_text=str(record["hpi_text"]),
            entities=entities,
            ground_truth_statements=tuple(statements) if statements is not None else None,
        )
    except CaseValidationError as exc:
        if str(exc).startswith(where):
            raise
        raise CaseValidationError(f"{where}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise CaseValidationError(f"{where}: {exc}") from exc


class CaseRepository:
    """Reads and writes vignette case files."""

    def __init__(self, registry: CategoryRegistry = CategoryRegistry()):
        self.registry = registry

    def load(self, path: str) -> List[VignetteCase]:
        file_path = Path(path)
        try:
            lines = file_path.read_text(encoding="utf-8").splitlines()
        except FileNotFoundError:
            raise StorageError(f"case file not found: {path}") from None
        except OSError as exc:
            raise StorageError(f"cannot read case file {path}: {exc}") from exc

        cases: List[VignetteCase] = []
        seen = set()
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CaseFileParseError(str(path), number, exc.msg) from exc
            if not isinstance(record, dict):
                raise CaseFileParseError(str(path), number, "record must be a JSON object")
            case = case_from_record(record, self.registry, where=f"{path}:{number}")
            if case.case_id in seen:
                raise CaseValidationError(f"{path}:{number}: duplicate case_id {case.case_id!r}")
            seen.add(case.case_id)
            cases.append(case)

        logger.info("Loaded cases", path=str(path), count=len(cases))
        return cases

    def save(self, cases: Iterable[VignetteCase], path: str) -> int:
        file_path = Path(path)
        lines = [json.dumps(case_to_record(case), ensure_ascii=False) for case in cases]
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            file_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot write case file {path}: {exc}") from exc
        logger.info("Saved cases", path=str(path), count=len(lines))
        return len(lines)


def load_cases(path: str, registry: CategoryRegistry = CategoryRegistry()) -> List[VignetteCase]:
    return CaseRepository(registry).load(path)


def save_cases(
    cases: Iterable[VignetteCase], path: str, registry: Optional[CategoryRegistry] = None
) -> int:
    return CaseRepository(registry or CategoryRegistry()).save(cases, path)


def find_case(cases: Iterable[VignetteCase], case_id: str) -> VignetteCase:
    cases = list(cases)
    for case in cases:
        if case.case_id == case_id:
            return case
    raise UnknownCaseError(case_id, [case.case_id for case in cases])
