"""
Evaluation workflow.

For every configured seed each case is played once by the selected policy,
the conversation is summarized into an HPI and scored against the ground
truth. Records go to ``eval.jsonl``; seed-level means are aggregated into
mean and standard deviation.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.application.dto import EvaluationReport, SimulationReport
from src.application.services import IPatient, IQuestionPolicy
from src.application.services.dialogue import run_episode, run_parallel
from src.application.services.hpi_eval import evaluate_trajectory
from src.application.use_cases.common import build_policy, resolve_cases
from src.domain.entities import VignetteCase
from src.domain.exceptions import StorageError
from src.infrastructure.reporting import aggregate_eval, eval_table, render_text
from src.infrastructure.storage.run_store import (
    EVAL_RECORDS_FILE,
    SUMMARY_FILE,
    TRAJECTORIES_FILE,
    JsonlWriter,
    RunStore,
    turn_records,
)
from src.shared.config import RunConfig
from src.shared.dependency_injection import DIContainer
from src.shared.logging import get_logger

logger = get_logger(__name__)


def play_case(
    container: DIContainer,
    policy: IQuestionPolicy,
    policy_name: str,
    patient: IPatient,
    case: VignetteCase,
    case_index: int,
    seed: int,
) -> SimulationReport:
    """One episode of ``case`` under ``seed``, summarized and scored."""
    config: RunConfig = container.get("config")
    scorer = container.get("scorer")
    trajectory = run_episode(
        policy,
        case,
        patient,
        scorer,
        np.random.default_rng([seed, case_index]),
        max_turns=config.simulator.max_turns,
        discount=config.grpo.discount,
        semantic_threshold=config.coverage.semantic_threshold,
    )
    hpi, result = evaluate_trajectory(
        trajectory,
        case,
        container.get("provider"),
        container.get("hpi_writer"),
        container.get("extractor"),
        config.evaluation.threshold,
    )
    return SimulationReport(
        case_id=case.case_id,
        seed=seed,
        policy=policy_name,
        trajectory=trajectory,
        hpi=hpi,
        evaluation=result,
    )


def eval_record(report: SimulationReport) -> Dict[str, Any]:
    result = report.evaluation
    return {
        "seed": report.seed,
        "case_id": report.case_id,
        "policy": report.policy,
        "precision": result.precision,
        "recall": result.recall,
        "f1": result.f1,
        "episode_ig": report.trajectory.episode_ig,
        "turns": len(report.trajectory),
        "covered": len(report.trajectory.final_coverage.covered),
        "entities": len(report.trajectory.initial_coverage.all_entities),
        "matched_pairs": [list(pair) for pair in result.matched_pairs],
        "hpi": report.hpi,
    }


class EvaluatePolicyUseCase:
    def __init__(self, container: DIContainer):
        self.container = container
        self.config: RunConfig = container.get("config")

    def run(
        self,
        policy_name: str,
        checkpoint: Optional[str],
        cases: Sequence[VignetteCase],
        seeds: Sequence[int],
    ) -> List[SimulationReport]:
        """Play every case under every seed, in (seed, case) order."""
        policy = build_policy(self.container, policy_name, checkpoint, self.config.evaluation.candidates)
        factory = self.container.get("patient_factory")
        reports: List[SimulationReport] = []
        for seed in seeds:
            patient = factory(cases, seed)
            jobs = [
                (lambda i=i, case=case: play_case(self.container, policy, policy_name, patient, case, i, seed))
                for i, case in enumerate(cases)
            ]
            reports.extend(run_parallel(jobs, self.config.runtime.parallel_episodes))
            logger.info("Seed evaluated", seed=seed, policy=policy_name, cases=len(cases))
        return reports

    def execute(self, policy_name: Optional[str] = None, checkpoint: Optional[str] = None) -> EvaluationReport:
        config = self.config
        policy_name = policy_name or config.evaluation.policy
        seeds = tuple(config.evaluation.seeds)
        run_dir = RunStore(config.paths.output_dir).create_run("eval", config.to_yaml())
        cases = resolve_cases(config, run_dir)

        reports = self.run(policy_name, checkpoint, cases, seeds)
        records = [eval_record(report) for report in reports]
        with JsonlWriter(run_dir / EVAL_RECORDS_FILE) as writer:
            writer.write_many(records)
        with JsonlWriter(run_dir / TRAJECTORIES_FILE) as writer:
            for episode, report in enumerate(reports):
                writer.write_many(turn_records(report.trajectory, episode, seed=report.seed))

        aggregate = aggregate_eval(records)
        summary = render_text(eval_table(aggregate, policy_name, seeds))
        try:
            (Path(run_dir) / SUMMARY_FILE).write_text(summary, encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot write eval summary: {exc}") from exc
        logger.info(
            "Evaluation finished",
            run_dir=str(run_dir),
            policy=policy_name,
            f1=f"{aggregate['f1'][0]:.4f}",
            episode_ig=f"{aggregate['episode_ig'][0]:.4f}",
        )
        return EvaluationReport(
            run_dir=Path(run_dir),
            policy=policy_name,
            seeds=seeds,
            records=records,
            aggregate=aggregate,
            summary_text=summary,
        )
