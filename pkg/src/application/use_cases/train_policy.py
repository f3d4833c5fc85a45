"""
Training workflow.

Creates a run directory with the resolved config, runs the GRPO trainer
and streams per-step metrics and periodic checkpoints into it. A run
started from a checkpoint continues at the checkpoint's next epoch.
"""
from dataclasses import replace
from pathlib import Path
from typing import Optional

from src.application.dto import TrainingReport
from src.application.services.grpo import GrpoTrainer
from src.application.services.policy import StateFeaturizer, TemplateBank
from src.application.use_cases.common import read_checkpoint, resolve_cases
from src.domain.entities import AdamState, PolicyParameters
from src.infrastructure.storage.checkpoint_store import Checkpoint, save_checkpoint
from src.infrastructure.storage.run_store import (
    CHECKPOINT_DIR,
    FINAL_CHECKPOINT,
    METRICS_FILE,
    JsonlWriter,
    RunStore,
)
from src.shared.config import RunConfig
from src.shared.dependency_injection import DIContainer
from src.shared.logging import get_logger

logger = get_logger(__name__)


class TrainPolicyUseCase:
    def __init__(self, container: DIContainer):
        self.container = container
        self.config: RunConfig = container.get("config")

    def execute(self, resume: Optional[str] = None) -> TrainingReport:
        config = self.config
        if resume:
            # snapshot records the checkpoint it resumes from
            config = replace(config, paths=replace(config.paths, checkpoint=resume))
        run_dir = RunStore(config.paths.output_dir).create_run("train", config.to_yaml())
        cases = resolve_cases(config, run_dir)
        bank: TemplateBank = self.container.get("bank")
        featurizer: StateFeaturizer = self.container.get("featurizer")

        init = adam = None
        start_epoch = 0
        resume = config.paths.checkpoint
        if resume:
            checkpoint = read_checkpoint(self.container, resume)
            if checkpoint.seed != config.seed:
                logger.warning(
                    "Checkpoint seed differs from config seed",
                    checkpoint_seed=checkpoint.seed,
                    config_seed=config.seed,
                )
            init, adam, start_epoch = checkpoint.params, checkpoint.adam_state, checkpoint.next_epoch
            logger.info("Resuming training", checkpoint=resume, next_epoch=start_epoch)

        patient = self.container.get("patient_factory")(cases, config.seed)
        trainer = GrpoTrainer(
            cases,
            bank,
            featurizer,
            self.container.get("scorer"),
            patient,
            config.grpo_config(),
            config.simulator_settings(),
            workers=config.runtime.parallel_episodes,
            record_wall_time=config.runtime.record_wall_time,
        )

        checkpoint_dir = run_dir / CHECKPOINT_DIR

        def write_checkpoint(params: PolicyParameters, state: AdamState, next_epoch: int) -> None:
            checkpoint = Checkpoint(
                params=params,
                adam_state=state,
                next_epoch=next_epoch,
                bank_hash=bank.schema_hash(),
                feature_hash=featurizer.schema_hash(),
                seed=config.seed,
            )
            save_checkpoint(checkpoint, str(checkpoint_dir / f"epoch-{next_epoch:04d}.json"))

        metrics_path = run_dir / METRICS_FILE
        with JsonlWriter(metrics_path) as metrics:
            result = trainer.train(
                init=init,
                start_epoch=start_epoch,
                adam_state=adam,
                on_step=lambda record: metrics.write(record.to_record()),
                on_checkpoint=write_checkpoint,
            )

        final_path = checkpoint_dir / FINAL_CHECKPOINT
        save_checkpoint(
            Checkpoint(
                params=result.params,
                adam_state=result.adam_state,
                next_epoch=result.next_epoch,
                bank_hash=bank.schema_hash(),
                feature_hash=featurizer.schema_hash(),
                seed=config.seed,
            ),
            str(final_path),
        )
        logger.info("Training finished", run_dir=str(run_dir), steps=len(result.history))
        return TrainingReport(
            run_dir=Path(run_dir),
            metrics_path=metrics_path,
            checkpoint_path=final_path,
            start_epoch=start_epoch,
            next_epoch=result.next_epoch,
            history=result.history,
        )
