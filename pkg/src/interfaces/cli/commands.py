"""
Command-line interface for the IGFT desk trainer.

Subcommands: gen, train, eval, simulate, report. Tables and transcripts
go to stdout, logs to stderr. Failures exit with the code carried by the
domain exception (3 config, 4 I/O, 5 remote, 1 anything else).
"""
import functools
import sys
from dataclasses import replace
from typing import Any, Callable, Iterable, Optional, Sequence

import click
from rich.console import Console
from rich.table import Table

from src.application.dto import SimulationReport
from src.application.use_cases import (
    EvaluatePolicyUseCase,
    GenerateCasesUseCase,
    ReportMetricsUseCase,
    SimulateEpisodeUseCase,
    TrainPolicyUseCase,
)
from src.domain.entities import QUALITY_DIMENSIONS
from src.domain.exceptions import (
    EXIT_FAILURE,
    EXIT_REMOTE,
    ConfigError,
    IgftError,
    RemoteDependencyError,
)
from src.infrastructure.reporting import compare_first_last, epoch_summaries
from src.infrastructure.service_providers import build_container
from src.shared.config import (
    POLICY_CHOICES,
    REMOTE_COMPONENTS,
    ConfigService,
    RunConfig,
    load_run_config,
)
from src.shared.logging import get_logger, setup_logging

logger = get_logger(__name__)


def _console() -> Console:
    return Console(highlight=False)


def exit_code_for(error: BaseException) -> int:
    """Exit code of the first domain error in the cause chain; remote failures win."""
    chain = []
    current: Optional[BaseException] = error
    while current is not None and current not in chain:
        chain.append(current)
        current = current.__cause__
    if any(isinstance(e, RemoteDependencyError) for e in chain):
        return EXIT_REMOTE
    for e in chain:
        if isinstance(e, IgftError):
            return e.exit_code
    return EXIT_FAILURE


def handle_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Turn escaping exceptions into a message on stderr and an exit code."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        err = Console(stderr=True, highlight=False)
        try:
            return command(*args, **kwargs)
        except ConfigError as exc:
            err.print("Invalid configuration:", style="bold red")
            for line in exc.errors:
                err.print(f"  - {line}", markup=False)
            sys.exit(exc.exit_code)
        except IgftError as exc:
            code = exit_code_for(exc)
            err.print(f"Error: {exc}", style="red", markup=False)
            sys.exit(code)
        except Exception as exc:  # noqa: BLE001
            logger.exception("Unexpected failure", error=type(exc).__name__)
            sys.exit(exit_code_for(exc))

    return wrapper


def resolve_config(
    config_path: Optional[str],
    remote: Sequence[str] = (),
    **paths: Optional[str],
) -> RunConfig:
    """Load the run config, apply command-line overrides and set up logging."""
    config_service = ConfigService()
    config = load_run_config(config_path, config_service)
    overrides = {key: value for key, value in paths.items() if value is not None}
    if overrides:
        config = replace(config, paths=replace(config.paths, **overrides))
    if remote:
        components = list(dict.fromkeys(list(config.remote.components) + list(remote)))
        config = replace(config, remote=replace(config.remote, components=components))
    config_service.set("LOG_LEVEL", config.runtime.log_level)
    setup_logging(config_service)
    return config


def config_options(command: Callable[..., Any]) -> Callable[..., Any]:
    command = click.option(
        "--remote",
        multiple=True,
        type=click.Choice(REMOTE_COMPONENTS),
        help="Use the remote implementation of a component (repeatable).",
    )(command)
    command = click.option(
        "--config", "config_path", type=click.Path(dir_okay=False), default=None, help="YAML run configuration."
    )(command)
    return command


@click.group()
@click.version_option("1.0.0", prog_name="igft")
def cli() -> None:
    """Information-gain fine-tuning of a question policy, at desk scale."""


@cli.command()
@config_options
@click.option("-n", "--n-cases", type=click.IntRange(min=0), default=None, help="Number of cases.")
@click.option("--seed", type=int, default=None, help="Generation seed (default: config seed).")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output JSONL file.")
@handle_errors
def gen(
    config_path: Optional[str], remote: Sequence[str], n_cases: Optional[int], seed: Optional[int], out: Optional[str]
) -> None:
    """Generate synthetic vignettes."""
    config = resolve_config(config_path, remote)
    result = GenerateCasesUseCase(config).execute(
        config.vignette.n_cases if n_cases is None else n_cases,
        config.seed if seed is None else seed,
        out or config.paths.cases,
    )
    _console().print(f"Wrote {result.n_cases} cases to {result.path} (seed {result.seed})")


@cli.command()
@config_options
@click.option("--resume", type=click.Path(dir_okay=False), default=None, help="Checkpoint to resume from.")
@click.option("--cases", type=click.Path(dir_okay=False), default=None, help="Case file (overrides paths.cases).")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None, help="Run directory root.")
@handle_errors
def train(
    config_path: Optional[str],
    remote: Sequence[str],
    resume: Optional[str],
    cases: Optional[str],
    output_dir: Optional[str],
) -> None:
    """Train the question policy with GRPO self-play."""
    config = resolve_config(config_path, remote, cases=cases, output_dir=output_dir)
    report = TrainPolicyUseCase(build_container(config)).execute(resume)
    console = _console()
    console.print(f"Run directory: {report.run_dir}")
    console.print(f"Metrics: {report.metrics_path} ({report.steps} steps)")
    console.print(f"Checkpoint: {report.checkpoint_path} (next epoch {report.next_epoch})")
    if report.history:
        comparison = compare_first_last(epoch_summaries(report.history))
        console.print(
            f"Episode IG: first {comparison.window} epochs {comparison.first:.4f}, "
            f"last {comparison.window} epochs {comparison.last:.4f}"
        )


@cli.command(name="eval")
@config_options
@click.option("--policy", type=click.Choice(POLICY_CHOICES), default=None, help="Policy to evaluate.")
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Checkpoint for --policy checkpoint.")
@click.option("--cases", type=click.Path(dir_okay=False), default=None, help="Case file (overrides paths.cases).")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None, help="Run directory root.")
@handle_errors
def evaluate(
    config_path: Optional[str],
    remote: Sequence[str],
    policy: Optional[str],
    checkpoint: Optional[str],
    cases: Optional[str],
    output_dir: Optional[str],
) -> None:
    """Evaluate a policy: HPI precision, recall and F1 over the configured seeds."""
    config = resolve_config(config_path, remote, cases=cases, output_dir=output_dir)
    report = EvaluatePolicyUseCase(build_container(config)).execute(policy, checkpoint)
    console = _console()
    click.echo(report.summary_text, nl=False)
    console.print(f"Run directory: {report.run_dir}")


def _print_transcript(console: Console, report: SimulationReport) -> None:
    trajectory = report.trajectory
    console.print(
        f"Case {report.case_id} | seed {report.seed} | policy {report.policy}", style="bold", markup=False
    )
    console.print(f"Chief complaint: {trajectory.chief_complaint}", markup=False)
    for turn in trajectory.turns:
        reward = turn.reward
        console.print(f"\nTurn {turn.index}", style="bold")
        console.print(f"  Doctor: {turn.question}", markup=False)
        console.print(f"  Patient: {turn.answer}", markup=False)
        console.print(f"  revealed: {', '.join(turn.revealed) or '-'}", markup=False)
        quality = " ".join(f"{name}={getattr(reward.quality, name):.4f}" for name in QUALITY_DIMENSIONS)
        console.print(f"  quality ({reward.quality.provenance}): {quality}", markup=False)
        console.print(
            f"  IG {reward.weighted_ig:.4f} + lambda {reward.quality_lambda:.2f} x quality "
            f"{reward.quality.aggregate:.4f} = reward {reward.total:.4f}",
            markup=False,
        )
    result = report.evaluation
    console.print(f"\nEpisode IG: {trajectory.episode_ig:.4f}")
    console.print(f"HPI: {report.hpi}", markup=False)
    console.print(f"precision {result.precision:.4f} | recall {result.recall:.4f} | F1 {result.f1:.4f}")


@cli.command()
@config_options
@click.argument("case_id")
@click.option("--seed", type=int, default=0, show_default=True, help="Episode seed.")
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Policy checkpoint.")
@click.option("--policy", type=click.Choice(POLICY_CHOICES), default=None, help="Policy (default: checkpoint if given, else uniform).")
@click.option("--cases", type=click.Path(dir_okay=False), default=None, help="Case file (overrides paths.cases).")
@handle_errors
def simulate(
    config_path: Optional[str],
    remote: Sequence[str],
    case_id: str,
    seed: int,
    checkpoint: Optional[str],
    policy: Optional[str],
    cases: Optional[str],
) -> None:
    """Play one episode and print its transcript and reward trace."""
    config = resolve_config(config_path, remote, cases=cases)
    report = SimulateEpisodeUseCase(build_container(config)).execute(case_id, seed, checkpoint, policy)
    _print_transcript(_console(), report)


@cli.command()
@click.argument("metrics_file", type=click.Path(dir_okay=False))
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Where plots and table go.")
@handle_errors
def report(metrics_file: str, out_dir: Optional[str]) -> None:
    """Plot reward and IG curves and write a summary table."""
    config_service = ConfigService()
    setup_logging(config_service)
    result = ReportMetricsUseCase().execute(metrics_file, out_dir)
    console = _console()
    click.echo(result.summary_text, nl=False)
    table = Table(show_header=False, box=None)
    for path in result.plots + (result.summary_path,):
        table.add_row("wrote", str(path))
    console.print(table)


def main(argv: Optional[Iterable[str]] = None) -> None:
    cli.main(args=list(argv) if argv is not None else None, prog_name="igft")
