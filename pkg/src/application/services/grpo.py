"""
Group-relative policy optimization for the template policy.

For a group of K candidates drawn at one state, the ranking weights are
u = softmax(r / tau) and the loss is L = -sum_i u_i log pi(a_i | s).
Rewards are constants, so for the linear-softmax policy the gradient is
sum_i u_i (pi - e_{a_i}) for the bias and the same vector outer phi for
the weight matrix. Updates use Adam moments with decoupled weight decay.
"""
import time
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.application.services import IPatient
from src.application.services.dialogue import run_episode, run_parallel
from src.application.services.policy import (
    SoftmaxQuestionPolicy,
    StateFeaturizer,
    TemplateBank,
    action_distribution,
    action_log_probs,
)
from src.application.services.rewards import RewardScorer
from src.domain.entities import (
    AdamState,
    GroupSample,
    PolicyGradient,
    PolicyParameters,
    QuestionCandidate,
    StepMetrics,
    Trajectory,
    TrainingResult,
    VignetteCase,
)
from src.domain.exceptions import (
    ConfigError,
    ContractViolationError,
    IgftError,
    NonFiniteGradientError,
)
from src.domain.value_objects import GrpoConfig, SimulatorSettings
from src.shared.logging import get_logger

logger = get_logger(__name__)

CheckpointCallback = Callable[[PolicyParameters, AdamState, int], None]
MetricsSink = Callable[[StepMetrics], None]


def ranking_weights(rewards: Sequence[float], tau: float) -> np.ndarray:
    """softmax(r / tau); rewards are treated as constants."""
    if tau <= 0:
        raise ConfigError([f"grpo.tau: must be > 0, got {tau}"])
    r = np.asarray(rewards, dtype=np.float64)
    if not np.all(np.isfinite(r)):
        raise ContractViolationError("group rewards must be finite")
    z = r / tau
    e = np.exp(z - np.max(z))
    # underflow floor keeps every weight strictly positive
    w = np.maximum(e / np.sum(e), np.finfo(np.float64).tiny)
    return w / np.sum(w)


def build_group(candidates: Sequence[QuestionCandidate], tau: float) -> GroupSample:
    """Turn the scored candidates of one turn into a GRPO group."""
    if len(candidates) < 2:
        raise ContractViolationError(f"a group needs at least 2 candidates, got {len(candidates)}")
    if any(c.template_index is None or c.features is None or c.reward is None for c in candidates):
        raise ContractViolationError("group candidates need template index, features and reward")
    rewards = tuple(float(c.reward.total) for c in candidates)
    weights = ranking_weights(rewards, tau)
    return GroupSample(
        features=candidates[0].features,
        actions=tuple(int(c.template_index) for c in candidates),
        rewards=rewards,
        log_probs=tuple(float(c.log_prob) for c in candidates),
        weights=tuple(float(w) for w in weights),
    )


def grpo_loss(group: GroupSample, params: Optional[PolicyParameters] = None) -> float:
    """-sum_i u_i log pi(a_i); log-probs are recomputed when ``params`` is given."""
    if params is None:
        log_probs = np.asarray(group.log_probs)
    else:
        log_probs = action_log_probs(params, group.features)[list(group.actions)]
    return float(-np.dot(np.asarray(group.weights), log_probs))


def grpo_gradient(group: GroupSample, params: PolicyParameters) -> PolicyGradient:
    probs = action_distribution(params, group.features)
    bracket = np.zeros_like(probs)
    for weight, action in zip(group.weights, group.actions):
        bracket += weight * probs
        bracket[action] -= weight
    return PolicyGradient(theta=np.outer(bracket, group.features), bias=bracket)


def batch_gradient(
    groups: Sequence[GroupSample], params: PolicyParameters
) -> Tuple[PolicyGradient, float]:
    """Mean gradient and mean loss over a batch of groups."""
    if not groups:
        raise ContractViolationError("cannot compute a gradient from an empty batch")
    theta = np.zeros_like(params.theta)
    bias = np.zeros_like(params.bias)
    loss = 0.0
    for group in groups:
        gradient = grpo_gradient(group, params)
        theta += gradient.theta
        bias += gradient.bias
        loss += grpo_loss(group, params)
    n = len(groups)
    return PolicyGradient(theta=theta / n, bias=bias / n), loss / n


def _adamw(
    value: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    step: int,
    config: GrpoConfig,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    value = value - config.learning_rate * config.weight_decay * value
    m = config.beta1 * m + (1.0 - config.beta1) * grad
    v = config.beta2 * v + (1.0 - config.beta2) * grad * grad
    m_hat = m / (1.0 - config.beta1 ** step)
    v_hat = v / (1.0 - config.beta2 ** step)
    value = value - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return value, m, v


def optimizer_step(
    params: PolicyParameters,
    gradient: PolicyGradient,
    config: GrpoConfig,
    state: AdamState,
) -> Tuple[PolicyParameters, AdamState]:
    """One AdamW update: decoupled decay, then the bias-corrected moment step."""
    if gradient.theta.shape != params.theta.shape or gradient.bias.shape != params.bias.shape:
        raise ContractViolationError(
            f"gradient shapes {gradient.theta.shape}/{gradient.bias.shape} do not match parameters"
        )
    if not gradient.is_finite():
        raise NonFiniteGradientError("gradient contains NaN or infinite entries")
    step = state.step + 1
    theta, m_theta, v_theta = _adamw(params.theta, gradient.theta, state.m_theta, state.v_theta, step, config)
    bias, m_bias, v_bias = _adamw(params.bias, gradient.bias, state.m_bias, state.v_bias, step, config)
    return (
        PolicyParameters(theta=theta, bias=bias),
        AdamState(m_theta=m_theta, m_bias=m_bias, v_theta=v_theta, v_bias=v_bias, step=step),
    )


def groups_from_trajectories(
    trajectories: Iterable[Trajectory], tau: float, limit: int
) -> Tuple[List[GroupSample], List[Trajectory]]:
    """First ``limit`` turn groups, and the trajectories they were drawn from."""
    groups: List[GroupSample] = []
    used: List[Trajectory] = []
    for trajectory in trajectories:
        if len(groups) >= limit:
            break
        used.append(trajectory)
        for turn in trajectory.turns:
            if len(groups) >= limit:
                break
            groups.append(build_group(turn.candidates, tau))
    return groups, used


class GrpoTrainer:
    """Runs epochs x steps of self-play and GRPO updates.

    Every random draw is derived from (seed, epoch, step, episode), so a run
    resumed from an epoch-boundary checkpoint replays the uninterrupted one.
    """

    def __init__(
        self,
        cases: Sequence[VignetteCase],
        bank: TemplateBank,
        featurizer: StateFeaturizer,
        scorer: RewardScorer,
        patient: IPatient,
        config: GrpoConfig = GrpoConfig(),
        simulator: SimulatorSettings = SimulatorSettings(),
        workers: int = 1,
        record_wall_time: bool = False,
    ):
        if not cases:
            raise ContractViolationError("training needs at least one case")
        self.cases = list(cases)
        self.bank = bank
        self.featurizer = featurizer
        self.scorer = scorer
        self.patient = patient
        self.config = config
        self.simulator = simulator
        self.workers = workers
        self.record_wall_time = record_wall_time

    def _episode(self, params: PolicyParameters, epoch: int, step: int, index: int) -> Trajectory:
        rng = np.random.default_rng([self.config.seed, epoch, step, index])
        case = self.cases[int(rng.integers(len(self.cases)))]
        policy = SoftmaxQuestionPolicy(params, self.bank, self.featurizer, self.config.group_size)
        return run_episode(
            policy,
            case,
            self.patient,
            self.scorer,
            rng,
            max_turns=self.simulator.max_turns,
            discount=self.config.discount,
            semantic_threshold=self.scorer.settings.semantic_threshold,
        )

    def collect(
        self, params: PolicyParameters, epoch: int, step: int
    ) -> Tuple[List[GroupSample], List[Trajectory]]:
        """Fresh episodes until a full batch of turn groups is available."""
        trajectories: List[Trajectory] = []
        wave = max(self.workers, 1)
        while True:
            start = len(trajectories)
            jobs = [
                (lambda i=i: self._episode(params, epoch, step, i))
                for i in range(start, start + wave)
            ]
            trajectories.extend(run_parallel(jobs, self.workers))
            turns = sum(len(t) for t in trajectories)
            if turns >= self.config.batch_size:
                break
            if all(len(t) == 0 for t in trajectories[start:]):
                raise ContractViolationError("episodes produced no turns; every case is already covered")
        return groups_from_trajectories(trajectories, self.config.tau, self.config.batch_size)

    def train(
        self,
        init: Optional[PolicyParameters] = None,
        start_epoch: int = 0,
        adam_state: Optional[AdamState] = None,
        on_step: Optional[MetricsSink] = None,
        on_checkpoint: Optional[CheckpointCallback] = None,
    ) -> TrainingResult:
        params = init if init is not None else PolicyParameters.zeros(len(self.bank), self.featurizer.dim)
        if params.n_actions != len(self.bank) or params.n_features != self.featurizer.dim:
            raise ContractViolationError("initial parameters do not fit the bank and feature schema")
        state = adam_state if adam_state is not None else AdamState.zeros_like(params)
        history: List[StepMetrics] = []

        epoch = start_epoch
        checkpointed = (params, state)
        try:
            for epoch in range(start_epoch, self.config.epochs):
                checkpointed = (params, state)
                epoch_records: List[StepMetrics] = []
                for step in range(self.config.steps_per_epoch):
                    started = time.perf_counter()
                    groups, used = self.collect(params, epoch, step)
                    gradient, loss = batch_gradient(groups, params)
                    skipped = False
                    try:
                        params, state = optimizer_step(params, gradient, self.config, state)
                    except NonFiniteGradientError as exc:
                        skipped = True
                        logger.error("Skipping optimizer step", epoch=epoch, step=step, error=str(exc))
                    record = StepMetrics(
                        epoch=epoch,
                        step=step,
                        mean_reward=float(np.mean([np.mean(g.rewards) for g in groups])),
                        loss=float(loss),
                        mean_episode_ig=float(np.mean([t.episode_ig for t in used])),
                        wall_ms=(time.perf_counter() - started) * 1000.0 if self.record_wall_time else None,
                        skipped=skipped,
                    )
                    history.append(record)
                    epoch_records.append(record)
                    if on_step:
                        on_step(record)

                logger.info(
                    "Epoch finished",
                    epoch=epoch,
                    mean_reward=f"{np.mean([r.mean_reward for r in epoch_records]):.4f}",
                    loss=f"{np.mean([r.loss for r in epoch_records]):.4f}",
                    mean_episode_ig=f"{np.mean([r.mean_episode_ig for r in epoch_records]):.4f}",
                )
                done = epoch + 1
                if on_checkpoint and (done % self.config.checkpoint_every == 0 or done == self.config.epochs):
                    on_checkpoint(params, state, done)
        except IgftError:
            # Flush the last completed epoch before giving up.
            if on_checkpoint and epoch > start_epoch:
                on_checkpoint(checkpointed[0], checkpointed[1], epoch)
            raise

        next_epoch = max(self.config.epochs, start_epoch)
        return TrainingResult(params=params, adam_state=state, next_epoch=next_epoch, history=history)
