"""
Use cases for the IGFT desk trainer: case generation, training,
evaluation, single-episode simulation and metrics reporting.
"""
from src.application.use_cases.evaluate_policy import EvaluatePolicyUseCase
from src.application.use_cases.generate_cases import GenerateCasesUseCase
from src.application.use_cases.report_metrics import ReportMetricsUseCase
from src.application.use_cases.simulate_episode import SimulateEpisodeUseCase
from src.application.use_cases.train_policy import TrainPolicyUseCase

__all__ = [
    "EvaluatePolicyUseCase",
    "GenerateCasesUseCase",
    "ReportMetricsUseCase",
    "SimulateEpisodeUseCase",
    "TrainPolicyUseCase",
]
