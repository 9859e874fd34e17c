"""Asymptotic and simulated PCA performance for data with heteroscedastic noise."""
from hetpca.asymptotics import (
    ComponentPrediction,
    OverallPrediction,
    RecoveryBounds,
    check_spectrum_identities,
    homoscedastic_bounds,
    predict_component,
    predict_homoscedastic,
    predict_overall,
)
from hetpca.datagen import Dataset, DatasetSpec, derive_seed, generate
from hetpca.errors import DomainError, HypothesisViolation, InvariantError
from hetpca.harness import SweepConfig, TrialSummary, run_sweep
from hetpca.pca_metrics import EmpiricalMetrics, PcaResult, evaluate, pca
from hetpca.spectrum import NoiseProfile, SpectrumParams, solve_alpha, solve_beta

__version__ = "0.1.0"

__all__ = [
    "ComponentPrediction",
    "Dataset",
    "DatasetSpec",
    "DomainError",
    "EmpiricalMetrics",
    "HypothesisViolation",
    "InvariantError",
    "NoiseProfile",
    "OverallPrediction",
    "PcaResult",
    "RecoveryBounds",
    "SpectrumParams",
    "SweepConfig",
    "TrialSummary",
    "check_spectrum_identities",
    "derive_seed",
    "evaluate",
    "generate",
    "homoscedastic_bounds",
    "pca",
    "predict_component",
    "predict_homoscedastic",
    "predict_overall",
    "run_sweep",
    "solve_alpha",
    "solve_beta",
]
