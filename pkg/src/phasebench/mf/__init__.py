from .hypergraph import (
    CriticalBudget, HypergraphResult, PooledSystem, SeparableRecords, assemble_pooled_system,
    critical_budget, run_hypergraph, sample_separable, separable_distribution,
    solve_with_frequency_sorting, task_accuracy,
)
from .ml import (
    LogisticModel, ShellFeatures, TrainConfig, TrainResult, baseline_classifier, extract_features,
    make_dataset, train,
)
from .spectral import (
    MfPrediction, eigenshadow_decode, master_sum, master_sum_brute, predicted_single_accuracy,
    scaling_law, single_element_decode, single_element_snr, sum_decode,
)

__all__ = [
    "CriticalBudget", "HypergraphResult", "PooledSystem", "SeparableRecords", "assemble_pooled_system",
    "critical_budget", "run_hypergraph", "sample_separable", "separable_distribution",
    "solve_with_frequency_sorting", "task_accuracy",
    "LogisticModel", "ShellFeatures", "TrainConfig", "TrainResult", "baseline_classifier",
    "extract_features", "make_dataset", "train",
    "MfPrediction", "eigenshadow_decode", "master_sum", "master_sum_brute", "predicted_single_accuracy",
    "scaling_law", "single_element_decode", "single_element_snr", "sum_decode",
]
