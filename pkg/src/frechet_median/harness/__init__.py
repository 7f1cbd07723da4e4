from .dataset import Dataset, dataset_from_dict, load_dataset
from .experiments import (
    consistency_experiment,
    genericity_experiment,
    hmin_csv,
    hmin_verification_run,
    position_bound_experiment,
    trial_rng,
)
from .report import SCHEMA_VERSION, ExperimentReport, recompute_verdict
from .verify import geometry_kernel_suite, verify_suite

__all__ = [
    "Dataset",
    "ExperimentReport",
    "SCHEMA_VERSION",
    "consistency_experiment",
    "dataset_from_dict",
    "genericity_experiment",
    "geometry_kernel_suite",
    "hmin_csv",
    "hmin_verification_run",
    "load_dataset",
    "position_bound_experiment",
    "recompute_verdict",
    "trial_rng",
    "verify_suite",
]
