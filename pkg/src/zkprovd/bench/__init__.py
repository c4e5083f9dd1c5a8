from .experiment import ExperimentConfig, MeasurementRecord, ResourceCaps, run_experiment
from .report import emit_report, read_csv, write_csv
from .workload import WorkloadSpec, generate_workload

__all__ = ["ExperimentConfig", "MeasurementRecord", "ResourceCaps", "run_experiment", "emit_report",
           "read_csv", "write_csv", "WorkloadSpec", "generate_workload"]
