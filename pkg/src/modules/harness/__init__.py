"""Run configuration, ensemble orchestration, persistence, suites, sweeps and reports."""

from .config import LEMMA_SUITES, RunConfig, SuiteName
from .settings import LabSettings
from .manifest import ARTIFACT_VERSION, ReplicaRecord, RunManifest, VerdictSummary
from .runner import EnsembleRun, load_run, run_ensemble, run_replica, write_run
from .suites import SuiteOutcome, run_lemma_suites, run_suites
from .sweep import SweepResult, run_sweep
from .report import ReportResult, build_report

__all__ = [
    "LEMMA_SUITES",
    "RunConfig",
    "SuiteName",
    "LabSettings",
    "ARTIFACT_VERSION",
    "ReplicaRecord",
    "RunManifest",
    "VerdictSummary",
    "EnsembleRun",
    "load_run",
    "run_ensemble",
    "run_replica",
    "write_run",
    "SuiteOutcome",
    "run_lemma_suites",
    "run_suites",
    "SweepResult",
    "run_sweep",
    "ReportResult",
    "build_report",
]
