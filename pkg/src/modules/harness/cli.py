"""Command-line entry point: simulate, verify, sweep and report."""

from __future__ import annotations

import argparse
import logging
import sys
import tomllib
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from ..core import ConfigurationError, MissingArtifactError, SlabLabError, SuiteMismatchError
from ..ui.logging import setup_logging
from ..ui.terminal_ui_manager import TerminalUIManager
from .config import CONFIG_SUITES, LEMMA_SUITES, RunConfig, SuiteName
from .manifest import VerdictSummary
from .persistence import write_frame, write_outcome
from .report import build_report
from .runner import load_run, run_ensemble, write_run
from .settings import LabSettings
from .suites import run_lemma_suites, run_suites
from .sweep import SWEEP_FILE, run_sweep

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_TEST_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3


def load_config(path: Path | str, seed: Optional[int] = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        config = RunConfig.from_toml(path)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    return config.with_updates("ensemble", seed=seed) if seed is not None else config


def run_directory(config: RunConfig, out: Optional[Path], settings: LabSettings) -> Path:
    if out is not None:
        return Path(out)
    if config.output.directory is not None:
        return config.output.directory
    return settings.output_root / config.config_hash()[:12]


def cmd_simulate(args: argparse.Namespace, ui: TerminalUIManager, settings: LabSettings) -> int:
    config = load_config(args.config, args.seed)
    directory = run_directory(config, args.out, settings)
    jobs = args.jobs or settings.jobs
    ui.print_header("Simulate")
    ui.print_run_info(
        "Run",
        {
            "coefficients": config.coefficient_set().label,
            "scheme": config.scheme.tag(),
            "replicas": config.ensemble.replicas,
            "seed": config.ensemble.seed,
            "horizon": config.time.horizon,
            "config hash": config.config_hash()[:12],
            "output": directory,
        },
    )
    with ui.replica_progress(config.ensemble.replicas) as advance:
        run = run_ensemble(config, jobs=jobs, on_replica=advance)
    manifest = write_run(run, directory)
    if not run.complete:
        ui.print_error(f"{len(run.failures)} replica(s) failed; partial manifest written to {directory}")
        return EXIT_RUNTIME_ERROR
    stopped = sum(record.status == "stopped" for record in manifest.replicas)
    if stopped:
        ui.print_info(f"{stopped} replica(s) stopped at the overflow guard; verification leaves them out")
    ui.print_final_output(f"{len(manifest.replicas)} replica(s) written to {directory}")
    return EXIT_PASS


def _selected_suites(args: argparse.Namespace, config: Optional[RunConfig]) -> list[SuiteName]:
    if args.suite:
        return [SuiteName(s) for s in args.suite]
    if config is None:
        return list(LEMMA_SUITES)
    return list(config.verify.suites)


def cmd_verify(args: argparse.Namespace, ui: TerminalUIManager, settings: LabSettings) -> int:
    ui.print_header("Verify")
    jobs = args.jobs or settings.jobs
    if args.manifest is None:
        config = load_config(args.config) if args.config else None
        suites = _selected_suites(args, config)
        needs_run = [s.value for s in suites if s not in LEMMA_SUITES and s not in CONFIG_SUITES]
        if needs_run:
            raise SuiteMismatchError(f"suite(s) {', '.join(needs_run)} need --manifest")
        if config is None:
            if any(s in CONFIG_SUITES for s in suites):
                raise ConfigurationError("cross_check needs --config")
            outcome = run_lemma_suites(None, suites, jobs=jobs)
        else:
            outcome = run_suites(config, None, suites, jobs=jobs)
        directory = Path(args.out) if args.out else settings.output_root / "lemmas"
        write_outcome(outcome.verdicts, outcome.frames, directory)
    else:
        manifest, config, run = load_run(args.manifest)
        suites = _selected_suites(args, config)
        ui.print_run_info("Manifest", {"scheme": manifest.scheme, "replicas": len(manifest.completed()), "suites": ", ".join(s.value for s in suites)})
        outcome = run_suites(config, run, suites, jobs=jobs)
        directory = Path(args.out) if args.out else Path(args.manifest)
        if directory.is_file():
            directory = directory.parent
        write_outcome(outcome.verdicts, outcome.frames, directory)
        if not args.out:
            manifest.verdicts = VerdictSummary.of(outcome.verdicts)
            manifest.save(directory)
    ui.print_verdicts(outcome.verdicts)
    summary = VerdictSummary.of(outcome.verdicts)
    if not summary.all_passed:
        ui.print_final_output(f"FAILED: {', '.join(summary.failed_ids)}", passed=False)
        return EXIT_TEST_FAILURE
    ui.print_final_output(f"{summary.passed} verdict(s) passed; results in {directory}")
    return EXIT_PASS


def cmd_sweep(args: argparse.Namespace, ui: TerminalUIManager, settings: LabSettings) -> int:
    config = load_config(args.config, args.seed)
    if not config.sweep.values:
        raise ConfigurationError("sweep.values is empty")
    directory = Path(args.out) if args.out else settings.output_root / f"sweep-{config.config_hash()[:12]}"
    ui.print_header("Sweep")
    ui.print_run_info("Sweep", {"variable": config.sweep.variable, "values": config.sweep.values, "output": directory})
    with ui.replica_progress(len(config.sweep.values), "Sweeping") as advance:
        result = run_sweep(config, directory, jobs=args.jobs or settings.jobs, on_value=advance)
    write_frame(result.frame, directory / SWEEP_FILE)
    ui.print_frame(result.frame, f"Sweep over {result.variable}")
    if result.moments is not None:
        write_frame(result.moments, directory / "sweep_moments.csv")
        ui.print_run_info("Moment sweep", result.moment_summary)
    if result.verdicts:
        ui.print_verdicts(result.verdicts, title="Sweep diagnostics")
    if not result.passed:
        ui.print_final_output("sweep diagnostics FAILED", passed=False)
        return EXIT_TEST_FAILURE
    ui.print_final_output(f"sweep written to {directory}")
    return EXIT_PASS


def cmd_report(args: argparse.Namespace, ui: TerminalUIManager, settings: LabSettings) -> int:
    out = Path(args.out) if args.out else settings.output_root / "report"
    ui.print_header("Report")
    result = build_report([Path(p) for p in args.manifest], out)
    for conflict in result.conflicts:
        ui.print_warning(f"config conflict: {conflict}")
    for run in result.runs:
        if run.failed:
            ui.print_error(f"{run.label} FAILED: {', '.join(run.failed)}")
    ui.print_final_output(f"report written to {out / result.files[0]}", passed=result.passed)
    return EXIT_PASS if result.passed else EXIT_TEST_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slab-lab", description="Slab-frozen SPDE simulation and verification lab")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run an ensemble and write trajectories and a manifest")
    simulate.add_argument("--config", required=True, help="TOML run configuration")
    simulate.add_argument("--out", type=Path, help="run directory")
    simulate.add_argument("--seed", type=int, help="override the base seed")
    simulate.add_argument("--jobs", type=int, help="worker processes")
    simulate.set_defaults(handler=cmd_simulate)

    verify = sub.add_parser("verify", help="run verification suites on a manifest, or the lemma and cross-check suites alone")
    verify.add_argument("--manifest", type=Path, help="run directory or manifest.json")
    verify.add_argument("--config", help="config for lemma and cross_check runs")
    verify.add_argument("--suite", action="append", choices=[s.value for s in SuiteName], help="suite to run (repeatable)")
    verify.add_argument("--out", type=Path, help="directory for verdicts and series")
    verify.add_argument("--jobs", type=int, help="worker processes")
    verify.set_defaults(handler=cmd_verify)

    sweep = sub.add_parser("sweep", help="run one ensemble per sweep value and tabulate convergence")
    sweep.add_argument("--config", required=True, help="TOML run configuration with a [sweep] section")
    sweep.add_argument("--out", type=Path, help="sweep directory")
    sweep.add_argument("--seed", type=int, help="override the base seed")
    sweep.add_argument("--jobs", type=int, help="worker processes")
    sweep.set_defaults(handler=cmd_sweep)

    report = sub.add_parser("report", help="merge manifests into a report")
    report.add_argument("--manifest", type=Path, nargs="+", required=True, help="run directories or manifest files")
    report.add_argument("--out", type=Path, help="report directory")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = LabSettings.from_env()
    setup_logging(settings.log_level)
    ui = TerminalUIManager()
    try:
        return args.handler(args, ui, settings)
    except ValidationError as exc:
        for error in exc.errors():
            location = ".".join(str(part) for part in error["loc"]) or "config"
            ui.print_error(f"{location}: {error['msg']}")
        return EXIT_CONFIG_ERROR
    except (ConfigurationError, SuiteMismatchError, MissingArtifactError) as exc:
        ui.print_error(str(exc))
        return EXIT_CONFIG_ERROR
    except SlabLabError as exc:
        logger.exception("run failed")
        ui.print_error(str(exc))
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
