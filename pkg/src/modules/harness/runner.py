"""Replica execution and the worker pool that runs ensembles."""

from __future__ import annotations

import logging
import time as clock
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

from ..coefficients import gamma_of
from ..core import ReplicaError, ScalarField
from ..simulation import ParticleSystem, SchemeKind, TrajectoryField, simulate_direct, simulate_particles, simulate_slab
from .config import RunConfig
from .manifest import ReplicaRecord, RunManifest
from .persistence import file_checksum, read_particles, read_trajectory, write_particles, write_trajectory

logger = logging.getLogger(__name__)

ReplicaResult = Union[TrajectoryField, list[ParticleSystem]]


def frozen_fields(config: RunConfig) -> tuple[ScalarField, ScalarField]:
    """b(u0) and gamma(u0): the first slab's frozen fields used by particle runs."""
    u0 = config.initial_field()
    c = config.coefficient_set()
    b = u0.with_values(c.drift_factor(u0.values).copy(), nonnegative=False)
    gamma = u0.with_values(gamma_of(c, u0.values), nonnegative=True)
    return b, gamma


def run_replica(config: RunConfig, replica: int, *, record_ledger: bool = False) -> ReplicaResult:
    """Simulate one replica; coefficients are rebuilt inside the worker."""
    u0 = config.initial_field()
    time, per_dump = config.time_grid()
    seed = config.ensemble.seed
    kind = config.scheme.kind
    if kind is SchemeKind.DIRECT:
        return simulate_direct(
            u0, config.coefficient_set(), time, seed, stream=replica, dump_every=per_dump, record_ledger=record_ledger
        )
    if kind is SchemeKind.SLAB:
        return simulate_slab(
            u0,
            config.coefficient_set(),
            config.scheme.n,
            time,
            seed,
            stream=replica,
            dump_every=per_dump,
            record_ledger=record_ledger,
        )
    b, gamma = frozen_fields(config)
    return simulate_particles(u0, b, gamma, config.scheme.particles, time, seed, stream=replica, dump_every=per_dump)


def _guarded(config: RunConfig, replica: int) -> tuple[Optional[ReplicaResult], Optional[str]]:
    """Failures come back as text so that nothing unpicklable crosses the pool."""
    try:
        return run_replica(config, replica), None
    except Exception as exc:  # noqa: BLE001
        return None, f"{type(exc).__name__}: {exc}"


@dataclass
class EnsembleRun:
    """Replica results in replica order, plus the failures."""

    config: RunConfig
    results: dict[int, ReplicaResult] = field(default_factory=dict)
    failures: dict[int, str] = field(default_factory=dict)
    wall_clock_s: float = 0.0

    @property
    def complete(self) -> bool:
        return not self.failures

    def trajectories(self) -> list[TrajectoryField]:
        return [self.results[i] for i in sorted(self.results) if isinstance(self.results[i], TrajectoryField)]

    def particle_runs(self) -> list[list[ParticleSystem]]:
        return [self.results[i] for i in sorted(self.results) if isinstance(self.results[i], list)]


def run_ensemble(
    config: RunConfig,
    *,
    jobs: int = 1,
    on_replica: Optional[Callable[[int], None]] = None,
) -> EnsembleRun:
    """Run every replica; workers share nothing and only the caller writes files."""
    started = clock.perf_counter()
    run = EnsembleRun(config=config)
    replicas = range(config.ensemble.replicas)

    def record(replica: int, result: Optional[ReplicaResult], error: Optional[str]) -> None:
        if error is None:
            run.results[replica] = result
        else:
            failure = ReplicaError(replica, RuntimeError(error))
            run.failures[replica] = str(failure)
            logger.error("%s", failure)
        if on_replica is not None:
            on_replica(replica)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_guarded, config, i): i for i in replicas}
            for future in as_completed(futures):
                record(futures[future], *future.result())
    else:
        for i in replicas:
            record(i, *_guarded(config, i))
    run.wall_clock_s = clock.perf_counter() - started
    logger.info(
        "ran %d replica(s) of %s in %.2fs (%d failed)",
        len(run.results),
        config.scheme.tag(),
        run.wall_clock_s,
        len(run.failures),
    )
    return run


def replica_stem(replica: int) -> str:
    return f"replica_{replica:05d}"


def write_run(run: EnsembleRun, directory: Path) -> RunManifest:
    """Write every replica's files and the manifest into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    config = run.config
    records: list[ReplicaRecord] = []
    files: list[str] = []
    for replica in range(config.ensemble.replicas):
        stem = replica_stem(replica)
        if replica in run.failures:
            records.append(ReplicaRecord(replica=replica, seed=config.ensemble.seed, status="failed", error=run.failures[replica]))
            continue
        result = run.results[replica]
        if isinstance(result, TrajectoryField):
            written = write_trajectory(result, directory, stem)
            status, stop_step = result.status.value, result.stop_step
        else:
            written = write_particles(result, directory, stem, seed=config.ensemble.seed, stream=replica)
            status, stop_step = "completed", None
        records.append(
            ReplicaRecord(
                replica=replica,
                seed=config.ensemble.seed,
                status=status,
                stop_step=stop_step,
                files=written,
                checksum=file_checksum(directory / written[0]),
            )
        )
        files.extend(written)
    manifest = RunManifest(
        config_hash=config.config_hash(),
        config=config.model_dump(mode="json"),
        scheme=str(config.scheme.tag()),
        replicas=records,
        files=files,
        wall_clock_s=run.wall_clock_s,
        status="complete" if run.complete else "partial",
    )
    manifest.save(directory)
    return manifest


def load_run(directory: Path | str) -> tuple[RunManifest, RunConfig, EnsembleRun]:
    """Read a run directory back into the manifest, its config and the replica results."""
    directory = Path(directory)
    if directory.is_file():
        directory = directory.parent
    manifest = RunManifest.load(directory)
    config = RunConfig.model_validate(manifest.config)
    run = EnsembleRun(config=config, wall_clock_s=manifest.wall_clock_s)
    for record in manifest.replicas:
        if record.status == "failed":
            run.failures[record.replica] = record.error or "failed"
        elif config.scheme.kind is SchemeKind.PARTICLE:
            run.results[record.replica] = read_particles(directory, replica_stem(record.replica))
        else:
            run.results[record.replica] = read_trajectory(directory, replica_stem(record.replica))
    logger.info("loaded %d replica(s) from %s", len(run.results), directory)
    return manifest, config, run
