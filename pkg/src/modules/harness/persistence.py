"""CSV and JSON persistence for trajectories, particle runs and result tables."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from ..core import GridSpec, MissingArtifactError, TimeGrid
from ..simulation import ParticleSystem, RunStatus, SchemeTag, TrajectoryField
from ..verification import TestVerdict

FLOAT_FORMAT = "%.17g"


class TrajectoryMeta(BaseModel):
    """Metadata document stored next to each replica's field file."""

    grid: GridSpec
    time: TimeGrid
    dump_steps: list[int]
    scheme: SchemeTag
    coefficients: str
    seed: int
    stream: int
    status: RunStatus
    stop_step: Optional[int] = None
    clamped_mass: float = 0.0
    values_file: str
    clamp_file: str
    slab_file: Optional[str] = None
    slab_steps: list[int] = Field(default_factory=list)


class ParticleMeta(BaseModel):
    scale: int
    seed: int
    stream: int
    times: list[float]
    snapshot_file: str
    mass_file: str


def file_checksum(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def _profiles_frame(steps: np.ndarray, dt: float, values: np.ndarray) -> pd.DataFrame:
    frame = pd.DataFrame(values, columns=[f"u{j}" for j in range(values.shape[1])])
    frame.insert(0, "time", np.asarray(steps) * dt)
    frame.insert(0, "step", np.asarray(steps, dtype=int))
    return frame


def _read_profiles(path: Path) -> np.ndarray:
    if not path.is_file():
        raise MissingArtifactError(f"missing artifact: {path}")
    frame = pd.read_csv(path)
    return frame.drop(columns=["step", "time"]).to_numpy(dtype=float)


def write_trajectory(traj: TrajectoryField, directory: Path, stem: str) -> list[str]:
    """Write field, clamp and slab-profile CSVs plus the metadata JSON; return file names."""
    directory = Path(directory)
    values_file, clamp_file = f"{stem}_u.csv", f"{stem}_clamp.csv"
    write_frame(_profiles_frame(traj.dump_steps, traj.time.dt, traj.values), directory / values_file)
    write_frame(_profiles_frame(traj.dump_steps, traj.time.dt, traj.clamp_history()), directory / clamp_file)
    files = [values_file, clamp_file]
    slab_file = None
    if traj.slab_profiles is not None and traj.slab_steps is not None:
        slab_file = f"{stem}_slab.csv"
        write_frame(_profiles_frame(traj.slab_steps, traj.time.dt, traj.slab_profiles), directory / slab_file)
        files.append(slab_file)
    meta = TrajectoryMeta(
        grid=traj.grid,
        time=traj.time,
        dump_steps=[int(s) for s in traj.dump_steps],
        scheme=traj.scheme,
        coefficients=traj.coefficients,
        seed=traj.seed,
        stream=traj.stream,
        status=traj.status,
        stop_step=traj.stop_step,
        clamped_mass=traj.clamped_mass,
        values_file=values_file,
        clamp_file=clamp_file,
        slab_file=slab_file,
        slab_steps=[] if traj.slab_steps is None else [int(s) for s in traj.slab_steps],
    )
    (directory / f"{stem}.json").write_text(meta.model_dump_json(indent=2))
    return [*files, f"{stem}.json"]


def read_trajectory(directory: Path, stem: str) -> TrajectoryField:
    directory = Path(directory)
    meta_path = directory / f"{stem}.json"
    if not meta_path.is_file():
        raise MissingArtifactError(f"missing artifact: {meta_path}")
    meta = TrajectoryMeta.model_validate_json(meta_path.read_text())
    slab_profiles = _read_profiles(directory / meta.slab_file) if meta.slab_file else None
    return TrajectoryField(
        grid=meta.grid,
        time=meta.time,
        dump_steps=np.array(meta.dump_steps, dtype=int),
        values=_read_profiles(directory / meta.values_file),
        scheme=meta.scheme,
        coefficients=meta.coefficients,
        seed=meta.seed,
        stream=meta.stream,
        status=meta.status,
        stop_step=meta.stop_step,
        clamped_mass=meta.clamped_mass,
        clamp_values=_read_profiles(directory / meta.clamp_file),
        slab_profiles=slab_profiles,
        slab_steps=np.array(meta.slab_steps, dtype=int) if meta.slab_file else None,
    )


def write_particles(snapshots: list[ParticleSystem], directory: Path, stem: str, *, seed: int, stream: int) -> list[str]:
    directory = Path(directory)
    snapshot_file, mass_file = f"{stem}_particles.csv", f"{stem}_mass.csv"
    frames = [ps.to_frame() for ps in snapshots]
    write_frame(pd.concat(frames, ignore_index=True), directory / snapshot_file)
    masses = pd.DataFrame(
        {"time": [ps.time for ps in snapshots], "count": [ps.count for ps in snapshots], "mass": [ps.total_mass for ps in snapshots]}
    )
    write_frame(masses, directory / mass_file)
    meta = ParticleMeta(
        scale=snapshots[0].scale,
        seed=seed,
        stream=stream,
        times=[ps.time for ps in snapshots],
        snapshot_file=snapshot_file,
        mass_file=mass_file,
    )
    (directory / f"{stem}.json").write_text(meta.model_dump_json(indent=2))
    return [snapshot_file, mass_file, f"{stem}.json"]


def read_particles(directory: Path, stem: str) -> list[ParticleSystem]:
    directory = Path(directory)
    meta_path = directory / f"{stem}.json"
    if not meta_path.is_file():
        raise MissingArtifactError(f"missing artifact: {meta_path}")
    meta = ParticleMeta.model_validate_json(meta_path.read_text())
    path = directory / meta.snapshot_file
    if not path.is_file():
        raise MissingArtifactError(f"missing artifact: {path}")
    frame = pd.read_csv(path)
    groups = {t: g["position"].to_numpy(dtype=float) for t, g in frame.groupby("time", sort=False)}
    return [ParticleSystem(positions=groups.get(t, np.empty(0)), scale=meta.scale, time=t) for t in meta.times]


def verdict_frame(verdicts: list[TestVerdict]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "test_id": v.test_id,
                "time": v.time,
                "statistic": v.statistic,
                "standard_error": v.standard_error,
                "threshold": v.threshold,
                "verdict": v.label,
            }
            for v in verdicts
        ],
        columns=["test_id", "time", "statistic", "standard_error", "threshold", "verdict"],
    )


VERDICTS_FILE = "verdicts.csv"


def write_outcome(verdicts: list[TestVerdict], frames: dict[str, pd.DataFrame], directory: Path) -> list[str]:
    """Write the verdict table and every named frame as ``<name>.csv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_frame(verdict_frame(verdicts), directory / VERDICTS_FILE)
    for name, frame in frames.items():
        write_frame(frame, directory / f"{name}.csv")
    return [VERDICTS_FILE, *(f"{name}.csv" for name in frames)]


def read_verdicts(directory: Path) -> Optional[pd.DataFrame]:
    path = Path(directory) / VERDICTS_FILE
    return pd.read_csv(path) if path.is_file() else None
