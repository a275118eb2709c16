"""Consolidated reports over one or more run directories."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from ..core import ConfigurationError
from ..simulation import Ensemble, SchemeKind
from .manifest import RunManifest
from .persistence import read_verdicts, write_frame
from .runner import EnsembleRun, load_run

logger = logging.getLogger(__name__)

REPORT_FILE = "report.md"
VERDICTS_FILE = "report_verdicts.csv"
LONG_FILE = "report_long.csv"
# Series frames written by the verify step that the long-format table picks up.
SERIES_FILES = {
    "martingale_series": ("time", ["mean_z", "predicted_qv", "realized_qv"], "observable"),
    "moments": ("time", ["running_sup"], "q"),
    "holder": ("lag", ["moment"], "mode"),
}
# Sections allowed to differ between runs that are compared side by side.
COMPARABLE_SECTIONS = {"scheme", "ensemble", "output", "verify", "moments", "sweep"}


@dataclass
class RunSummary:
    label: str
    directory: Path
    manifest: RunManifest
    verdicts: Optional[pd.DataFrame]
    marginal: dict[str, float] = field(default_factory=dict)

    @property
    def failed(self) -> list[str]:
        if self.verdicts is None:
            return []
        return self.verdicts.loc[self.verdicts["verdict"] == "FAILED", "test_id"].tolist()


@dataclass
class ReportResult:
    runs: list[RunSummary]
    conflicts: list[str]
    markdown: str
    files: list[str]

    @property
    def passed(self) -> bool:
        return not any(run.failed for run in self.runs)


def marginal_summary(run: EnsembleRun, t: float, x: float = 0.0) -> dict[str, float]:
    """Mean, SE and variance of u(t, x), or of M_t for particle runs."""
    if run.config.scheme.kind is SchemeKind.PARTICLE:
        samples = []
        for snapshots in run.particle_runs():
            times = np.array([ps.time for ps in snapshots])
            samples.append(snapshots[int(np.argmin(np.abs(times - t)))].total_mass)
        values = np.array(samples)
        quantity = "M_t"
    else:
        ensemble = Ensemble(run.trajectories())
        values = ensemble.values[:, ensemble.dump_index(t), ensemble.grid.nearest_index(x)]
        quantity = f"u(t,{x:g})"
    n = values.size
    return {
        "quantity": quantity,
        "time": t,
        "replicas": n,
        "mean": float(values.mean()),
        "se": float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
        "variance": float(values.var(ddof=1)) if n > 1 else 0.0,
    }


def config_conflicts(manifests: list[RunManifest]) -> list[str]:
    """Sections that differ between runs outside the ones a comparison varies on purpose."""
    conflicts = []
    head = manifests[0].config
    for other in manifests[1:]:
        for section, value in other.config.items():
            if section in COMPARABLE_SECTIONS or head.get(section) == value:
                continue
            conflicts.append(f"{section}: {manifests[0].config_hash[:8]} vs {other.config_hash[:8]}")
    return sorted(set(conflicts))


def _long_rows(label: str, directory: Path, verdicts: Optional[pd.DataFrame]) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    if verdicts is not None:
        rows.extend(
            {"run": label, "table": "verdicts", "series": r.test_id, "x": r.time, "quantity": "statistic", "value": r.statistic}
            for r in verdicts.itertuples()
        )
    for name, (x_col, value_cols, group_col) in SERIES_FILES.items():
        path = directory / f"{name}.csv"
        if not path.is_file():
            continue
        frame = pd.read_csv(path)
        for column in value_cols:
            rows.extend(
                {"run": label, "table": name, "series": str(g), "x": xv, "quantity": column, "value": v}
                for g, xv, v in zip(frame[group_col], frame[x_col], frame[column])
            )
    return rows


def _markdown(runs: list[RunSummary], conflicts: list[str]) -> str:
    lines = ["# Verification report", ""]
    if conflicts:
        lines += ["## Config conflicts", "", *(f"- **{c}**" for c in conflicts), ""]
    lines += ["## Runs", "", "| run | scheme | replicas | status | config hash | verdicts |", "|---|---|---|---|---|---|"]
    for run in runs:
        m = run.manifest
        summary = "not verified" if run.verdicts is None else ("**FAILED**" if run.failed else f"{len(run.verdicts)} pass")
        lines.append(f"| {run.label} | {m.scheme} | {len(m.completed())} | {m.status} | `{m.config_hash[:12]}` | {summary} |")
    lines += ["", "## Marginal comparison", ""]
    lines += ["| statistic | " + " | ".join(run.label for run in runs) + " |", "|---" * (len(runs) + 1) + "|"]
    for key in ("quantity", "time", "replicas", "mean", "se", "variance"):
        cells = [run.marginal.get(key, "") for run in runs]
        lines.append(f"| {key} | " + " | ".join(f"{c:.6g}" if isinstance(c, float) else str(c) for c in cells) + " |")
    for run in runs:
        lines += ["", f"## {run.label}", ""]
        if run.verdicts is None:
            lines.append("No verdicts recorded; run `verify` on this manifest.")
            continue
        if run.failed:
            lines += [f"**FAILED: {', '.join(run.failed)}**", ""]
        lines += ["| test | time | statistic | SE | threshold | verdict |", "|---|---|---|---|---|---|"]
        for r in run.verdicts.itertuples():
            verdict = "**FAILED**" if r.verdict == "FAILED" else r.verdict
            lines.append(f"| {r.test_id} | {r.time:.4g} | {r.statistic:.6g} | {r.standard_error:.3g} | {r.threshold:.3g} | {verdict} |")
    return "\n".join(lines) + "\n"


def build_report(paths: list[Path], out: Path, *, marginal_x: float = 0.0) -> ReportResult:
    """Merge run directories (or their manifests) into report.md and two CSVs under ``out``."""
    if not paths:
        raise ConfigurationError("report needs at least one manifest")
    runs: list[RunSummary] = []
    long_rows: list[dict[str, Any]] = []
    all_verdicts = []
    for path in paths:
        directory = Path(path).parent if Path(path).is_file() else Path(path)
        manifest, config, run = load_run(directory)
        label = f"{manifest.scheme}@{manifest.config_hash[:8]}"
        verdicts = read_verdicts(directory)
        summary = RunSummary(label=label, directory=directory, manifest=manifest, verdicts=verdicts)
        summary.marginal = marginal_summary(run, config.time.horizon, marginal_x)
        runs.append(summary)
        long_rows.extend(_long_rows(label, directory, verdicts))
        if verdicts is not None:
            all_verdicts.append(verdicts.assign(run=label))
    conflicts = config_conflicts([run.manifest for run in runs])
    for conflict in conflicts:
        logger.warning("config conflict between compared runs: %s", conflict)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    markdown = _markdown(runs, conflicts)
    (out / REPORT_FILE).write_text(markdown)
    verdict_table = pd.concat(all_verdicts, ignore_index=True) if all_verdicts else pd.DataFrame(columns=["run", "test_id"])
    write_frame(verdict_table, out / VERDICTS_FILE)
    write_frame(pd.DataFrame(long_rows, columns=["run", "table", "series", "x", "quantity", "value"]), out / LONG_FILE)
    return ReportResult(runs=runs, conflicts=conflicts, markdown=markdown, files=[REPORT_FILE, VERDICTS_FILE, LONG_FILE])
