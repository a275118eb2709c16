"""Run manifest: what was run, with which seeds, and what it produced."""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

from ..core import MissingArtifactError
from ..verification import TestVerdict

ARTIFACT_VERSION = "0.1.0"
MANIFEST_NAME = "manifest.json"


class ReplicaRecord(BaseModel):
    replica: int = Field(..., ge=0, description="Replica index (noise stream)")
    seed: int = Field(..., description="Base seed")
    status: Literal["completed", "stopped", "failed"] = "completed"
    stop_step: Optional[int] = None
    files: list[str] = Field(default_factory=list, description="Files relative to the run directory")
    checksum: Optional[str] = Field(None, description="SHA-256 of the replica's field file")
    error: Optional[str] = None


class VerdictSummary(BaseModel):
    passed: int = 0
    failed: int = 0
    failed_ids: list[str] = Field(default_factory=list)

    @classmethod
    def of(cls, verdicts: list[TestVerdict]) -> "VerdictSummary":
        failed = [v.test_id for v in verdicts if not v.passed]
        return cls(passed=len(verdicts) - len(failed), failed=len(failed), failed_ids=failed)

    @property
    def all_passed(self) -> bool:
        return self.failed == 0


class RunManifest(BaseModel):
    """Everything needed to rerun and audit an ensemble."""

    config_hash: str
    artifact_version: str = ARTIFACT_VERSION
    config: dict[str, Any]
    scheme: str
    replicas: list[ReplicaRecord] = Field(default_factory=list)
    files: list[str] = Field(default_factory=list)
    created_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    wall_clock_s: float = 0.0
    status: Literal["complete", "partial"] = "complete"
    verdicts: Optional[VerdictSummary] = None

    @property
    def seeds(self) -> list[tuple[int, int]]:
        return [(r.seed, r.replica) for r in self.replicas]

    def completed(self) -> list[ReplicaRecord]:
        return [r for r in self.replicas if r.status != "failed"]

    def save(self, directory: Path) -> Path:
        path = Path(directory) / MANIFEST_NAME
        path.write_text(self.model_dump_json(indent=2))
        return path

    @classmethod
    def load(cls, path: Path | str) -> "RunManifest":
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_NAME
        if not path.is_file():
            raise MissingArtifactError(f"manifest not found: {path}")
        return cls.model_validate_json(path.read_text())
