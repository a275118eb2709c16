"""Process-level defaults read from the environment."""
from dotenv import load_dotenv
from dataclasses import dataclass
from pathlib import Path
import os

load_dotenv()


@dataclass(frozen=True)
class LabSettings:
    output_root: Path = Path("runs")
    jobs: int = 1
    log_level: str = "INFO"

    @staticmethod
    def from_env() -> "LabSettings":
        return LabSettings(
            output_root=Path(os.getenv("SLAB_LAB_OUTPUT_ROOT", "runs") or "runs"),
            jobs=max(1, int(os.getenv("SLAB_LAB_JOBS", "1"))),
            log_level=os.getenv("SLAB_LAB_LOG_LEVEL", "INFO").upper(),
        )
