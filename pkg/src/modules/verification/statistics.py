"""Mergeable moment accumulators and verdict records."""

from __future__ import annotations

import math
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field

# z-tests pass when |statistic - target| <= Z_THRESHOLD * SE + floor.
Z_THRESHOLD = 3.0
DEFAULT_FLOOR = 1e-3


class RunningMoments(BaseModel):
    """Count, sum and sum of squares; merges associatively across workers."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def push(self, values) -> "RunningMoments":
        values = np.atleast_1d(np.asarray(values, dtype=float))
        return RunningMoments(
            count=self.count + values.size,
            total=self.total + float(values.sum()),
            total_sq=self.total_sq + float(np.square(values).sum()),
        )

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        return RunningMoments(count=self.count + other.count, total=self.total + other.total, total_sq=self.total_sq + other.total_sq)

    __add__ = merge

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else 0.0

    @property
    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return max(self.total_sq - self.count * self.mean**2, 0.0) / (self.count - 1)

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count else 0.0


class TestVerdict(BaseModel):
    """One pass/fail decision with the numbers behind it."""

    __test__ = False

    test_id: str = Field(..., description="Suite and test name")
    statistic: float = Field(..., description="Tested statistic")
    standard_error: float = Field(0.0, description="Standard error of the statistic")
    threshold: float = Field(..., description="Largest admissible deviation")
    passed: bool = Field(..., description="Verdict")
    time: Optional[float] = Field(None, description="Evaluation time, when relevant")
    details: dict[str, Any] = Field(default_factory=dict, description="Secondary figures")

    @property
    def label(self) -> str:
        return "pass" if self.passed else "FAILED"


def z_verdict(
    test_id: str,
    samples: np.ndarray,
    target: float = 0.0,
    *,
    floor: float = DEFAULT_FLOOR,
    time: Optional[float] = None,
    **details: Any,
) -> TestVerdict:
    """Pass iff |mean - target| <= 3 SE + floor."""
    moments = RunningMoments().push(samples)
    threshold = Z_THRESHOLD * moments.std_error + floor
    deviation = moments.mean - target
    return TestVerdict(
        test_id=test_id,
        statistic=moments.mean,
        standard_error=moments.std_error,
        threshold=threshold,
        passed=bool(abs(deviation) <= threshold),
        time=time,
        details={"target": target, "replicas": moments.count, **details},
    )


def combine(test_id: str, verdicts: list[TestVerdict]) -> TestVerdict:
    """Fold several verdicts into one that passes only if all do."""
    worst = max(verdicts, key=lambda v: abs(v.statistic) / v.threshold if v.threshold else math.inf)
    return TestVerdict(
        test_id=test_id,
        statistic=worst.statistic,
        standard_error=worst.standard_error,
        threshold=worst.threshold,
        passed=all(v.passed for v in verdicts),
        time=worst.time,
        details={"parts": [v.test_id for v in verdicts], "failed": [v.test_id for v in verdicts if not v.passed]},
    )
