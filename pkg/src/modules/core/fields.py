"""Sampled scalar fields and the exponentially weighted sup norm."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from .errors import InvalidFieldError
from .grid import GridSpec


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A real function sampled on the points of a ``GridSpec``."""

    grid: GridSpec
    values: np.ndarray
    nonnegative: bool = False
    label: str = field(default="", compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise InvalidFieldError(
                f"expected {self.grid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidFieldError("field has non-finite entries")
        if self.nonnegative and np.any(values < 0.0):
            raise InvalidFieldError("field flagged nonnegative has negative entries")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[[np.ndarray], np.ndarray], **kwargs) -> "ScalarField":
        return cls(grid=grid, values=fn(grid.x), **kwargs)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid=grid, values=np.zeros(grid.n_points), nonnegative=True)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def with_values(self, values: np.ndarray, nonnegative: bool | None = None) -> "ScalarField":
        return ScalarField(
            grid=self.grid,
            values=values,
            nonnegative=self.nonnegative if nonnegative is None else nonnegative,
            label=self.label,
        )

    def integral(self) -> float:
        return integrate(self.values, self.grid)

    def pair(self, other: "ScalarField | np.ndarray") -> float:
        """Return <self, other> by the trapezoid rule."""
        other_values = other.values if isinstance(other, ScalarField) else np.asarray(other)
        return integrate(self.values * other_values, self.grid)

    def to_csv(self, path: Path | str) -> None:
        pd.DataFrame({"x": self.grid.x, "value": self.values}).to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def read_csv(cls, path: Path | str, grid: GridSpec, nonnegative: bool = False) -> "ScalarField":
        frame = pd.read_csv(path)
        if list(frame.columns) != ["x", "value"]:
            raise InvalidFieldError(f"{path}: expected header x,value, got {list(frame.columns)}")
        if not np.allclose(frame["x"].to_numpy(), grid.x, rtol=0.0, atol=1e-9 * grid.dx):
            raise InvalidFieldError(f"{path}: sample points do not match the grid")
        return cls(grid=grid, values=frame["value"].to_numpy(), nonnegative=nonnegative)


def integrate(values: np.ndarray, grid: GridSpec, axis: int = -1) -> np.ndarray | float:
    """Trapezoid rule over the spatial axis."""
    return trapezoid(values, dx=grid.dx, axis=axis)


def rap_norm(f: ScalarField | np.ndarray, p: float, grid: GridSpec | None = None) -> float:
    """Return |f|_p = max_j e^{p|x_j|} |f(x_j)|."""
    if isinstance(f, ScalarField):
        values, grid = f.values, f.grid
    else:
        values = np.asarray(f, dtype=float)
        if grid is None:
            raise InvalidFieldError("a grid is required for raw sample arrays")
    if not np.all(np.isfinite(values)):
        raise InvalidFieldError("rap_norm of a field with non-finite entries")
    return float(np.max(np.exp(p * np.abs(grid.x)) * np.abs(values), initial=0.0))


def gaussian_density(grid: GridSpec, variance: float, center: float = 0.0, mass: float = 1.0) -> ScalarField:
    """Sample ``mass`` times the centred normal density of the given variance."""
    x = grid.x
    values = mass * np.exp(-((x - center) ** 2) / (2.0 * variance)) / np.sqrt(2.0 * np.pi * variance)
    values[0] = values[-1] = 0.0
    return ScalarField(grid=grid, values=values, nonnegative=True, label="gaussian")
