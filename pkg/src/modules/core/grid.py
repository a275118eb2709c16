"""Spatial and temporal grids for the truncated domain [-L, L]."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import ConfigurationError, DomainError

# Relative slack on the explicit-scheme stability bound so that dt = dx**2 / 2
# computed in floating point is accepted.
STABILITY_RTOL = 1e-9


class GridSpec(BaseModel):
    """Uniform grid x_j = -L + j*dx, j = 0..J, with zero-Dirichlet boundary."""

    model_config = ConfigDict(frozen=True)

    half_width: float = Field(..., gt=0.0, description="Half width L of the truncated domain")
    n_cells: int = Field(..., ge=8, description="Number of cells J (even)")

    @field_validator("n_cells")
    @classmethod
    def _even_cells(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"n_cells must be even, got {value}")
        return value

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_cells

    @property
    def n_points(self) -> int:
        return self.n_cells + 1

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    def index_of(self, x: float) -> int:
        """Return the grid index of ``x``; ``x`` must be a grid point."""
        j = int(round((x + self.half_width) / self.dx))
        if j < 0 or j > self.n_cells or not np.isclose(self.x[j], x, rtol=0.0, atol=1e-9 * self.dx):
            raise DomainError(f"x={x} is not a point of the grid")
        return j

    def nearest_index(self, x: float) -> int:
        j = int(round((x + self.half_width) / self.dx))
        return min(max(j, 0), self.n_cells)


class TimeGrid(BaseModel):
    """Uniform time grid t_m = m*dt, m = 0..M."""

    model_config = ConfigDict(frozen=True)

    horizon: float = Field(..., gt=0.0, description="Time horizon T")
    n_steps: int = Field(..., ge=1, description="Number of steps M")

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def step_of(self, t: float) -> int:
        """Return m with t_m == t; ``t`` must lie on the grid."""
        m = int(round(t / self.dt))
        if m < 0 or m > self.n_steps or abs(m * self.dt - t) > 1e-9 * self.dt:
            raise DomainError(f"t={t} is not a point of the time grid")
        return m

    def is_stable_for(self, grid: GridSpec) -> bool:
        return self.dt <= 0.5 * grid.dx**2 * (1.0 + STABILITY_RTOL)

    def check_stability(self, grid: GridSpec) -> None:
        if not self.is_stable_for(grid):
            raise ConfigurationError(
                f"explicit scheme unstable: dt={self.dt:.6g} exceeds dx^2/2={0.5 * grid.dx**2:.6g}"
            )
