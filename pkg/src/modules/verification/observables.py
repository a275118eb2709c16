"""Catalog of C_b^2 test functions with analytic half Laplacians."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.errors import ConfigurationError
from ..core.grid import GridSpec

# Compactly supported observables must stay this many cells inside the grid.
SUPPORT_MARGIN_CELLS = 10


@dataclass(frozen=True, eq=False)
class TestFunction:
    """phi and phi''/2 sampled on a grid."""

    __test__ = False

    id: str
    grid: GridSpec
    phi: np.ndarray
    half_laplacian: np.ndarray
    center: float = 0.0
    radius: float = math.inf

    def __neg__(self) -> "TestFunction":
        name = self.id[1:] if self.id.startswith("-") else f"-{self.id}"
        return TestFunction(name, self.grid, -self.phi, -self.half_laplacian, self.center, self.radius)

    @property
    def abs_phi(self) -> np.ndarray:
        return np.abs(self.phi)


def constant(grid: GridSpec) -> TestFunction:
    return TestFunction("one", grid, np.ones(grid.n_points), np.zeros(grid.n_points))


def bump(grid: GridSpec, center: float = 0.0, radius: float = 1.0) -> TestFunction:
    """Raised cosine (1 + cos(pi s))^2 / 4 with s = (x - c)/radius."""
    s = (grid.x - center) / radius
    inside = np.abs(s) < 1.0
    phi = np.where(inside, 0.25 * (1.0 + np.cos(np.pi * s)) ** 2, 0.0)
    half_lap = np.where(inside, -(np.pi**2 / (4.0 * radius**2)) * (np.cos(np.pi * s) + np.cos(2.0 * np.pi * s)), 0.0)
    return TestFunction(f"bump({center:g},{radius:g})", grid, phi, half_lap, center, radius)


def tilted_bump(grid: GridSpec, center: float = 0.0, radius: float = 1.0) -> TestFunction:
    """s times the raised-cosine bump; odd about the center."""
    s = (grid.x - center) / radius
    inside = np.abs(s) < 1.0
    base = 0.25 * (1.0 + np.cos(np.pi * s)) ** 2
    d_base = -0.5 * np.pi * (1.0 + np.cos(np.pi * s)) * np.sin(np.pi * s)
    dd_base = -0.5 * np.pi**2 * (np.cos(np.pi * s) + np.cos(2.0 * np.pi * s))
    phi = np.where(inside, s * base, 0.0)
    half_lap = np.where(inside, (2.0 * d_base + s * dd_base) / (2.0 * radius**2), 0.0)
    return TestFunction(f"tilted({center:g},{radius:g})", grid, phi, half_lap, center, radius)


def check_support(observable: TestFunction, grid: GridSpec | None = None) -> None:
    """Raise unless the observable's support sits SUPPORT_MARGIN_CELLS inside the grid."""
    grid = grid or observable.grid
    if math.isinf(observable.radius):
        return
    limit = grid.half_width - SUPPORT_MARGIN_CELLS * grid.dx
    if abs(observable.center) + observable.radius > limit + 1e-12:
        raise ConfigurationError(
            f"test function {observable.id} reaches |x| = {abs(observable.center) + observable.radius:g}, beyond the interior limit {limit:g}"
        )


def default_catalog(grid: GridSpec, radius: float = 1.0) -> list[TestFunction]:
    """The constant, a centred bump, an off-centre bump and a tilted bump."""
    observables = [constant(grid), bump(grid, 0.0, radius), bump(grid, 0.5 * radius, radius), tilted_bump(grid, 0.0, radius)]
    for observable in observables:
        check_support(observable, grid)
    return observables


def build_observable(grid: GridSpec, kind: str, center: float = 0.0, radius: float = 1.0) -> TestFunction:
    builders = {"one": lambda: constant(grid), "bump": lambda: bump(grid, center, radius), "tilted": lambda: tilted_bump(grid, center, radius)}
    if kind not in builders:
        raise ConfigurationError(f"unknown test function kind {kind!r} (known: {', '.join(builders)})")
    observable = builders[kind]()
    check_support(observable, grid)
    return observable
