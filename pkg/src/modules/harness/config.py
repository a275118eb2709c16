"""Run configuration schemas, loaded from sectioned TOML files."""

from __future__ import annotations

import hashlib
import json
import math
import tomllib
from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..coefficients import CoefficientFamily, CoefficientSet, catalog, custom_coefficients, regularized
from ..core import ConfigurationError, GridSpec, ScalarField, TimeGrid, gaussian_density
from ..simulation import SchemeKind, SchemeTag, align_time_grid
from ..simulation.particles import MIN_PARTICLE_SCALE
from ..verification import TestFunction, build_observable, default_catalog

_TOL = 1e-9


class SuiteName(str, Enum):
    """Verification suites selectable from the config or the command line."""

    MARTINGALE = "martingale"
    QV = "qv"
    DOMINATION = "domination"
    MASS_LAW = "mass_law"
    PARTICLE_VARIANCE = "particle_variance"
    MILD = "mild"
    MOMENTS = "moments"
    HOLDER = "holder"
    GRONWALL = "gronwall"
    KERNEL_LEMMA = "kernel_lemma"
    CROSS_CHECK = "cross_check"


LEMMA_SUITES = (SuiteName.GRONWALL, SuiteName.KERNEL_LEMMA)
# Run their own simulations from the config; no manifest needed.
CONFIG_SUITES = (SuiteName.CROSS_CHECK,)


class CoefficientConfig(BaseModel):
    """Either a catalog family with its parameters or custom expressions with growth constants."""

    family: Optional[CoefficientFamily] = Field(None, description="Catalog id")
    beta: float = Field(0.0, description="sbm drift")
    theta: float = Field(1.0, description="contact_limit birth rate")
    p: float = Field(0.0, description="stepping_stone mutation rate into the type")
    q: float = Field(0.0, description="stepping_stone mutation rate out of the type")
    r_sel: float = Field(0.0, description="stepping_stone selection")
    drift: Optional[str] = Field(None, description="Expression for b(u)")
    noise: Optional[str] = Field(None, description="Expression for sigma(u)")
    theta_exp: float = Field(1.0, gt=0.0, description="Exponent theta in the drift lower bound")
    r: float = Field(1.0, gt=0.0, le=1.0, description="Exponent r in the noise bound")
    L_b: float = Field(0.0, ge=0.0, description="Upper bound of b")
    l_b: float = Field(0.0, ge=0.0, description="Lower-bound constant of b")
    L_sigma: float = Field(0.0, ge=0.0, description="Noise growth constant")
    regularize: Optional[int] = Field(None, ge=1, description="Replace sigma by sigma_n with this n")

    @model_validator(mode="after")
    def _one_source(self) -> "CoefficientConfig":
        custom = self.drift is not None or self.noise is not None
        if self.family is None and not custom:
            raise ValueError("set either family or drift and noise")
        if self.family is not None and custom:
            raise ValueError("family and custom expressions are mutually exclusive")
        if custom and (self.drift is None or self.noise is None):
            raise ValueError("custom coefficients need both drift and noise")
        return self

    def build(self) -> CoefficientSet:
        if self.family is not None:
            c = catalog(self.family, beta=self.beta, theta=self.theta, p=self.p, q=self.q, r_sel=self.r_sel)
        else:
            c = custom_coefficients(
                self.drift, self.noise, theta=self.theta_exp, r=self.r, L_b=self.L_b, l_b=self.l_b, L_sigma=self.L_sigma
            )
        return regularized(c, self.regularize) if self.regularize else c


class GridConfig(BaseModel):
    half_width: float = Field(10.0, gt=0.0, description="Half width L")
    n_cells: int = Field(1024, ge=8, description="Number of cells J (even)")

    def spec(self) -> GridSpec:
        return GridSpec(half_width=self.half_width, n_cells=self.n_cells)


class TimeConfig(BaseModel):
    horizon: float = Field(0.5, gt=0.0, description="Time horizon T")
    dt: float = Field(1e-4, gt=0.0, description="Largest admissible time step")
    dump_interval: float = Field(0.01, gt=0.0, description="Time between stored profiles")

    @model_validator(mode="after")
    def _dumps_divide_horizon(self) -> "TimeConfig":
        ratio = self.horizon / self.dump_interval
        if abs(ratio - round(ratio)) > _TOL * ratio or round(ratio) < 1:
            raise ValueError(f"dump_interval {self.dump_interval} must divide the horizon {self.horizon}")
        return self

    @property
    def n_dumps(self) -> int:
        return int(round(self.horizon / self.dump_interval))

    def build(self, n: Optional[int] = None) -> tuple[TimeGrid, int]:
        """Time grid and steps per dump; with ``n`` the step also divides 1/n."""
        if n is None:
            per_dump = max(1, math.ceil(self.dump_interval / self.dt - _TOL))
        else:
            per_dump = align_time_grid(self.dump_interval, self.dt, n).n_steps
        return TimeGrid(horizon=self.horizon, n_steps=self.n_dumps * per_dump), per_dump


class InitialConfig(BaseModel):
    kind: Literal["gaussian", "bump", "zero", "csv"] = Field("gaussian", description="Initial profile family")
    variance: float = Field(0.25, gt=0.0, description="Gaussian variance")
    center: float = Field(0.0, description="Profile center")
    radius: float = Field(1.0, gt=0.0, description="Bump radius")
    mass: float = Field(1.0, ge=0.0, description="Total mass")
    path: Optional[Path] = Field(None, description="CSV file with x,value columns")

    def build(self, grid: GridSpec) -> ScalarField:
        if self.kind == "gaussian":
            return gaussian_density(grid, self.variance, self.center, self.mass)
        if self.kind == "zero":
            return ScalarField.zeros(grid)
        if self.kind == "csv":
            if self.path is None:
                raise ConfigurationError("initial.kind = 'csv' needs initial.path")
            return ScalarField.read_csv(self.path, grid, nonnegative=True)
        observable = build_observable(grid, "bump", self.center, self.radius)
        total = ScalarField(grid=grid, values=observable.phi, nonnegative=True).integral()
        return ScalarField(grid=grid, values=observable.phi * self.mass / total, nonnegative=True, label="bump")


class SchemeConfig(BaseModel):
    kind: SchemeKind = Field(SchemeKind.DIRECT, description="direct, slab or particle")
    n: Optional[int] = Field(None, ge=1, description="Slab index n; particles run in the first slab of 1/n")
    particles: Optional[int] = Field(None, ge=1, description="Particle scaling N")

    @model_validator(mode="after")
    def _needs(self) -> "SchemeConfig":
        if self.kind is SchemeKind.SLAB and self.n is None:
            raise ValueError("slab scheme needs n")
        if self.kind is SchemeKind.PARTICLE and (self.particles is None or self.particles < MIN_PARTICLE_SCALE):
            raise ValueError(f"particle scheme needs particles >= {MIN_PARTICLE_SCALE}")
        return self

    def tag(self) -> SchemeTag:
        if self.kind is SchemeKind.SLAB:
            return SchemeTag(kind=self.kind, n=self.n)
        if self.kind is SchemeKind.PARTICLE:
            return SchemeTag(kind=self.kind, n=self.n or 1, particles=self.particles)
        return SchemeTag()


class EnsembleConfig(BaseModel):
    replicas: int = Field(4, ge=1, description="Number of replicas")
    seed: int = Field(0, ge=0, description="Base seed; replica i uses noise stream i")


class OutputConfig(BaseModel):
    directory: Optional[Path] = Field(None, description="Run directory; defaults to <output root>/<config hash>")


class ObservableConfig(BaseModel):
    kind: Literal["one", "bump", "tilted"] = "bump"
    center: float = 0.0
    radius: float = Field(1.0, gt=0.0)


class VerifyConfig(BaseModel):
    suites: list[SuiteName] = Field(default_factory=lambda: [SuiteName.MARTINGALE, SuiteName.QV])
    times: list[float] = Field(default_factory=list, description="Evaluation times; empty means the horizon")
    observables: list[ObservableConfig] = Field(default_factory=list, description="Test functions; empty means the default catalog")
    observable_radius: float = Field(1.0, gt=0.0, description="Radius of the default catalog")
    drift_offset: float = Field(0.0, description="Shift of b in Z_t(phi); nonzero values are a miscalibration control")
    qv_stride: int = Field(10, ge=1, description="Raw steps between realized-QV increments")
    min_replicas: int = Field(200, ge=2, description="Replicas required by the martingale tests")
    compensate_clamp: bool = Field(True, description="Remove mass restored by clamping from Z")
    mild_replicas: Optional[int] = Field(
        None, ge=2, description="Replicas replayed by the mild suite; unset means the whole ensemble"
    )


class MomentsConfig(BaseModel):
    lam: float = Field(1.0, gt=0.0, description="Weight lambda of nu(lambda, q, t)")
    q: list[float] = Field(default_factory=lambda: [1.0, 2.0])
    holder_q: float = Field(2.0, gt=1.0)
    holder_half_width: float = Field(0.5, gt=0.0)
    gronwall_c: list[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0])
    gronwall_points: int = Field(1001, ge=11)
    kernel_T: list[float] = Field(default_factory=lambda: [0.5, 1.0])
    kernel_lam: list[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    kernel_size: int = Field(6, ge=3, description="Points per sweep axis")


class SweepConfig(BaseModel):
    variable: Literal["n", "N", "dx", "dt", "replicas"] = "n"
    values: list[float] = Field(default_factory=list)
    marginal_time: Optional[float] = Field(None, description="Marginal time; defaults to the horizon")
    marginal_x: float = 0.0

    @field_validator("values")
    @classmethod
    def _positive(cls, values: list[float]) -> list[float]:
        if any(v <= 0 for v in values):
            raise ValueError("sweep values must be positive")
        return values


class RunConfig(BaseModel):
    """One ensemble run and the checks to apply to it."""

    model_config = ConfigDict(extra="forbid")

    coefficients: CoefficientConfig
    grid: GridConfig = Field(default_factory=GridConfig)
    time: TimeConfig = Field(default_factory=TimeConfig)
    initial: InitialConfig = Field(default_factory=InitialConfig)
    scheme: SchemeConfig = Field(default_factory=SchemeConfig)
    ensemble: EnsembleConfig = Field(default_factory=EnsembleConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    moments: MomentsConfig = Field(default_factory=MomentsConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)

    @model_validator(mode="after")
    def _cross_field(self) -> "RunConfig":
        grid = self.grid.spec()
        time, _ = self.time_grid()
        if self.scheme.kind is not SchemeKind.PARTICLE and not time.is_stable_for(grid):
            raise ValueError(f"explicit scheme unstable: dt={time.dt:.6g} exceeds dx^2/2={0.5 * grid.dx**2:.6g}")
        if self.scheme.kind is SchemeKind.PARTICLE and self.time.horizon > 1.0 / (self.scheme.n or 1) * (1 + _TOL):
            raise ValueError("particle runs stay inside the first slab: horizon must be <= 1/n")
        for t in self.verify.times:
            k = t / self.time.dump_interval
            if t <= 0.0 or t > self.time.horizon * (1 + _TOL) or abs(k - round(k)) > 1e-6:
                raise ValueError(f"verify time {t} is not a dump time")
        try:
            self.observables(grid)
        except ConfigurationError as exc:
            raise ValueError(str(exc)) from None
        return self

    @classmethod
    def from_toml(cls, path: Path | str) -> "RunConfig":
        with open(path, "rb") as handle:
            return cls.model_validate(tomllib.load(handle))

    def canonical(self) -> dict[str, Any]:
        return self.model_dump(mode="json", exclude={"output": {"directory"}})

    def config_hash(self) -> str:
        payload = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def time_grid(self) -> tuple[TimeGrid, int]:
        return self.time.build(self.scheme.n if self.scheme.kind is SchemeKind.SLAB else None)

    def grid_spec(self) -> GridSpec:
        return self.grid.spec()

    def coefficient_set(self) -> CoefficientSet:
        return self.coefficients.build()

    def initial_field(self) -> ScalarField:
        return self.initial.build(self.grid_spec())

    def observables(self, grid: Optional[GridSpec] = None) -> list[TestFunction]:
        grid = grid or self.grid_spec()
        if not self.verify.observables:
            return default_catalog(grid, self.verify.observable_radius)
        return [build_observable(grid, p.kind, p.center, p.radius) for p in self.verify.observables]

    def verify_times(self) -> list[float]:
        return self.verify.times or [self.time.horizon]

    def with_updates(self, section: str, **values: Any) -> "RunConfig":
        """Copy with one section changed, re-running validation."""
        data = self.model_dump()
        data[section] = {**data[section], **values}
        return RunConfig.model_validate(data)
