from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hallmhd.models.grid import DimMode, Grid
from hallmhd.models.state import SimParams

Experiment = Literal["run", "diagnose", "converge", "alpha-sweep"]
DataPreset = Literal["orszag-tang", "random", "single-mode", "zero", "snapshot"]


class RunPlan(BaseModel):
    """
    A fully resolved experiment description.

    Config documents use the short keys N, n and T for the resolution, the
    Friedrichs radius and the horizon. Unknown keys are rejected.
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    experiment: Experiment = "run"

    # grid and scheme
    points: int = Field(default=64, alias="N", ge=8)
    dim_mode: DimMode = DimMode.TWO_POINT_FIVE_D
    alpha: float = Field(default=1.0, gt=0)
    cutoff: float | None = Field(default=None, alias="n", gt=0)
    sigma: float | None = Field(default=None, ge=0)
    hall_coefficient: float = 1.0
    freeze_velocity: bool = False

    # time stepping
    horizon: float = Field(default=0.25, alias="T", gt=0)
    dt: Literal["auto"] | float = "auto"
    cfl: float = Field(default=0.3, gt=0)
    dt_max: float = Field(default=0.01, gt=0)
    blowup_cap: float = Field(default=1e8, gt=0)

    # initial data
    data: DataPreset = "orszag-tang"
    amplitude: float = Field(default=1.0, gt=0)
    seed: int = 0
    spectrum_slope: float = Field(default=3.0, description="m in the |k|^-m spectrum")
    band: int = Field(default=8, ge=1)
    mode: tuple[int, int, int] = (1, 0, 0)
    snapshot: Path | None = None

    # sweeps
    cutoffs: list[float] = [8, 12, 16, 21]
    alphas: list[float] = [0.6, 0.75, 1.0]
    samples: int = Field(default=10, ge=1)
    growth_limit: float = Field(default=1e3, gt=1)
    jobs: int = Field(default=1, ge=1)

    # output
    output: Path = Path("runs")
    snapshot_every: int = Field(default=0, ge=0)
    ledger_every: int = Field(default=1, ge=1)

    @field_validator("points")
    @classmethod
    def validate_power_of_two(cls, v: int) -> int:
        if v & (v - 1) != 0:
            raise ValueError(f"N must be a power of two, got {v}")
        return v

    @field_validator("dt")
    @classmethod
    def validate_dt(cls, v):
        if v != "auto" and v <= 0:
            raise ValueError("dt must be 'auto' or a positive number")
        return v

    @field_validator("alphas")
    @classmethod
    def validate_alphas(cls, v: list[float]) -> list[float]:
        if any(alpha <= 0 for alpha in v):
            raise ValueError("every alpha must be positive")
        return v

    @model_validator(mode="after")
    def resolve_defaults(self) -> "RunPlan":
        limit = self.points / 3
        if self.cutoff is None:
            self.cutoff = float(self.points // 3)
        if self.sigma is None:
            self.sigma = 2.5 if self.dim_mode == DimMode.TWO_POINT_FIVE_D else 2.75
        if self.cutoff > limit:
            raise ValueError(f"n must satisfy n <= N/3 = {limit:.4g}, got {self.cutoff}")
        too_large = [n for n in self.cutoffs if not 0 < n <= limit]
        if too_large and self.experiment == "converge":
            raise ValueError(f"cutoffs must satisfy 0 < n <= N/3 = {limit:.4g}, got {too_large}")
        if self.data == "snapshot" and self.snapshot is None:
            raise ValueError("data 'snapshot' requires a snapshot path")
        return self

    @property
    def grid(self) -> Grid:
        return Grid.create(self.points, self.dim_mode)

    @property
    def params(self) -> SimParams:
        return SimParams(
            alpha=self.alpha,
            cutoff=self.cutoff,
            sigma=self.sigma,
            hall_coefficient=self.hall_coefficient,
            freeze_velocity=self.freeze_velocity,
        )

    def warnings(self) -> list[str]:
        """Soft constraint violations, recorded in the manifest."""
        messages = []
        threshold = 1 + self.grid.ndim / 2
        if self.sigma <= threshold:
            messages.append(
                f"sigma={self.sigma} does not exceed 1 + d/2 = {threshold}; "
                "H^sigma norms are outside the well-posedness regime"
            )
        if self.experiment == "converge" and len(set(self.cutoffs)) < 2:
            messages.append("converge needs at least two distinct cutoffs; the report is degenerate")
        if self.experiment == "converge" and len(set(self.cutoffs)) < 3:
            messages.append("a monotonicity verdict needs at least three cutoffs")
        return messages

    def resolved(self) -> dict:
        """Every field, defaults included, under its config key."""
        return self.model_dump(mode="json", by_alias=True)


class Manifest(BaseModel):
    """What a run directory contains and how it was produced."""

    version: str
    plan: dict
    mode: Literal["reference", "parallel"]
    warnings: list[str] = []
    exit_status: int = 0
    diverged: bool = False
    message: str | None = None
    wall_time: float = 0.0
    artifacts: list[str] = []
