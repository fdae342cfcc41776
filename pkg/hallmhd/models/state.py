import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from hallmhd.errors import GridMismatchError, StateError
from hallmhd.models.fields import DIVERGENCE_TOLERANCE, FrequencyFilter, SpectralVectorField
from hallmhd.models.grid import Grid


class SimParams(BaseModel):
    """
    Physical and scheme parameters of one run.

    alpha > 1/2 is the well-posed regime, but any alpha > 0 is accepted so the
    threshold can be probed. hall_coefficient = 0 reduces the induction
    equation to standard MHD; freeze_velocity pins u to zero.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0)
    cutoff: float = Field(gt=0, description="Friedrichs radius n")
    sigma: float = Field(default=2.5, ge=0)
    hall_coefficient: float = 1.0
    freeze_velocity: bool = False

    @property
    def ball(self) -> FrequencyFilter:
        return FrequencyFilter.friedrichs_ball(self.cutoff)


class SimState(BaseModel):
    """
    A point on a Friedrichs trajectory: (u, B) at time t.

    The two running integrals are the time integrals of ||Λ^α B||^2 and
    ||Λ^α B||^2_{H^σ}, advanced by the stepper alongside the fields.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: SpectralVectorField
    B: SpectralVectorField
    params: SimParams
    t: float = 0.0
    step: int = Field(default=0, ge=0)
    dissipation_integral: float = 0.0
    hsigma_dissipation_integral: float = 0.0

    @model_validator(mode="after")
    def check_grids(self) -> "SimState":
        if self.u.grid != self.B.grid:
            raise GridMismatchError(f"u lives on {self.u.grid!r} but B on {self.B.grid!r}")
        return self

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def check_invariants(self) -> None:
        """
        Raises:
            StateError: if a field leaves the Friedrichs ball or is not solenoidal
        """
        if self.params.cutoff > self.grid.points_per_axis / 3:
            raise StateError(
                f"Friedrichs radius {self.params.cutoff} exceeds N/3 for N={self.grid.points_per_axis}"
            )
        outside = ~self.params.ball.mask(self.grid)
        for name, field in (("u", self.u), ("B", self.B)):
            if np.any(field.coeffs[:, outside]):
                raise StateError(f"{name} has coefficients outside the Friedrichs ball")
            residual = field.divergence_residual()
            if residual > DIVERGENCE_TOLERANCE:
                raise StateError(f"{name} divergence residual {residual:.3e} exceeds tolerance")

    def replace(self, **changes) -> "SimState":
        return self.model_copy(update=changes)
