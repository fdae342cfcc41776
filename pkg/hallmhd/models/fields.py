from functools import lru_cache
from typing import ClassVar, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, model_validator

from hallmhd.errors import DivergenceFlagError, GridMismatchError, ShapeError
from hallmhd.models.grid import Grid

# relative divergence max|k . f_hat| / max|f_hat| allowed under the divergence_free flag
DIVERGENCE_TOLERANCE = 1e-12

# validation context key: the flag was inherited through a linear map, not claimed
INHERITED_FLAG = "inherited_flag"


class FrequencyFilter(BaseModel):
    """
    A sharp index set on the wavenumber lattice.

    - friedrichs_ball(n): {k : |k| <= n}
    - dealias(): {k : |k_i| <= N/3 on every axis}
    - dyadic_shell(l): {k : 2^l <= |k| < 2^(l+1)} for l >= 0, {k = 0} for l = -1
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["friedrichs_ball", "dealias_two_thirds", "dyadic_shell"]
    radius: float | None = Field(default=None, gt=0)
    shell: int | None = Field(default=None, ge=-1)

    @model_validator(mode="after")
    def check_parameters(self) -> "FrequencyFilter":
        if self.kind == "friedrichs_ball" and self.radius is None:
            raise ValueError("friedrichs_ball requires a radius")
        if self.kind == "dyadic_shell" and self.shell is None:
            raise ValueError("dyadic_shell requires a shell index")
        return self

    @classmethod
    def friedrichs_ball(cls, radius: float) -> "FrequencyFilter":
        return cls(kind="friedrichs_ball", radius=radius)

    @classmethod
    def dealias(cls) -> "FrequencyFilter":
        return cls(kind="dealias_two_thirds")

    @classmethod
    def dyadic_shell(cls, shell: int) -> "FrequencyFilter":
        return cls(kind="dyadic_shell", shell=shell)

    def describe(self) -> str:
        if self.kind == "friedrichs_ball":
            return f"{{k : |k| <= {self.radius:g}}}"
        if self.kind == "dealias_two_thirds":
            return "{k : |k_i| <= N/3 for every axis i}"
        if self.shell == -1:
            return "{k : |k| < 1}"
        return f"{{k : 2^{self.shell} <= |k| < 2^{self.shell + 1}}}"

    def mask(self, grid: Grid) -> np.ndarray:
        """Boolean keep-mask of shape grid.shape (read-only, cached)."""
        return _mask(self, grid)


@lru_cache(maxsize=256)
def _mask(filt: FrequencyFilter, grid: Grid) -> np.ndarray:
    k2 = grid.wavenumber_squared()
    if filt.kind == "friedrichs_ball":
        keep = k2 <= filt.radius**2
    elif filt.kind == "dealias_two_thirds":
        k = grid.wavenumbers()
        keep = np.all(np.abs(k) <= grid.points_per_axis / 3, axis=0)
    elif filt.shell == -1:
        keep = k2 < 1
    else:
        # |k|^2 is an exact integer, so comparing against powers of four is exact
        keep = (k2 >= 4.0**filt.shell) & (k2 < 4.0 ** (filt.shell + 1))
    keep.setflags(write=False)
    return keep


class _SpectralField(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    coeffs: np.ndarray

    components: ClassVar[int | None] = None

    @model_validator(mode="after")
    def check_coefficients(self):
        expected = self._expected_shape(self.grid)
        if self.coeffs.shape != expected:
            raise ShapeError(
                f"Coefficient shape {self.coeffs.shape} does not match expected shape {expected}"
            )
        if self.coeffs.dtype != np.complex128:
            raise ShapeError(f"Coefficients must be complex128, got {self.coeffs.dtype}")
        self.coeffs.setflags(write=False)
        return self

    @classmethod
    def _expected_shape(cls, grid: Grid) -> tuple[int, ...]:
        if cls.components is None:
            return grid.shape
        return (cls.components, *grid.shape)

    def check_grid(self, other: "_SpectralField") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(f"Grid mismatch: {self.grid!r} vs {other.grid!r}")

    def max_coefficient(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


class SpectralScalarField(_SpectralField):
    """A real scalar field stored as Fourier coefficients, shape grid.shape."""

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralScalarField":
        return cls(grid=grid, coeffs=np.zeros(grid.shape, dtype=np.complex128))

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralScalarField":
        return SpectralScalarField(grid=self.grid, coeffs=coeffs)

    def __add__(self, other: "SpectralScalarField") -> "SpectralScalarField":
        self.check_grid(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralScalarField") -> "SpectralScalarField":
        self.check_grid(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, factor: float) -> "SpectralScalarField":
        return self.with_coeffs(self.coeffs * factor)

    __rmul__ = __mul__


class SpectralVectorField(_SpectralField):
    """
    A real three-component vector field stored as Fourier coefficients.

    Coefficients follow the numpy FFT storage order with shape (3, *grid.shape)
    and the "forward" normalization, so they are Fourier-series coefficients.
    The divergence_free flag asserts k . f_hat(k) = 0; it survives linear
    combinations of solenoidal fields and is set by the Leray projection.
    """

    components: ClassVar[int | None] = 3

    divergence_free: bool = False

    @model_validator(mode="after")
    def check_divergence_flag(self, info: ValidationInfo) -> "SpectralVectorField":
        if not self.divergence_free or (info.context or {}).get(INHERITED_FLAG):
            return self
        residual = self.divergence_residual()
        if residual > DIVERGENCE_TOLERANCE:
            raise DivergenceFlagError(
                f"Field flagged divergence-free has relative divergence {residual:.3e} > {DIVERGENCE_TOLERANCE:g}"
            )
        return self

    @classmethod
    def inherited(cls, grid: Grid, coeffs: np.ndarray, divergence_free: bool) -> "SpectralVectorField":
        """
        Build a field whose flag follows from how it was made: the Leray
        projection, the curl, a filter, a multiplier or a linear combination of flagged
        fields. Such results can be pure round-off (a difference of equal
        fields, an empty shell, the projection or curl of a gradient), so the flag is
        carried over without re-checking the relative divergence.
        """
        return cls.model_validate(
            {"grid": grid, "coeffs": coeffs, "divergence_free": divergence_free},
            context={INHERITED_FLAG: True},
        )

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralVectorField":
        return cls(
            grid=grid,
            coeffs=np.zeros((3, *grid.shape), dtype=np.complex128),
            divergence_free=True,
        )

    @classmethod
    def from_coefficients(
        cls, coeffs: np.ndarray, grid: Grid, divergence_free: bool = False
    ) -> "SpectralVectorField":
        """Build a field from a copy of the given coefficients."""
        return cls(
            grid=grid,
            coeffs=np.array(coeffs, dtype=np.complex128, copy=True),
            divergence_free=divergence_free,
        )

    def with_coeffs(
        self, coeffs: np.ndarray, divergence_free: bool | None = None
    ) -> "SpectralVectorField":
        if divergence_free is None:
            return self.inherited(self.grid, coeffs, self.divergence_free)
        return SpectralVectorField(grid=self.grid, coeffs=coeffs, divergence_free=divergence_free)

    def divergence_residual(self) -> float:
        """max_k |k . f_hat(k)| relative to max_k |f_hat(k)| (0 for the zero field)."""
        scale = self.max_coefficient()
        if scale == 0.0:
            return 0.0
        k = self.grid.derivative_wavenumbers()
        return float(np.max(np.abs(np.sum(k * self.coeffs, axis=0)))) / scale

    def __add__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self.check_grid(other)
        return self.inherited(
            self.grid, self.coeffs + other.coeffs, self.divergence_free and other.divergence_free
        )

    def __sub__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self.check_grid(other)
        return self.inherited(
            self.grid, self.coeffs - other.coeffs, self.divergence_free and other.divergence_free
        )

    def __neg__(self) -> "SpectralVectorField":
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, factor: float) -> "SpectralVectorField":
        return self.with_coeffs(self.coeffs * factor)

    __rmul__ = __mul__
