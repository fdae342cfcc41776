from enum import Enum
from functools import lru_cache
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class DimMode(str, Enum):
    # three-component fields that do not depend on z
    TWO_POINT_FIVE_D = "2.5d"
    THREE_D = "3d"


class Grid(BaseModel):
    """
    Periodic box [0, 2π)^d with N points per axis.

    In 2.5D the fields carry three components but are sampled on an N × N
    plane; the z wavenumber is identically zero. The wavenumber lattice on each
    axis is {-N/2+1, ..., N/2}.

    Example:
        >>> grid = Grid.create(64)
        >>> grid.shape
        (64, 64)
    """

    model_config = ConfigDict(frozen=True)

    dim_mode: DimMode = DimMode.TWO_POINT_FIVE_D
    points_per_axis: int = Field(ge=8, description="N, a power of two")

    @field_validator("points_per_axis")
    @classmethod
    def validate_power_of_two(cls, v: int) -> int:
        if v & (v - 1) != 0:
            raise ValueError(f"points_per_axis must be a power of two, got {v}")
        return v

    @classmethod
    def create(cls, points: int, dim_mode: DimMode | str = DimMode.TWO_POINT_FIVE_D) -> "Grid":
        return cls(points_per_axis=points, dim_mode=DimMode(dim_mode))

    @property
    def box_length(self) -> float:
        return 2 * math.pi

    @property
    def ndim(self) -> int:
        """Number of resolved axes (2 or 3)."""
        return 2 if self.dim_mode == DimMode.TWO_POINT_FIVE_D else 3

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.ndim

    @property
    def axes(self) -> tuple[int, ...]:
        # spatial axes of a (components, *shape) array
        return tuple(range(-self.ndim, 0))

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def volume(self) -> float:
        return self.box_length**self.ndim

    @property
    def parseval_constant(self) -> int:
        """sum over points of |f|^2 == parseval_constant * sum over modes of |f_hat|^2"""
        return self.points_per_axis**self.ndim

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Physical coordinates (x, y, z) broadcast to the grid shape; z is 0 in 2.5D."""
        return _coordinates(self.dim_mode, self.points_per_axis)

    def wavenumbers(self) -> np.ndarray:
        """Integer lattice vectors k, shape (3, *shape)."""
        return _wavenumbers(self.dim_mode, self.points_per_axis, False)

    def derivative_wavenumbers(self) -> np.ndarray:
        """Lattice vectors with each axis' Nyquist entry zeroed, used for derivatives."""
        return _wavenumbers(self.dim_mode, self.points_per_axis, True)

    def wavenumber_squared(self) -> np.ndarray:
        """|k|^2 on the lattice; exact integers stored as floats."""
        return _wavenumber_squared(self.dim_mode, self.points_per_axis)

    def wavenumber_magnitude(self) -> np.ndarray:
        return np.sqrt(self.wavenumber_squared())


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _axis_wavenumbers(points: int, zero_nyquist: bool) -> np.ndarray:
    k = np.fft.fftfreq(points, d=1.0 / points)
    # numpy stores the Nyquist entry as -N/2; the lattice uses +N/2
    k[points // 2] = 0.0 if zero_nyquist else points / 2
    return k


@lru_cache(maxsize=None)
def _wavenumbers(dim_mode: DimMode, points: int, zero_nyquist: bool) -> np.ndarray:
    k1 = _axis_wavenumbers(points, zero_nyquist)
    if dim_mode == DimMode.TWO_POINT_FIVE_D:
        kx, ky = np.meshgrid(k1, k1, indexing="ij")
        kz = np.zeros_like(kx)
    else:
        kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij")
    return _readonly(np.stack([kx, ky, kz]))


@lru_cache(maxsize=None)
def _wavenumber_squared(dim_mode: DimMode, points: int) -> np.ndarray:
    k = _wavenumbers(dim_mode, points, False)
    return _readonly(np.sum(k * k, axis=0))


@lru_cache(maxsize=None)
def _coordinates(dim_mode: DimMode, points: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x1 = np.arange(points) * (2 * math.pi / points)
    if dim_mode == DimMode.TWO_POINT_FIVE_D:
        x, y = np.meshgrid(x1, x1, indexing="ij")
        z = np.zeros_like(x)
    else:
        x, y, z = np.meshgrid(x1, x1, x1, indexing="ij")
    return _readonly(x), _readonly(y), _readonly(z)
