"""
Periodic-box transforms, sharp frequency filters and the linear Fourier multipliers.

Normalization is fixed once here: coefficients are Fourier-series coefficients
(numpy ``norm="forward"``), so sin x has coefficients -i/2 at k = +1 and +i/2 at
k = -1. With this convention

    sum over grid points |f|^2 = N^d * sum over k |f_hat(k)|^2
    ||f||_{L^2}^2              = (2π)^d * sum over k |f_hat(k)|^2

where d is the number of resolved axes. Every norm in the package is derived
from ``inner`` below.
"""

import numpy as np

from hallmhd.errors import ParameterError, ShapeError
from hallmhd.models.fields import FrequencyFilter, SpectralScalarField, SpectralVectorField
from hallmhd.models.grid import Grid

NORM = "forward"


def forward(samples: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.fftn(samples, axes=grid.axes, norm=NORM)


def inverse(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.ifftn(coeffs, axes=grid.axes, norm=NORM).real


def to_spectral(
    samples: np.ndarray, grid: Grid, divergence_free: bool = False
) -> SpectralVectorField:
    """
    Transform real vector samples of shape (3, *grid.shape) to a spectral field.

    Raises:
        ShapeError: if the samples do not match the grid or are not real
    """
    samples = np.asarray(samples)
    expected = (3, *grid.shape)
    if samples.shape != expected:
        raise ShapeError(f"Sample shape {samples.shape} does not match grid shape {expected}")
    if np.iscomplexobj(samples):
        raise ShapeError("Samples must be real-valued")
    return SpectralVectorField(
        grid=grid, coeffs=forward(samples, grid), divergence_free=divergence_free
    )


def scalar_to_spectral(samples: np.ndarray, grid: Grid) -> SpectralScalarField:
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise ShapeError(f"Sample shape {samples.shape} does not match grid shape {grid.shape}")
    if np.iscomplexobj(samples):
        raise ShapeError("Samples must be real-valued")
    return SpectralScalarField(grid=grid, coeffs=forward(samples, grid))


def to_physical(f: SpectralVectorField | SpectralScalarField) -> np.ndarray:
    return inverse(f.coeffs, f.grid)


def apply_filter(f, filt: FrequencyFilter):
    """Zero every coefficient outside the filter's index set; works on scalars and vectors."""
    mask = filt.mask(f.grid)
    return f.with_coeffs(np.where(mask, f.coeffs, 0))


def restrict(f, mask: np.ndarray):
    return f.with_coeffs(np.where(mask, f.coeffs, 0))


def fractional_laplacian(
    f: SpectralVectorField | SpectralScalarField, alpha: float
) -> SpectralVectorField | SpectralScalarField:
    """Multiply by |k|^(2α); the zero mode maps to 0."""
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    return f.with_coeffs(f.coeffs * fractional_symbol(f.grid, alpha))


def fractional_symbol(grid: Grid, alpha: float) -> np.ndarray:
    return grid.wavenumber_squared() ** alpha


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """f_hat(k) -> f_hat(k) - k (k . f_hat(k)) / |k|^2, zero mode untouched."""
    k = f.grid.derivative_wavenumbers()
    k2 = np.sum(k * k, axis=0)
    safe = np.where(k2 > 0, k2, 1.0)
    k_dot_f = np.sum(k * f.coeffs, axis=0)
    coeffs = f.coeffs - k * np.where(k2 > 0, k_dot_f / safe, 0)
    return SpectralVectorField.inherited(f.grid, coeffs, True)


def divergence(f: SpectralVectorField) -> SpectralScalarField:
    k = f.grid.derivative_wavenumbers()
    return SpectralScalarField(grid=f.grid, coeffs=1j * np.sum(k * f.coeffs, axis=0))


def gradient(p: SpectralScalarField) -> SpectralVectorField:
    k = p.grid.derivative_wavenumbers()
    return SpectralVectorField(grid=p.grid, coeffs=1j * k * p.coeffs)


def inner(f, g) -> float:
    """L^2 inner product over the torus, real part."""
    f.check_grid(g)
    return float(f.grid.volume * np.sum((f.coeffs * np.conj(g.coeffs)).real))


def l2_norm(f) -> float:
    return float(np.sqrt(f.grid.volume * np.sum(np.abs(f.coeffs) ** 2)))


def multiplier_norm(f, symbol: np.ndarray) -> float:
    """sqrt((2π)^d sum_k symbol(k) |f_hat(k)|^2) for a nonnegative symbol."""
    return float(np.sqrt(f.grid.volume * np.sum(symbol * np.abs(f.coeffs) ** 2)))


def resample(f: SpectralVectorField, grid: Grid) -> SpectralVectorField:
    """
    Move a field to another resolution by copying the common wavenumbers.

    Modes that do not exist on the target lattice are dropped; new modes are zero.
    Both grids must share the dimension mode.
    """
    if grid.dim_mode != f.grid.dim_mode:
        raise ParameterError("resample cannot change the dimension mode")
    n_src, n_dst = f.grid.points_per_axis, grid.points_per_axis
    # integer indices |k_i| < min(N, M)/2 exist on both lattices in the same role
    half = min(n_src, n_dst) // 2
    keep = np.r_[0:half, -half + 1 : 0]
    index = np.ix_(*([keep] * grid.ndim))
    coeffs = np.zeros((3, *grid.shape), dtype=np.complex128)
    for c in range(3):
        coeffs[c][index] = f.coeffs[c][index]
    return SpectralVectorField.inherited(grid, coeffs, f.divergence_free)


def max_abs_physical(f: SpectralVectorField) -> float:
    """Largest pointwise Euclidean magnitude on the grid."""
    samples = to_physical(f)
    return float(np.sqrt(np.max(np.sum(samples * samples, axis=0))))
