import numpy as np
import pytest

from hallmhd.core.spectral import (
    apply_filter,
    forward,
    inverse,
    l2_norm,
    leray_project,
    resample,
    restrict,
    to_spectral,
)
from hallmhd.models.fields import SpectralVectorField
from hallmhd.models.grid import DimMode, Grid
from hallmhd.models.state import SimParams, SimState
from hallmhd.providers.provider import physical_field


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance runs taking seconds to minutes")


def random_solenoidal(grid: Grid, seed: int, band: int = 5, amplitude: float = 1.0) -> SpectralVectorField:
    """Random real solenoidal field with modes |k_i| <= band and L^2 norm amplitude."""
    rng = np.random.default_rng(seed)
    inside = np.all(np.abs(grid.wavenumbers()) <= band, axis=0)
    shape = (3, *grid.shape)
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    field = to_spectral(inverse(noise * inside, grid), grid)
    field = leray_project(restrict(field, inside))
    return field * (amplitude / l2_norm(field))


def field_from_samples(grid: Grid, components, divergence_free: bool = True) -> SpectralVectorField:
    return to_spectral(physical_field(grid, components), grid, divergence_free=divergence_free)


@pytest.fixture
def grid():
    return Grid.create(64)


@pytest.fixture
def small_grid():
    return Grid.create(32)


@pytest.fixture
def grid_3d():
    return Grid.create(16, DimMode.THREE_D)


@pytest.fixture
def make_field():
    return random_solenoidal


@pytest.fixture
def make_state():
    def build(u, B, alpha=1.0, cutoff=None, **params):
        """A state whose fields are cut to the Friedrichs ball of the given radius (default N//3)."""
        cutoff = cutoff if cutoff is not None else float(u.grid.points_per_axis // 3)
        params = SimParams(alpha=alpha, cutoff=cutoff, **params)
        return SimState(u=apply_filter(u, params.ball), B=apply_filter(B, params.ball), params=params)

    return build


@pytest.fixture
def single_mode_state(small_grid, make_state):
    """u = 0, B = (0, 0, sin x): every nonlinear term vanishes."""
    x, _, _ = small_grid.coordinates()
    B = field_from_samples(small_grid, (0.0, 0.0, np.sin(x)))
    return make_state(SpectralVectorField.zeros(small_grid), B)


def over_resolved_transport(a: SpectralVectorField, f: SpectralVectorField) -> SpectralVectorField:
    """(a . grad) f composed in physical space at twice the resolution, without dealiasing."""
    fine = Grid.create(2 * a.grid.points_per_axis, a.grid.dim_mode)
    a_fine, f_fine = resample(a, fine), resample(f, fine)
    k = fine.derivative_wavenumbers()
    a_phys = inverse(a_fine.coeffs, fine)
    product = np.zeros((3, *fine.shape))
    for j in range(3):
        product += a_phys[j] * inverse(1j * k[j] * f_fine.coeffs, fine)
    return resample(SpectralVectorField(grid=fine, coeffs=forward(product, fine)), a.grid)
