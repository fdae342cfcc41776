import numpy as np

from hallmhd.core.spectral import to_spectral
from hallmhd.models.fields import SpectralVectorField
from hallmhd.providers.provider import Provider, physical_field


class OrszagTang(Provider):
    """
    Orszag-Tang vortex, z-independent in either dimension mode:
    u = a (-sin y, sin x, 0), B = a (-sin y, sin 2x, 0).
    """

    def fields(self) -> tuple[SpectralVectorField, SpectralVectorField]:
        x, y, _ = self.grid.coordinates()
        a = self.amplitude
        u = physical_field(self.grid, (-a * np.sin(y), a * np.sin(x), 0.0))
        B = physical_field(self.grid, (-a * np.sin(y), a * np.sin(2 * x), 0.0))
        return (
            to_spectral(u, self.grid, divergence_free=True),
            to_spectral(B, self.grid, divergence_free=True),
        )


class SingleMode(Provider):
    """
    u = 0 and B = a (0, 0, sin(k . x)) for an integer wavevector k with k_z = 0,
    which makes every nonlinear term vanish so B decays exactly.
    """

    def fields(self) -> tuple[SpectralVectorField, SpectralVectorField]:
        kx, ky, kz = self.config.get("mode", (1, 0, 0))
        if kz != 0:
            raise ValueError("single-mode data needs k_z = 0 so that B_z is solenoidal")
        x, y, _ = self.grid.coordinates()
        phase = kx * x + ky * y
        B = physical_field(self.grid, (0.0, 0.0, self.amplitude * np.sin(phase)))
        return SpectralVectorField.zeros(self.grid), to_spectral(B, self.grid, divergence_free=True)


class Zero(Provider):

    def fields(self) -> tuple[SpectralVectorField, SpectralVectorField]:
        return SpectralVectorField.zeros(self.grid), SpectralVectorField.zeros(self.grid)
