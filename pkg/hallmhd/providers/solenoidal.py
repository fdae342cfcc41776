import numpy as np

from hallmhd.core.spectral import forward, inverse, l2_norm, leray_project
from hallmhd.models.fields import SpectralVectorField
from hallmhd.providers.provider import Provider


class RandomSolenoidal(Provider):
    """
    Band-limited random solenoidal fields with coefficient magnitudes ~ |k|^-m.

    Config keys: seed, spectrum_slope (m), band (largest |k| kept, clipped to
    N/3), amplitude (L^2 norm of each field). u and B use independent streams
    of one seeded generator, so a seed fixes the pair.
    """

    def fields(self) -> tuple[SpectralVectorField, SpectralVectorField]:
        rng = np.random.default_rng(int(self.config.get("seed", 0)))
        return self._draw(rng), self._draw(rng)

    def _draw(self, rng: np.random.Generator) -> SpectralVectorField:
        grid = self.grid
        slope = float(self.config.get("spectrum_slope", 3.0))
        band = min(float(self.config.get("band", 8)), grid.points_per_axis / 3)
        magnitude = grid.wavenumber_magnitude()
        inside = (magnitude >= 1) & (magnitude <= band)
        envelope = np.where(inside, np.where(inside, magnitude, 1.0) ** -slope, 0.0)

        shape = (3, *grid.shape)
        noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        # the real part of the synthesized samples enforces conjugate symmetry
        samples = inverse(noise * envelope, grid)
        coeffs = np.where(inside, forward(samples, grid), 0)
        field = leray_project(SpectralVectorField(grid=grid, coeffs=coeffs))

        norm = l2_norm(field)
        if norm == 0.0:
            return field
        return field * (self.amplitude / norm)
