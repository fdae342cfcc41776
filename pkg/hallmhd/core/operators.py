"""
Nonlinear operators of the Hall-MHD system, computed pseudo-spectrally.

Every quadratic product is formed in physical space and the result is
truncated with the 2/3 rule before it is returned. For inputs supported in
the dealias set this makes the returned coefficients exact products, so the
integral identities checked here hold to round-off.
"""

from typing import NamedTuple

import numpy as np

from hallmhd.core.spectral import (
    forward,
    gradient,
    inner,
    inverse,
    l2_norm,
    multiplier_norm,
)
from hallmhd.errors import GridMismatchError
from hallmhd.models.fields import FrequencyFilter, SpectralScalarField, SpectralVectorField
from hallmhd.models.grid import Grid


class HallResiduals(NamedTuple):
    orthogonality: float
    derivative_shift: float
    vector_identity: float
    scale: float

    def relative(self) -> "HallResiduals":
        """Residuals divided by scale^3 (all zero when the field vanishes)."""
        if self.scale == 0.0:
            return HallResiduals(0.0, 0.0, 0.0, 0.0)
        cube = self.scale**3
        return HallResiduals(
            self.orthogonality / cube,
            self.derivative_shift / cube,
            self.vector_identity / cube,
            self.scale,
        )


def curl(f: SpectralVectorField) -> SpectralVectorField:
    """i k x f_hat(k); divergence-free by construction."""
    k = f.grid.derivative_wavenumbers()
    c = f.coeffs
    coeffs = 1j * np.stack(
        [
            k[1] * c[2] - k[2] * c[1],
            k[2] * c[0] - k[0] * c[2],
            k[0] * c[1] - k[1] * c[0],
        ]
    )
    return SpectralVectorField.inherited(f.grid, coeffs, True)


def field_scale(f: SpectralVectorField) -> float:
    """H^2 size of a field, the normalization of the Hall identity residuals."""
    k2 = f.grid.wavenumber_squared()
    return multiplier_norm(f, (1.0 + k2) ** 2)


class OperatorWorkspace:
    """
    Per-worker state for pseudo-spectral products on one grid.

    Holds the dealias mask and derivative wavenumbers and reuses physical-space
    scratch buffers between calls, so a workspace must not be shared between
    threads.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.dealias = FrequencyFilter.dealias()
        self._mask = self.dealias.mask(grid)
        self._k = grid.derivative_wavenumbers()
        self._product = np.empty((3, *grid.shape))
        self._buffer = np.empty(grid.shape)

    # Physical-space helpers

    def physical(self, f: SpectralVectorField | SpectralScalarField) -> np.ndarray:
        self._check(f)
        return inverse(f.coeffs, self.grid)

    def physical_gradient(self, f: SpectralVectorField) -> np.ndarray:
        """d_j f_i in physical space, shape (3, 3, *shape) indexed [i, j]."""
        self._check(f)
        spectral = 1j * self._k[np.newaxis, :] * f.coeffs[:, np.newaxis]
        return inverse(spectral, self.grid)

    def to_dealiased(self, samples: np.ndarray) -> np.ndarray:
        return np.where(self._mask, forward(samples, self.grid), 0)

    def _check(self, f) -> None:
        if f.grid != self.grid:
            raise GridMismatchError(f"Field grid {f.grid!r} does not match workspace grid {self.grid!r}")

    # Quadratic products

    def transport(self, a: np.ndarray, grad_f: np.ndarray) -> SpectralVectorField:
        """(a . grad) f from physical a and physical gradient of f."""
        product = self._product
        for i in range(3):
            np.multiply(a[0], grad_f[i, 0], out=product[i])
            for j in (1, 2):
                np.multiply(a[j], grad_f[i, j], out=self._buffer)
                product[i] += self._buffer
        return SpectralVectorField(grid=self.grid, coeffs=self.to_dealiased(product))

    def advect(self, u: SpectralVectorField, f: SpectralVectorField) -> SpectralVectorField:
        """Dealiased (u . grad) f."""
        return self.transport(self.physical(u), self.physical_gradient(f))

    def stretch(self, B: SpectralVectorField, u: SpectralVectorField) -> SpectralVectorField:
        """Dealiased (B . grad) u; the advection kernel with roles swapped."""
        return self.advect(B, u)

    def cross(self, a: SpectralVectorField, b: SpectralVectorField) -> SpectralVectorField:
        return self.cross_physical(self.physical(a), self.physical(b))

    def cross_physical(self, a: np.ndarray, b: np.ndarray) -> SpectralVectorField:
        product = np.cross(a, b, axis=0)
        return SpectralVectorField(grid=self.grid, coeffs=self.to_dealiased(product))

    def dot(self, a: SpectralVectorField, b: SpectralVectorField) -> SpectralScalarField:
        product = np.sum(self.physical(a) * self.physical(b), axis=0)
        return SpectralScalarField(grid=self.grid, coeffs=self.to_dealiased(product))

    def multiply(self, f: SpectralScalarField, g: SpectralScalarField) -> SpectralScalarField:
        product = self.physical(f) * self.physical(g)
        return SpectralScalarField(grid=self.grid, coeffs=self.to_dealiased(product))

    # Hall-MHD terms

    def hall_term(self, B: SpectralVectorField) -> SpectralVectorField:
        """curl((curl B) x B), with one dealias pass after the product."""
        J = curl(B)
        return curl(self.cross(J, B))

    def compute_pressure(
        self, u: SpectralVectorField, B: SpectralVectorField
    ) -> SpectralScalarField:
        """
        Zero-mean p solving -Δp = div(u . grad u - B . grad B).

        Diagnostic only; the dynamics eliminate p through the Leray projection.
        """
        forcing = self.advect(u, u) - self.advect(B, B)
        k = self._k
        k2 = np.sum(k * k, axis=0)
        safe = np.where(k2 > 0, k2, 1.0)
        p_hat = np.where(k2 > 0, 1j * np.sum(k * forcing.coeffs, axis=0) / safe, 0)
        return SpectralScalarField(grid=self.grid, coeffs=p_hat)

    # Identities

    def hall_identity_residuals(self, B: SpectralVectorField) -> HallResiduals:
        """
        Residuals of the three exact identities behind the Hall term.

        orthogonality:    |∫ curl((curl B) x B) . B|
        derivative_shift: max_i |∫ d_i curl((curl B) x B) . d_i B
                                 - ∫ ((curl B) x d_i B) . d_i curl B|
        vector_identity:  ||B x curl B - ½ grad(B . B) + (B . grad) B||_{L^2}
        """
        hall = self.hall_term(B)
        orthogonality = abs(inner(hall, B))

        J = curl(B)
        J_phys = self.physical(J)
        grad_B = self.physical_gradient(B)
        grad_J = self.physical_gradient(J)
        k = self._k
        shift = 0.0
        for i in range(self.grid.ndim):
            d_hall = hall.with_coeffs(1j * k[i] * hall.coeffs)
            d_B = B.with_coeffs(1j * k[i] * B.coeffs)
            lhs = inner(d_hall, d_B)
            integrand = np.sum(np.cross(J_phys, grad_B[:, i], axis=0) * grad_J[:, i], axis=0)
            rhs = self.grid.volume * float(np.mean(integrand))
            shift = max(shift, abs(lhs - rhs))

        B_phys = self.physical(B)
        lorentz = self.cross_physical(B_phys, J_phys)
        pressure = self.dot(B, B)
        residual = lorentz - 0.5 * gradient(pressure) + self.transport(B_phys, grad_B)
        identity = l2_norm(residual)

        return HallResiduals(orthogonality, shift, identity, field_scale(B))

    def hall_difference_residuals(
        self, B_n: SpectralVectorField, B_m: SpectralVectorField
    ) -> tuple[float, float]:
        """
        Identities used when comparing two Friedrichs approximations.

        Returns (|∫ curl((curl W) x B_n) . W|, ||curl((curl B_m) x W) - (W . grad) curl B_m
        + (curl B_m . grad) W||_{L^2}) with W = B_n - B_m.
        """
        W = B_n - B_m
        first = abs(inner(curl(self.cross(curl(W), B_n)), W))
        J_m = curl(B_m)
        expansion = curl(self.cross(J_m, W)) - self.advect(W, J_m) + self.advect(J_m, W)
        return first, l2_norm(expansion)

    def hall_alignment_residual(self, B: SpectralVectorField, shell_mask: np.ndarray) -> float:
        """max |(B x Δ_l curl B) . Δ_l curl B| over the grid, zero pointwise."""
        J = curl(B)
        J_l = self.physical(J.with_coeffs(np.where(shell_mask, J.coeffs, 0)))
        integrand = np.sum(np.cross(self.physical(B), J_l, axis=0) * J_l, axis=0)
        return float(np.max(np.abs(integrand)))

    def transport_neutrality(self, u: SpectralVectorField, f: SpectralVectorField) -> float:
        """|∫ (u . grad f) . f|, zero for solenoidal u."""
        return abs(inner(self.advect(u, f), f))

    def cross_term_cancellation(self, u: SpectralVectorField, B: SpectralVectorField) -> float:
        """|∫ (B . grad B) . u + ∫ (B . grad u) . B|."""
        return abs(inner(self.advect(B, B), u) + inner(self.advect(B, u), B))

