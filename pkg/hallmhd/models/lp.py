from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from hallmhd.models.fields import SpectralScalarField, SpectralVectorField

SpectralField = SpectralVectorField | SpectralScalarField


class LPDecomposition(BaseModel):
    """
    Dyadic blocks Δ_l f for l = -1 .. l_max of a field.

    Blocks are sharp shells, so they are disjoint index sets and their sum is
    the source field coefficient for coefficient.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source: SpectralField
    blocks: dict[int, SpectralField]

    @property
    def shells(self) -> list[int]:
        return sorted(self.blocks)

    def block(self, l: int) -> SpectralField:
        """Δ_l f; zero outside the stored range (Δ_l = 0 for l <= -2)."""
        if l in self.blocks:
            return self.blocks[l]
        return self.source.with_coeffs(np.zeros_like(self.source.coeffs))

    def partial_sum(self, j: int) -> SpectralField:
        """S_j f = sum of Δ_k f for -1 <= k <= j - 1; the empty sum for j <= -1."""
        coeffs = np.zeros_like(self.source.coeffs)
        for l in self.shells:
            if l <= j - 1:
                coeffs += self.blocks[l].coeffs
        return self.source.with_coeffs(coeffs)

    def neighborhood(self, k: int) -> SpectralField:
        """Δ_{k-1} + Δ_k + Δ_{k+1}."""
        coeffs = np.zeros_like(self.source.coeffs)
        for l in (k - 1, k, k + 1):
            if l in self.blocks:
                coeffs += self.blocks[l].coeffs
        return self.source.with_coeffs(coeffs)

    def reconstruct(self) -> SpectralField:
        return self.partial_sum(max(self.shells) + 1)


class BesovNorm(BaseModel):
    model_config = ConfigDict(frozen=True)

    s: float
    p: Literal[2] = 2
    q: Literal[2] = 2
    value: float = Field(ge=0)


class BernsteinRatio(BaseModel):
    """||Λ^{2α} f|| / ||f|| / 2^{2αl} for a shell-supported f, with its sharp-shell bounds."""

    model_config = ConfigDict(frozen=True)

    shell: int
    alpha: float
    ratio: float
    lower: float = 1.0
    upper: float


class ShellSpectrum(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dyadic: dict[int, float]
    wavenumbers: np.ndarray
    energy: np.ndarray
