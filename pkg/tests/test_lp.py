"""
Tests for the Littlewood-Paley calculus: blocks, Besov and Sobolev norms,
Bernstein ratios, Bony paraproducts, commutators and interpolation.
"""

import math

import numpy as np
import pytest

from conftest import field_from_samples
from hallmhd.core import lp
from hallmhd.core.operators import OperatorWorkspace
from hallmhd.core.spectral import inverse, l2_norm, restrict, to_physical
from hallmhd.errors import InequalityViolation, ParameterError, PreconditionError
from hallmhd.models.fields import SpectralScalarField, SpectralVectorField
from hallmhd.models.grid import Grid


def scalar_part(f: SpectralVectorField, component: int = 0) -> SpectralScalarField:
    return SpectralScalarField(grid=f.grid, coeffs=np.array(f.coeffs[component]))


def shell_supported(grid, make_field, seed: int, l: int) -> SpectralVectorField:
    return restrict(make_field(grid, seed=seed, band=21), lp.shell_mask(grid, l))


class TestDecompose:
    def test_mode_two_sits_in_shell_one(self, grid):
        x, _, _ = grid.coordinates()
        f = field_from_samples(grid, (0.0, 0.0, np.sin(2 * x)))
        blocks = lp.decompose(f).blocks
        norms = {l: l2_norm(block) for l, block in blocks.items()}
        assert norms[1] == pytest.approx(l2_norm(f), rel=1e-14)
        assert all(value < 1e-13 for l, value in norms.items() if l != 1)

    def test_constant_sits_in_shell_minus_one(self, grid):
        f = field_from_samples(grid, (1.0, 0.0, 0.0))
        blocks = lp.decompose(f).blocks
        assert l2_norm(blocks[-1]) == pytest.approx(l2_norm(f), rel=1e-14)
        assert all(l2_norm(block) < 1e-13 for l, block in blocks.items() if l != -1)

    @pytest.mark.parametrize("seed", range(3))
    def test_reconstruction_is_exact(self, grid, make_field, seed):
        f = make_field(grid, seed=seed, band=21)
        assert np.array_equal(lp.decompose(f).reconstruct().coeffs, f.coeffs)

    def test_shell_range_covers_the_lattice(self, grid):
        assert lp.max_shell(64) == 6
        assert list(lp.shell_range(grid)) == list(range(-1, 7))

    def test_partial_sums_and_neighborhoods(self, grid, make_field):
        decomposition = lp.decompose(make_field(grid, seed=5, band=21))
        assert decomposition.partial_sum(-1).is_zero()
        assert np.array_equal(decomposition.partial_sum(0).coeffs, decomposition.block(-1).coeffs)
        assert decomposition.block(-5).is_zero()
        neighborhood = decomposition.neighborhood(2)
        expected = decomposition.block(1).coeffs + decomposition.block(2).coeffs + decomposition.block(3).coeffs
        assert np.array_equal(neighborhood.coeffs, expected)


class TestNorms:
    def test_besov_norm_of_single_shell(self, grid):
        """|k| = 4 lies in shell 2, so the B^s norm is 2^(2s) ||f||."""
        x, _, _ = grid.coordinates()
        f = field_from_samples(grid, (0.0, 0.0, np.sin(4 * x)))
        s = 1.5
        assert lp.besov_norm(f, s).value == pytest.approx(2 ** (2 * s) * l2_norm(f), rel=1e-12)

    def test_besov_norm_of_constant_uses_literal_weight(self, grid):
        f = field_from_samples(grid, (1.0, 0.0, 0.0))
        s = 2.0
        assert lp.besov_norm(f, s).value == pytest.approx(2**-s * l2_norm(f), rel=1e-12)

    def test_sobolev_norm_of_unit_mode(self, grid):
        x, _, _ = grid.coordinates()
        f = field_from_samples(grid, (0.0, 0.0, np.sin(x)))
        assert lp.sobolev_norm(f, 1.0) == pytest.approx(math.sqrt(2) * l2_norm(f), rel=1e-12)
        assert lp.sobolev_norm(f, 0.0) == pytest.approx(l2_norm(f), rel=1e-14)

    def test_envelope_brackets_random_fields(self, grid, make_field):
        s = 2.5
        c1, c2 = lp.besov_sobolev_envelope(grid, s)
        assert 0 < c1 < c2
        for seed in range(20):
            f = make_field(grid, seed=seed, band=21)
            ratio = lp.sobolev_norm(f, s) / lp.besov_norm(f, s).value
            assert c1 * (1 - 1e-12) <= ratio <= c2 * (1 + 1e-12)

    def test_envelope_is_attained_on_single_modes(self, grid):
        """The mean mode realizes the ratio (1 + 0)^s / 2^(-2s) on shell -1."""
        s = 1.0
        c1, c2 = lp.besov_sobolev_envelope(grid, s)
        f = field_from_samples(grid, (1.0, 0.0, 0.0))
        ratio = lp.sobolev_norm(f, s) / lp.besov_norm(f, s).value
        assert c1 <= ratio <= c2 * (1 + 1e-12)
        assert ratio == pytest.approx(2.0**s, rel=1e-12)


class TestBernstein:
    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_lower_edge(self, grid, l):
        x, _, _ = grid.coordinates()
        f = restrict(field_from_samples(grid, (0.0, 0.0, np.sin(2**l * x))), lp.shell_mask(grid, l))
        result = lp.bernstein_check(f, l, 0.75)
        assert result.ratio == pytest.approx(1.0, abs=1e-12)
        assert result.upper == pytest.approx(2**1.5)

    def test_upper_edge(self, grid):
        x, _, _ = grid.coordinates()
        f = restrict(field_from_samples(grid, (0.0, 0.0, np.sin(7 * x))), lp.shell_mask(grid, 2))
        alpha = 1.0
        result = lp.bernstein_check(f, 2, alpha)
        assert result.ratio == pytest.approx((7 / 4) ** (2 * alpha), rel=1e-12)
        assert result.ratio < 2 ** (2 * alpha)

    @pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5])
    def test_hundred_random_shell_fields(self, grid, make_field, alpha):
        for seed in range(100):
            l = seed % 4 + 1
            ratio = lp.bernstein_check(shell_supported(grid, make_field, seed, l), l, alpha).ratio
            assert 1.0 - 1e-12 <= ratio <= 2 ** (2 * alpha) * (1 + 1e-12)

    def test_shell_minus_one_is_rejected(self, grid):
        f = field_from_samples(grid, (1.0, 0.0, 0.0))
        with pytest.raises(PreconditionError, match="l >= 0"):
            lp.bernstein_check(f, -1, 1.0)

    def test_support_outside_shell_is_rejected(self, grid, make_field):
        with pytest.raises(PreconditionError, match="outside shell"):
            lp.bernstein_check(make_field(grid, seed=0), 2, 1.0)

    def test_zero_field_is_rejected(self, grid):
        with pytest.raises(PreconditionError, match="zero field"):
            lp.bernstein_check(SpectralVectorField.zeros(grid), 2, 1.0)

    def test_alpha_must_be_positive(self, grid, make_field):
        with pytest.raises(ParameterError):
            lp.bernstein_check(shell_supported(grid, make_field, 0, 2), 2, 0.0)


class TestDissipationLowerBound:
    @pytest.mark.parametrize("alpha", [0.6, 1.0])
    def test_dissipation_dominates_on_every_shell(self, grid, make_field, alpha):
        B = make_field(grid, seed=11, band=21)
        for l in range(0, 5):
            value, bound = lp.dissipation_lower_bound(B, l, alpha)
            assert value >= bound * (1 - 1e-12)

    def test_mean_shell_does_not_dissipate(self, grid):
        B = field_from_samples(grid, (1.0, 0.0, 0.0))
        value, _ = lp.dissipation_lower_bound(B, -1, 1.0)
        assert value == 0.0


class TestParaproduct:
    @pytest.mark.parametrize("seed", range(5))
    def test_completeness_for_scalars(self, grid, make_field, seed):
        f = scalar_part(make_field(grid, seed=seed))
        g = scalar_part(make_field(grid, seed=seed + 20), component=1)
        split = lp.paraproduct_split(f, g)
        assert split.residual() <= 1e-12 * l2_norm(split.product)

    @pytest.mark.parametrize("seed", range(3))
    def test_completeness_for_vectors(self, grid, make_field, seed):
        split = lp.paraproduct_split(make_field(grid, seed=seed), make_field(grid, seed=seed + 1))
        assert split.residual() <= 1e-12 * l2_norm(split.product)

    def test_constant_factor(self, grid, make_field):
        """T_c g keeps the blocks of g from shell 1 upward; the parts still sum to c g."""
        c = 2.0
        f = SpectralScalarField(grid=grid, coeffs=np.where(lp.shell_mask(grid, -1), c + 0j, 0j))
        g = scalar_part(make_field(grid, seed=2))
        split = lp.paraproduct_split(f, g)
        decomposition = lp.decompose(g)
        high = g - decomposition.block(-1) - decomposition.block(0)
        assert np.allclose(split.low_high.coeffs, c * high.coeffs, atol=1e-14)
        assert l2_norm(split.low_high + split.high_low + split.remainder - g * c) <= 1e-12 * l2_norm(g * c)

    def test_separated_shells_have_no_remainder(self, grid):
        x, y, _ = grid.coordinates()
        f = SpectralScalarField(
            grid=grid, coeffs=field_from_samples(grid, (np.cos(x), 0, 0), divergence_free=False).coeffs[0].copy()
        )
        g = SpectralScalarField(
            grid=grid, coeffs=field_from_samples(grid, (np.sin(16 * y), 0, 0)).coeffs[0].copy()
        )
        split = lp.paraproduct_split(f, g)
        scale = l2_norm(split.product)
        assert l2_norm(split.remainder) <= 1e-13 * scale
        assert l2_norm(split.high_low) <= 1e-13 * scale
        assert l2_norm(split.low_high - split.product) <= 1e-13 * scale

    def test_mixed_arguments_are_rejected(self, grid, make_field):
        f = make_field(grid, seed=0)
        with pytest.raises(ParameterError, match="two scalars or two vectors"):
            lp.paraproduct_split(f, scalar_part(f))


class TestCommutator:
    def test_constant_velocity_commutes(self, grid, make_field):
        u = field_from_samples(grid, (0.5, -1.0, 0.0))
        f = make_field(grid, seed=3, band=21)
        ws = OperatorWorkspace(grid)
        scale = l2_norm(ws.advect(u, f))
        for l in range(0, 5):
            assert l2_norm(lp.commutator_block(l, u, f, ws)) <= 1e-13 * scale

    def test_single_modes_against_direct_evaluation(self, grid):
        """
        u = (sin 3y, 0, 0) and f = (0, 0, sin 3x): f lies in shell 1 while
        u . grad f = 3 sin 3y cos 3x lies in shell 2, so the shell-1
        commutator is -u . grad f.
        """
        x, y, _ = grid.coordinates()
        u = field_from_samples(grid, (np.sin(3 * y), 0.0, 0.0))
        f = field_from_samples(grid, (0.0, 0.0, np.sin(3 * x)))
        commutator = to_physical(lp.commutator_block(1, u, f))
        expected = np.stack([np.zeros_like(x), np.zeros_like(x), -3 * np.sin(3 * y) * np.cos(3 * x)])
        assert np.max(np.abs(commutator - expected)) <= 1e-13 * 3

    @pytest.mark.parametrize("seed", range(3))
    def test_families_sum_to_the_commutator(self, grid, make_field, seed):
        ws = OperatorWorkspace(grid)
        u, f = make_field(grid, seed=seed), make_field(grid, seed=seed + 30)
        scale = l2_norm(ws.advect(u, f))
        for l in range(0, 4):
            split = lp.commutator_split(l, u, f, ws)
            direct = lp.commutator_block(l, u, f, ws)
            assert l2_norm(split.total() - direct) <= 1e-12 * scale


class TestInterpolation:
    @pytest.mark.parametrize("mode", [0, 1, 5])
    def test_single_mode_is_tight(self, grid, mode):
        x, _, _ = grid.coordinates()
        samples = np.ones_like(x) if mode == 0 else np.sin(mode * x)
        f = field_from_samples(grid, (0.0, 0.0, samples))
        assert lp.interpolation_check(f, 1.5, 2.5) == pytest.approx(1.0, abs=1e-12)

    def test_separated_modes_are_strict(self, grid):
        x, _, _ = grid.coordinates()
        f = field_from_samples(grid, (0.0, 0.0, np.sin(x) + np.sin(16 * x)))
        assert lp.interpolation_check(f, 1.5, 2.5) < 1.0

    def test_hundred_random_fields(self, grid, make_field):
        for seed in range(100):
            assert lp.interpolation_check(make_field(grid, seed=seed, band=21), 1.5, 2.5) <= 1.0 + 1e-12

    def test_zero_field(self, grid):
        assert lp.interpolation_check(SpectralVectorField.zeros(grid), 1.0, 2.0) == 1.0

    @pytest.mark.parametrize("sigma_prime, sigma", [(2.5, 2.5), (3.0, 2.5), (0.0, 1.0)])
    def test_order_of_indices(self, grid, sigma_prime, sigma):
        with pytest.raises(ParameterError, match="sigma"):
            lp.interpolation_check(SpectralVectorField.zeros(grid), sigma_prime, sigma)

    def test_violation_type(self):
        assert issubclass(InequalityViolation, ArithmeticError)


class TestEmbedding:
    @staticmethod
    def shifted_modes(grid):
        x, y, _ = grid.coordinates()
        return field_from_samples(grid, (0.0, 0.0, np.sin(x + 0.3) + 0.5 * np.cos(2 * y + 0.7)))

    @staticmethod
    def coupled_modes(grid):
        x, y, _ = grid.coordinates()
        samples = np.sin(x + 0.3) * np.cos(y - 1.1) + 0.4 * np.cos(3 * x + 2 * y + 0.2)
        return field_from_samples(grid, (0.0, 0.0, samples))

    def test_zero_field(self, grid):
        assert lp.embedding_ratio(SpectralVectorField.zeros(grid), 2.5) == 0.0
        assert lp.gradient_sup(SpectralVectorField.zeros(grid)) == 0.0

    @pytest.mark.parametrize("points", [16, 32, 64])
    def test_supremum_between_grid_points(self, points):
        """|grad f|^2 = cos^2(x + 0.3) + sin^2(2y + 0.7) peaks at 2 off every lattice."""
        f = self.shifted_modes(Grid.create(points))
        assert lp.gradient_sup(f) == pytest.approx(math.sqrt(2), rel=1e-12)

    @pytest.mark.parametrize("build", ["shifted_modes", "coupled_modes"])
    def test_stable_under_refinement(self, build):
        ratios = [lp.embedding_ratio(getattr(self, build)(Grid.create(n)), 2.5) for n in (16, 32, 64)]
        assert ratios[1] == pytest.approx(ratios[0], rel=1e-9)
        assert ratios[2] == pytest.approx(ratios[1], rel=1e-9)

    def test_dominates_the_grid_maximum(self, small_grid):
        f = self.coupled_modes(small_grid)
        k = small_grid.derivative_wavenumbers()
        gradient = inverse(1j * k[:, np.newaxis] * f.coeffs[np.newaxis], small_grid)
        on_grid = np.sqrt(np.max(np.sum(gradient**2, axis=(0, 1))))
        assert lp.gradient_sup(f) >= on_grid * (1 - 1e-14)

    def test_three_dimensional_field(self, grid_3d):
        _, _, z = grid_3d.coordinates()
        f = field_from_samples(grid_3d, (np.sin(z + 0.5), 0.0, 0.0))
        assert lp.gradient_sup(f) == pytest.approx(1.0, rel=1e-12)


class TestShellSpectrum:
    def test_energies_add_up(self, grid, make_field):
        f = make_field(grid, seed=6, band=21, amplitude=2.0)
        spectrum = lp.shell_spectrum(f)
        energy = 0.5 * l2_norm(f) ** 2
        assert sum(spectrum.dyadic.values()) == pytest.approx(energy, rel=1e-12)
        assert spectrum.energy.sum() == pytest.approx(energy, rel=1e-12)
        assert spectrum.wavenumbers[0] == 0

    def test_single_mode_lands_in_its_bin(self, grid):
        x, _, _ = grid.coordinates()
        f = field_from_samples(grid, (0.0, 0.0, np.sin(3 * x)))
        spectrum = lp.shell_spectrum(f)
        assert spectrum.energy[3] == pytest.approx(0.5 * l2_norm(f) ** 2, rel=1e-12)
        assert spectrum.dyadic[1] == pytest.approx(0.5 * l2_norm(f) ** 2, rel=1e-12)
