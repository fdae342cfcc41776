"""
Littlewood-Paley calculus on the periodic lattice with sharp dyadic shells.

Block l >= 0 keeps 2^l <= |k| < 2^(l+1), block -1 keeps only k = 0. Norms are
the p = q = 2 ones; the Besov weight of block l is 2^(s l) with l = -1 taken
literally.
"""

import math
from typing import NamedTuple

import numpy as np

from hallmhd.core.operators import OperatorWorkspace
from hallmhd.core.spectral import NORM, inverse, l2_norm, multiplier_norm, restrict
from hallmhd.errors import InequalityViolation, ParameterError, PreconditionError
from hallmhd.models.fields import FrequencyFilter, SpectralScalarField, SpectralVectorField
from hallmhd.models.grid import Grid
from hallmhd.models.lp import (
    BernsteinRatio,
    BesovNorm,
    LPDecomposition,
    ShellSpectrum,
    SpectralField,
)

# slack for inequalities that are exact in real arithmetic
ROUNDOFF = 1e-12

# search lattice refinement and Newton budget of gradient_sup
SEARCH_OVERSAMPLING = 2
NEWTON_CANDIDATES = 8
NEWTON_ITERATIONS = 30
SUP_CUTOFF = 1e-15


class Paraproduct(NamedTuple):
    low_high: SpectralScalarField
    high_low: SpectralScalarField
    remainder: SpectralScalarField
    product: SpectralScalarField

    def residual(self) -> float:
        """||T_f g + T_g f + R(f, g) - f g||_{L^2}."""
        return l2_norm(self.low_high + self.high_low + self.remainder - self.product)


class CommutatorSplit(NamedTuple):
    low_high: SpectralVectorField
    high_low: SpectralVectorField
    high_high: SpectralVectorField

    def total(self) -> SpectralVectorField:
        return self.low_high + self.high_low + self.high_high


def max_shell(points: int) -> int:
    """l_max = ceil(log2(N sqrt(3) / 2)); shells beyond it are empty on every lattice."""
    return math.ceil(math.log2(points * math.sqrt(3) / 2))


def shell_range(grid: Grid) -> range:
    return range(-1, max_shell(grid.points_per_axis) + 1)


def shell_mask(grid: Grid, l: int) -> np.ndarray:
    return FrequencyFilter.dyadic_shell(l).mask(grid)


def decompose(f: SpectralField) -> LPDecomposition:
    blocks = {l: restrict(f, shell_mask(f.grid, l)) for l in shell_range(f.grid)}
    return LPDecomposition(source=f, blocks=blocks)


def besov_norm(f: SpectralField, s: float) -> BesovNorm:
    total = 0.0
    for l in shell_range(f.grid):
        total += 2.0 ** (2 * s * l) * l2_norm(restrict(f, shell_mask(f.grid, l))) ** 2
    return BesovNorm(s=s, value=math.sqrt(total))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """||f||_{H^s} with the multiplier (1 + |k|^2)^(s/2)."""
    return multiplier_norm(f, sobolev_symbol(f.grid, s))


def sobolev_symbol(grid: Grid, s: float) -> np.ndarray:
    return (1.0 + grid.wavenumber_squared()) ** s


def besov_sobolev_envelope(grid: Grid, s: float) -> tuple[float, float]:
    """
    Bounds c1 <= ||f||_{H^s} / ||f||_{B^s_{2,2}} <= c2 valid for every field on the grid.

    Obtained by brute force over the lattice: on shell l the weight ratio is
    (1 + |k|^2)^s / 2^(2 s l), and the norm ratio is bracketed by the square
    roots of its extremes.
    """
    k2 = grid.wavenumber_squared()
    lower, upper = math.inf, 0.0
    for l in shell_range(grid):
        mask = shell_mask(grid, l)
        if not mask.any():
            continue
        weights = (1.0 + k2[mask]) ** s / 2.0 ** (2 * s * l)
        lower = min(lower, float(weights.min()))
        upper = max(upper, float(weights.max()))
    return math.sqrt(lower), math.sqrt(upper)


def bernstein_ratio(f_shell: SpectralField, l: int, alpha: float) -> float:
    if l < 0:
        raise PreconditionError(f"Bernstein check needs a shell l >= 0, got {l}")
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    mask = shell_mask(f_shell.grid, l)
    if np.any(np.where(mask, 0, f_shell.coeffs)):
        raise PreconditionError(f"Field has spectral support outside shell {l}")
    norm = l2_norm(f_shell)
    if norm == 0.0:
        raise PreconditionError("Bernstein ratio is undefined for the zero field")

    k2 = f_shell.grid.wavenumber_squared()
    return multiplier_norm(f_shell, k2 ** (2 * alpha)) / norm / 2.0 ** (2 * alpha * l)


def bernstein_check(f_shell: SpectralField, l: int, alpha: float) -> BernsteinRatio:
    """
    Sharp-shell Bernstein ratio ||Λ^{2α} f|| / (2^{2αl} ||f||), which lies in [1, 2^{2α}].

    Raises:
        PreconditionError: if l < 0, f is zero, or f has support outside shell l
        InequalityViolation: if the ratio leaves [1, 2^{2α}] beyond round-off
    """
    ratio = bernstein_ratio(f_shell, l, alpha)
    upper = 2.0 ** (2 * alpha)
    if not (1.0 - ROUNDOFF <= ratio <= upper * (1.0 + ROUNDOFF)):
        raise InequalityViolation(f"Bernstein ratio {ratio} outside [1, {upper}] on shell {l}")
    return BernsteinRatio(shell=l, alpha=alpha, ratio=ratio, upper=upper)


def dissipation_lower_bound(B: SpectralVectorField, l: int, alpha: float) -> tuple[float, float]:
    """
    Returns (<Δ_l B, (-Δ)^α Δ_l B>, 2^{2αl} ||Δ_l B||^2).

    For sharp shells with l >= 0 the first dominates the second (C_0 = 1). On
    block -1 the dissipation is exactly zero and no lower bound is asserted.
    """
    block = restrict(B, shell_mask(B.grid, l))
    k2 = B.grid.wavenumber_squared()
    dissipation = multiplier_norm(block, k2**alpha) ** 2
    return dissipation, 2.0 ** (2 * alpha * l) * l2_norm(block) ** 2


def interpolation_check(f: SpectralField, sigma_prime: float, sigma: float) -> float:
    """
    ||f||_{H^σ'} / (||f||_{L^2}^{1-σ'/σ} ||f||_{H^σ}^{σ'/σ}), at most 1.

    Hölder's inequality in frequency gives the constant 1 for multiplier norms;
    the bound is attained by any single mode. The zero field returns 1.

    Raises:
        ParameterError: unless 0 < σ' < σ
        InequalityViolation: if the ratio exceeds 1 beyond round-off
    """
    if not 0 < sigma_prime < sigma:
        raise ParameterError(f"Need 0 < sigma' < sigma, got sigma'={sigma_prime}, sigma={sigma}")
    theta = sigma_prime / sigma
    low = l2_norm(f)
    if low == 0.0:
        return 1.0
    ratio = sobolev_norm(f, sigma_prime) / (low ** (1 - theta) * sobolev_norm(f, sigma) ** theta)
    if ratio > 1.0 + ROUNDOFF:
        raise InequalityViolation(f"Interpolation ratio {ratio} exceeds 1")
    return ratio


def gradient_sup(f: SpectralVectorField) -> float:
    """
    sup over the torus of the pointwise Frobenius norm |grad f|.

    The gradient is a trigonometric polynomial, so its square is sampled on a
    lattice SEARCH_OVERSAMPLING times finer than the grid and the largest
    samples are polished by Newton steps evaluated from the coefficients. The
    result does not depend on N once the field is resolved. Nyquist modes and
    coefficients below SUP_CUTOFF of the largest one are left out.
    """
    grid = f.grid
    scale = f.max_coefficient()
    if scale == 0.0:
        return 0.0
    k = grid.wavenumbers()[: grid.ndim]
    active = np.any(np.abs(f.coeffs) > SUP_CUTOFF * scale, axis=0)
    active &= np.all(np.abs(k) < grid.points_per_axis / 2, axis=0)
    modes = k[:, active].T.astype(np.int64)
    if not len(modes):
        return 0.0
    # rows are (component, derivative axis) pairs of i k_j f_c
    gradient = 1j * modes.T[np.newaxis, :, :] * f.coeffs[:, active][:, np.newaxis, :]
    gradient = gradient.reshape(-1, len(modes))

    points = SEARCH_OVERSAMPLING * grid.points_per_axis
    index = tuple((modes % points).T)
    squared = np.zeros((points,) * grid.ndim)
    for row in gradient:
        padded = np.zeros((points,) * grid.ndim, dtype=np.complex128)
        padded[index] = row
        squared += np.fft.ifftn(padded, norm=NORM).real ** 2

    flat = squared.ravel()
    count = min(NEWTON_CANDIDATES, flat.size)
    best = float(flat.max())
    for start in np.argpartition(flat, -count)[-count:]:
        x = np.array(np.unravel_index(start, squared.shape), dtype=float) * (2 * math.pi / points)
        best = max(best, _polish_maximum(gradient, modes.astype(float), x))
    return math.sqrt(best)


def _gradient_square(gradient: np.ndarray, modes: np.ndarray, x: np.ndarray):
    """|grad f|^2 at x with its first and second derivatives in x."""
    phase = np.exp(1j * (modes @ x))
    values = (gradient @ phase).real
    first = (gradient @ (1j * modes * phase[:, np.newaxis])).real
    second = -np.einsum("rm,mp,mq->rpq", gradient * phase, modes, modes).real
    g = float(values @ values)
    slope = 2 * values @ first
    hessian = 2 * (first.T @ first + np.einsum("r,rpq->pq", values, second))
    return g, slope, hessian


def _polish_maximum(gradient: np.ndarray, modes: np.ndarray, x: np.ndarray) -> float:
    g, slope, hessian = _gradient_square(gradient, modes, x)
    for _ in range(NEWTON_ITERATIONS):
        # minimum-norm step, so flat directions of |grad f|^2 stay put
        step = np.linalg.lstsq(hessian, -slope, rcond=1e-10)[0]
        # only ascent directions; halve until |grad f|^2 increases
        if step @ slope <= 0:
            break
        for _ in range(30):
            trial = _gradient_square(gradient, modes, x + step)
            if trial[0] >= g:
                break
            step = step / 2
        else:
            break
        x = x + step
        g, slope, hessian = trial
        if np.max(np.abs(step)) < 1e-13:
            break
    return g


def embedding_ratio(f: SpectralVectorField, sigma: float) -> float:
    """||grad f||_{L^∞} / ||f||_{H^σ}, with the supremum from gradient_sup."""
    norm = sobolev_norm(f, sigma)
    if norm == 0.0:
        return 0.0
    return gradient_sup(f) / norm


def _blocks_physical(f: SpectralField) -> dict[int, np.ndarray]:
    return {l: inverse(block.coeffs, f.grid) for l, block in decompose(f).blocks.items()}


def _contract(a: np.ndarray, b: np.ndarray, vector: bool) -> np.ndarray:
    return np.sum(a * b, axis=0) if vector else a * b


def paraproduct_split(
    f: SpectralField, g: SpectralField, workspace: OperatorWorkspace | None = None
) -> Paraproduct:
    """
    Bony decomposition f g = T_f g + T_g f + R(f, g).

    T_f g = Σ_k S_{k-1} f Δ_k g and R(f, g) = Σ_k Δ_k f Δ̃_k g with
    Δ̃_k = Δ_{k-1} + Δ_k + Δ_{k+1}. Vector arguments are contracted, so the
    split is that of the dot product. Every part is dealiased, as is the
    reference product.
    """
    f.check_grid(g)
    vector = isinstance(f, SpectralVectorField)
    if vector != isinstance(g, SpectralVectorField):
        raise ParameterError("paraproduct_split needs two scalars or two vectors")
    workspace = workspace or OperatorWorkspace(f.grid)

    f_blocks, g_blocks = _blocks_physical(f), _blocks_physical(g)
    shells = sorted(f_blocks)
    zero = np.zeros(f.grid.shape)
    low_high, high_low, remainder = zero.copy(), zero.copy(), zero.copy()
    low_f, low_g = np.zeros_like(f_blocks[-1]), np.zeros_like(g_blocks[-1])
    for k in shells:
        # low_f holds S_{k-1} f: blocks strictly below k - 1
        if k - 2 in f_blocks:
            low_f = low_f + f_blocks[k - 2]
            low_g = low_g + g_blocks[k - 2]
        low_high += _contract(low_f, g_blocks[k], vector)
        high_low += _contract(low_g, f_blocks[k], vector)
        neighborhood = sum(g_blocks[j] for j in (k - 1, k, k + 1) if j in g_blocks)
        remainder += _contract(f_blocks[k], neighborhood, vector)

    product = _contract(inverse(f.coeffs, f.grid), inverse(g.coeffs, g.grid), vector)

    def dealiased(samples: np.ndarray) -> SpectralScalarField:
        return SpectralScalarField(grid=f.grid, coeffs=workspace.to_dealiased(samples))

    return Paraproduct(
        dealiased(low_high), dealiased(high_low), dealiased(remainder), dealiased(product)
    )


def commutator_block(
    l: int,
    u: SpectralVectorField,
    f: SpectralVectorField,
    workspace: OperatorWorkspace | None = None,
) -> SpectralVectorField:
    """[Δ_l, u . grad] f = Δ_l(u . grad f) - u . grad Δ_l f."""
    workspace = workspace or OperatorWorkspace(u.grid)
    mask = shell_mask(u.grid, l)
    return restrict(workspace.advect(u, f), mask) - workspace.advect(u, restrict(f, mask))


def commutator_split(
    l: int,
    u: SpectralVectorField,
    f: SpectralVectorField,
    workspace: OperatorWorkspace | None = None,
) -> CommutatorSplit:
    """
    Paraproduct families of [Δ_l, u . grad] f.

    low_high  = Σ_k [Δ_l, S_{k-1}u . grad] Δ_k f
    high_low  = Σ_k [Δ_l, Δ_k u . grad] S_{k-1} f
    high_high = Σ_k [Δ_l, Δ_k u . grad] Δ̃_k f
    Their sum is the commutator because the three index sets partition all
    pairs of blocks.
    """
    workspace = workspace or OperatorWorkspace(u.grid)
    lp_u, lp_f = decompose(u), decompose(f)

    def family(pairs) -> SpectralVectorField:
        total = SpectralVectorField.zeros(u.grid)
        for a, b in pairs:
            if a.is_zero() or b.is_zero():
                continue
            total = total + commutator_block(l, a, b, workspace)
        return total

    shells = lp_u.shells
    return CommutatorSplit(
        low_high=family((lp_u.partial_sum(k - 1), lp_f.block(k)) for k in shells),
        high_low=family((lp_u.block(k), lp_f.partial_sum(k - 1)) for k in shells),
        high_high=family((lp_u.block(k), lp_f.neighborhood(k)) for k in shells),
    )


def shell_spectrum(f: SpectralVectorField) -> ShellSpectrum:
    """Energy ½||Δ_l f||^2 per dyadic shell and per unit-width integer shell."""
    grid = f.grid
    density = 0.5 * grid.volume * np.sum(np.abs(f.coeffs) ** 2, axis=0)
    dyadic = {l: float(density[shell_mask(grid, l)].sum()) for l in shell_range(grid)}
    bins = np.floor(grid.wavenumber_magnitude() + 0.5).astype(int)
    energy = np.bincount(bins.ravel(), weights=density.ravel())
    return ShellSpectrum(dyadic=dyadic, wavenumbers=np.arange(energy.size), energy=energy)
