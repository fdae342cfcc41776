"""
The Friedrichs-filtered Hall-MHD system and its time integrator.

    du/dt = J_n P(B . grad B - u . grad u)
    dB/dt = J_n P(B . grad u - u . grad B - h curl((curl B) x B)) - (-Δ)^α B

The fractional diffusion is diagonal in Fourier space and is integrated
exactly by the factor exp(-|k|^{2α} dt) inside a classical four-stage
Runge-Kutta scheme (Lawson form). The two dissipation integrals of the ledger
ride along as extra scalar unknowns of the same scheme.
"""

from collections.abc import Callable, Sequence
import logging
import math
from typing import Protocol

import numpy as np

from hallmhd.core.lp import sobolev_norm, sobolev_symbol
from hallmhd.core.operators import OperatorWorkspace
from hallmhd.core.spectral import inner, l2_norm, leray_project, max_abs_physical
from hallmhd.errors import DivergenceError, ParameterError
from hallmhd.models.fields import SpectralVectorField
from hallmhd.models.ledger import EnergyLedger, LedgerRow
from hallmhd.models.state import SimState

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.3
DEFAULT_DT_MAX = 0.01
DEFAULT_BLOWUP_CAP = 1e8


class LedgerSink(Protocol):
    """Receives ledger rows of a single run, in order."""

    def write(self, row: LedgerRow) -> None: ...


class HallMHDSystem:
    """
    Right-hand side, stepper and time-step control for one run.

    Owns an OperatorWorkspace, so an instance must stay on one thread.
    """

    def __init__(
        self,
        state: SimState,
        cfl: float = DEFAULT_CFL,
        dt_max: float = DEFAULT_DT_MAX,
        blowup_cap: float = DEFAULT_BLOWUP_CAP,
    ):
        if cfl <= 0 or dt_max <= 0:
            raise ParameterError("cfl and dt_max must be positive")
        self.grid = state.grid
        self.params = state.params
        self.cfl = cfl
        self.dt_max = dt_max
        self.blowup_cap = blowup_cap
        self.workspace = OperatorWorkspace(self.grid)

        k2 = self.grid.wavenumber_squared()
        self._ball = self.params.ball.mask(self.grid)
        self._dealias = self.workspace.dealias.mask(self.grid)
        self._decay_rate = k2**self.params.alpha
        self._hsigma = sobolev_symbol(self.grid, self.params.sigma)

    # Right-hand side

    def _project(self, f: SpectralVectorField) -> SpectralVectorField:
        projected = leray_project(f)
        return projected.with_coeffs(np.where(self._ball, projected.coeffs, 0))

    def rhs(self, state: SimState) -> tuple[SpectralVectorField, SpectralVectorField]:
        """Nonlinear tendencies (du/dt, dB/dt); the diffusion is left to the integrating factor."""
        state.check_invariants()
        return self._tendencies(state.u, state.B)

    def _tendencies(
        self, u: SpectralVectorField, B: SpectralVectorField
    ) -> tuple[SpectralVectorField, SpectralVectorField]:
        ws = self.workspace
        if self.params.freeze_velocity:
            du = dB = SpectralVectorField.zeros(self.grid)
        else:
            du = self._project(ws.advect(B, B) - ws.advect(u, u))
            dB = ws.stretch(B, u) - ws.advect(u, B)
        if self.params.hall_coefficient:
            dB = dB - self.params.hall_coefficient * ws.hall_term(B)
        return du, self._project(dB)

    def _dissipation_rates(self, B: SpectralVectorField) -> tuple[float, float]:
        """(||Λ^α B||^2, ||Λ^α B||^2_{H^σ})."""
        power = np.sum(np.abs(B.coeffs) ** 2, axis=0)
        volume = self.grid.volume
        return (
            float(volume * np.sum(self._decay_rate * power)),
            float(volume * np.sum(self._decay_rate * self._hsigma * power)),
        )

    # Time stepping

    def propagator(self, h: float) -> np.ndarray:
        return np.exp(-self._decay_rate * h)

    def step(self, state: SimState, dt: float) -> SimState:
        """
        One integrating-factor RK4 step followed by invariant restoration.

        Raises:
            DivergenceError: on non-finite coefficients or an H^σ norm above the blow-up cap
        """
        if dt < 0:
            raise ParameterError(f"dt must be nonnegative, got {dt}")
        if dt == 0:
            return state

        half, full = self.propagator(dt / 2), self.propagator(dt)
        u0, B0 = state.u.coeffs, state.B.coeffs

        def stage(u: np.ndarray, B: np.ndarray):
            u_field = state.u.with_coeffs(u)
            B_field = state.B.with_coeffs(B)
            du, dB = self._tendencies(u_field, B_field)
            return du.coeffs, dB.coeffs, np.array(self._dissipation_rates(B_field))

        du1, dB1, q1 = stage(u0, B0)
        du2, dB2, q2 = stage(u0 + dt / 2 * du1, half * (B0 + dt / 2 * dB1))
        du3, dB3, q3 = stage(u0 + dt / 2 * du2, half * B0 + dt / 2 * dB2)
        du4, dB4, q4 = stage(u0 + dt * du3, full * B0 + dt * half * dB3)

        u1 = u0 + dt / 6 * (du1 + 2 * du2 + 2 * du3 + du4)
        B1 = full * B0 + dt / 6 * (full * dB1 + 2 * half * (dB2 + dB3) + dB4)
        q = dt / 6 * (q1 + 2 * q2 + 2 * q3 + q4)

        if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(B1)) and np.all(np.isfinite(q))):
            raise DivergenceError(f"Non-finite coefficients at step {state.step + 1}", state=state)

        u_next = self._restore(state.u.with_coeffs(u1), "u", state.step)
        B_next = self._restore(state.B.with_coeffs(B1), "B", state.step)
        norm = math.hypot(sobolev_norm(u_next, self.params.sigma), sobolev_norm(B_next, self.params.sigma))
        if norm > self.blowup_cap:
            raise DivergenceError(
                f"H^sigma norm {norm:.3e} exceeded the blow-up cap {self.blowup_cap:.1e} "
                f"at t={state.t + dt:.6g}",
                state=state,
            )

        return state.replace(
            u=u_next,
            B=B_next,
            t=state.t + dt,
            step=state.step + 1,
            dissipation_integral=state.dissipation_integral + float(q[0]),
            hsigma_dissipation_integral=state.hsigma_dissipation_integral + float(q[1]),
        )

    def _restore(self, f: SpectralVectorField, name: str, step: int) -> SpectralVectorField:
        """Dealias, Leray project, then filter to the ball; the removed part is logged."""
        dealiased = np.where(self._dealias, f.coeffs, 0)
        projected = leray_project(f.with_coeffs(dealiased))
        restored = projected.with_coeffs(np.where(self._ball, projected.coeffs, 0))
        if logger.isEnabledFor(logging.DEBUG):
            scale = l2_norm(f)
            drift = l2_norm(f - restored) / scale if scale else 0.0
            logger.debug("step %d: %s restoration drift %.3e", step + 1, name, drift)
        return restored

    def select_dt(self, state: SimState) -> float:
        """
        c * min(h / max|u|, h^2 / (2 max|B|), h^{2α}), capped at dt_max.

        The h^2 term is the whistler constraint of the Hall term. Zero fields
        return dt_max.

        Doubling N halves the advective bound and quarters the Hall bound, but
        only while the CFL step sits below dt_max: on coarse grids the cap
        wins and the step stays at dt_max across refinements.
        """
        u_max = max_abs_physical(state.u)
        B_max = max_abs_physical(state.B)
        if u_max == 0.0 and B_max == 0.0:
            return self.dt_max
        h = self.grid.spacing
        bounds = [h ** (2 * self.params.alpha)]
        if u_max > 0:
            bounds.append(h / u_max)
        if B_max > 0:
            bounds.append(h**2 / (2 * B_max))
        return min(self.cfl * min(bounds), self.dt_max)

    # Diagnostics

    def ledger_row(self, state: SimState, dt: float, initial_energy: float) -> LedgerRow:
        energy_u = 0.5 * l2_norm(state.u) ** 2
        energy_b = 0.5 * l2_norm(state.B) ** 2
        dissipation, _ = self._dissipation_rates(state.B)
        hall_flux = inner(self.workspace.hall_term(state.B), state.B)
        balance = abs(energy_u + energy_b + state.dissipation_integral - initial_energy)
        return LedgerRow(
            t=state.t,
            step=state.step,
            dt=dt,
            energy_u=energy_u,
            energy_b=energy_b,
            dissipation=dissipation,
            hsigma_u=sobolev_norm(state.u, self.params.sigma),
            hsigma_b=sobolev_norm(state.B, self.params.sigma),
            div_u=state.u.divergence_residual(),
            div_b=state.B.divergence_residual(),
            hall_flux=hall_flux,
            dissipation_integral=state.dissipation_integral,
            hsigma_dissipation_integral=state.hsigma_dissipation_integral,
            balance_residual=balance,
        )

    def evolve(
        self,
        state0: SimState,
        horizon: float,
        sink: LedgerSink | None = None,
        dt: float | None = None,
        ledger_every: int = 1,
        stops: Sequence[float] = (),
        on_stop: Callable[[SimState], None] | None = None,
        snapshot_every: int = 0,
        on_snapshot: Callable[[SimState], None] | None = None,
    ) -> tuple[SimState, EnergyLedger]:
        """
        Advance state0 to t = horizon.

        Rows go to the ledger (and the sink) every ledger_every steps plus at
        the start and the end. Steps are shortened to land exactly on every
        time in stops, where on_stop is called. A fixed dt replaces select_dt.

        Raises:
            ParameterError: if horizon <= state0.t
            DivergenceError: carrying the partial ledger (flagged) and the last valid state
        """
        if horizon <= state0.t:
            raise ParameterError(f"Horizon {horizon} must exceed the start time {state0.t}")
        ledger = EnergyLedger()
        initial_energy = 0.5 * (l2_norm(state0.u) ** 2 + l2_norm(state0.B) ** 2)

        def record(state: SimState, step_dt: float) -> None:
            row = self.ledger_row(state, step_dt, initial_energy)
            ledger.append(row)
            if sink is not None:
                sink.write(row)

        # time comparisons are relative to the horizon
        eps = 1e-12 * horizon
        pending = sorted(t for t in stops if state0.t + eps < t <= horizon + eps)
        state = state0
        record(state, 0.0)
        logger.info(
            "Evolving to T=%g on N=%d (%s), alpha=%g, n=%g",
            horizon,
            self.grid.points_per_axis,
            self.grid.dim_mode.value,
            self.params.alpha,
            self.params.cutoff,
        )

        step_dt = 0.0
        while horizon - state.t > eps:
            target = pending[0] if pending else horizon
            step_dt = dt if dt is not None else self.select_dt(state)
            remaining = target - state.t
            # absorb a sliver rather than taking a tiny extra step
            if step_dt >= remaining * (1 - 1e-9):
                step_dt = remaining
            try:
                state = self.step(state, step_dt)
            except DivergenceError as error:
                ledger.diverged = True
                logger.warning("Run diverged at t=%.6g: %s", state.t, error)
                raise DivergenceError(str(error), ledger=ledger, state=state) from error

            if abs(state.t - target) <= eps:
                state = state.replace(t=target)
                if pending:
                    pending.pop(0)
                    if on_stop is not None:
                        on_stop(state)
            done = horizon - state.t <= eps
            if done or state.step % ledger_every == 0:
                record(state, step_dt)
            if on_snapshot is not None and snapshot_every and state.step % snapshot_every == 0:
                on_snapshot(state)

        logger.info(
            "Reached t=%g after %d steps, balance residual %.3e",
            state.t,
            state.step,
            ledger.last["balance_residual"],
        )
        return state, ledger


def rhs(state: SimState) -> tuple[SpectralVectorField, SpectralVectorField]:
    return HallMHDSystem(state).rhs(state)


def step(state: SimState, dt: float) -> SimState:
    return HallMHDSystem(state).step(state, dt)


def select_dt(state: SimState, cfl: float = DEFAULT_CFL, dt_max: float = DEFAULT_DT_MAX) -> float:
    return HallMHDSystem(state, cfl=cfl, dt_max=dt_max).select_dt(state)


def evolve(
    state0: SimState, horizon: float, sink: LedgerSink | None = None, **options
) -> tuple[SimState, EnergyLedger]:
    """Run state0 to the horizon; options are those of HallMHDSystem and its evolve."""
    system_options = {
        key: options.pop(key) for key in ("cfl", "dt_max", "blowup_cap") if key in options
    }
    return HallMHDSystem(state0, **system_options).evolve(state0, horizon, sink, **options)
