"""
Desk-scale studies built on the dynamics: the Friedrichs cutoff sweep, the
fractional-diffusion threshold probe, the identity audit of a live state, the
temporal order study and the per-shell energy budget.
"""

from concurrent.futures import ThreadPoolExecutor
import logging
import math
from pathlib import Path

import numpy as np
from tqdm import tqdm

from hallmhd.core import lp
from hallmhd.core.dynamics import HallMHDSystem
from hallmhd.core.operators import OperatorWorkspace, curl, field_scale
from hallmhd.core.spectral import inner, l2_norm, multiplier_norm, restrict
from hallmhd.errors import DivergenceError
from hallmhd.models.fields import DIVERGENCE_TOLERANCE
from hallmhd.models.ledger import EnergyLedger
from hallmhd.models.plan import RunPlan
from hallmhd.models.reports import (
    AlphaTrace,
    AuditRow,
    BoundednessReport,
    ConvergenceReport,
    CutoffDifference,
    OrderStudy,
    ShellBudget,
    Verdict,
)
from hallmhd.models.state import SimState
from hallmhd.providers.provider import Provider
from hallmhd.storage.ledgers import LEDGER_FILE, CSVLedgerSink

logger = logging.getLogger(__name__)

# tolerances of the audit rows
HALL_TOLERANCE = 1e-10
TRANSPORT_TOLERANCE = 1e-10
PARAPRODUCT_TOLERANCE = 1e-12
COMMUTATOR_TOLERANCE = 1e-13
INEQUALITY_TOLERANCE = 1e-12


def _system(plan: RunPlan, state: SimState) -> HallMHDSystem:
    return HallMHDSystem(state, cfl=plan.cfl, dt_max=plan.dt_max, blowup_cap=plan.blowup_cap)


def _fixed_dt(plan: RunPlan) -> float | None:
    return None if plan.dt == "auto" else float(plan.dt)


def _provider(plan: RunPlan) -> Provider:
    return Provider.create(plan.data, plan.grid, plan.model_dump())


def _fan_out(function, values: list[float], jobs: int, desc: str) -> list:
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(tqdm(executor.map(function, values), total=len(values), desc=desc))


def _run_evolution(
    plan: RunPlan,
    state0: SimState,
    directory: Path | None,
    **options,
) -> tuple[SimState, EnergyLedger]:
    system = _system(plan, state0)
    options.setdefault("dt", _fixed_dt(plan))
    options.setdefault("ledger_every", plan.ledger_every)
    if directory is None:
        return system.evolve(state0, plan.horizon, **options)
    with CSVLedgerSink(directory / LEDGER_FILE) as sink:
        return system.evolve(state0, plan.horizon, sink, **options)


# Friedrichs cutoff sweep


def cauchy_difference(
    a: SimState, b: SimState, sigma_prime: float
) -> tuple[float, float, float]:
    """
    (||u^a - u^b||, ||B^a - B^b||, ||(u^a - u^b, B^a - B^b)||_{H^σ'}) after both
    states are filtered to the smaller of their two balls.
    """
    small = a.params if a.params.cutoff <= b.params.cutoff else b.params
    mask = small.ball.mask(a.grid)
    du = restrict(a.u, mask) - restrict(b.u, mask)
    dB = restrict(a.B, mask) - restrict(b.B, mask)
    hsigma = math.hypot(lp.sobolev_norm(du, sigma_prime), lp.sobolev_norm(dB, sigma_prime))
    return l2_norm(du), l2_norm(dB), hsigma


def friedrichs_sweep(
    plan: RunPlan,
    cutoffs: list[float] | None = None,
    jobs: int | None = None,
    output: Path | None = None,
) -> ConvergenceReport:
    """
    Run the same initial data at every Friedrichs radius and compare the runs pairwise.

    The horizon is sampled at plan.samples equal intervals; every run lands on
    those times exactly. A diverged run is listed in the report and its pairs
    are compared over the times it reached.
    """
    cutoffs = sorted(set(cutoffs if cutoffs is not None else plan.cutoffs))
    times = [float(t) for t in np.linspace(0.0, plan.horizon, plan.samples + 1)]
    sigma_prime = plan.sigma / 2
    provider = _provider(plan)
    warnings = []
    if len(cutoffs) < 2:
        warnings.append(f"only {len(cutoffs)} distinct cutoff(s); no pairs to compare")
        logger.warning("Degenerate cutoff sweep: %s", cutoffs)

    def run(n: float) -> tuple[list[SimState], bool]:
        params = plan.params.model_copy(update={"cutoff": n})
        state0 = provider.initial_state(params)
        samples = [state0]
        directory = Path(output) / f"n={n:g}" if output is not None else None
        try:
            _run_evolution(plan, state0, directory, stops=times[1:], on_stop=samples.append)
        except DivergenceError as error:
            logger.warning("Cutoff n=%g diverged: %s", n, error)
            return samples, True
        return samples, False

    results = dict(zip(cutoffs, _fan_out(run, cutoffs, jobs or plan.jobs, "cutoffs")))

    pairs = []
    for i, n in enumerate(cutoffs):
        for m in cutoffs[i + 1 :]:
            differences = [
                cauchy_difference(a, b, sigma_prime)
                for a, b in zip(results[n][0], results[m][0])
            ]
            u_l2, b_l2, hsigma = (list(column) for column in zip(*differences))
            pairs.append(CutoffDifference(n=n, m=m, u_l2=u_l2, b_l2=b_l2, hsigma=hsigma))

    report = ConvergenceReport(
        cutoffs=cutoffs,
        times=times,
        sigma_prime=sigma_prime,
        pairs=pairs,
        diverged=[n for n in cutoffs if results[n][1]],
        warnings=warnings,
    )
    logger.info(
        "Cutoff sweep %s: final differences %s, monotone=%s",
        cutoffs,
        [f"{pair.final:.3e}" for pair in report.ladder()] if len(cutoffs) > 1 else [],
        report.monotone,
    )
    return report


# Threshold probe


def _trace(alpha: float, ledger: EnergyLedger, verdict: Verdict, message: str | None) -> AlphaTrace:
    hsigma = np.hypot(ledger.column("hsigma_u"), ledger.column("hsigma_b"))
    return AlphaTrace(
        alpha=alpha,
        times=ledger.column("t").tolist(),
        hsigma_norm=hsigma.tolist(),
        hsigma_dissipation_integral=ledger.column("hsigma_dissipation_integral").tolist(),
        dissipation_integral=ledger.column("dissipation_integral").tolist(),
        dissipation=ledger.column("dissipation").tolist(),
        verdict=verdict,
        message=message,
    )


def alpha_probe(
    plan: RunPlan,
    alphas: list[float] | None = None,
    jobs: int | None = None,
    output: Path | None = None,
) -> BoundednessReport:
    """
    Evolve the same data for every alpha and classify each run.

    bounded: horizon reached with ||(u, B)||_{H^σ} at most growth_limit times its
    initial value; hit_horizon: horizon reached beyond that limit; blew_up: the
    run diverged (its partial series is kept).
    """
    alphas = list(alphas if alphas is not None else plan.alphas)
    provider = _provider(plan)

    def run(alpha: float) -> AlphaTrace:
        params = plan.params.model_copy(update={"alpha": alpha})
        state0 = provider.initial_state(params)
        directory = Path(output) / f"alpha={alpha:g}" if output is not None else None
        try:
            _, ledger = _run_evolution(plan, state0, directory)
        except DivergenceError as error:
            return _trace(alpha, error.ledger or EnergyLedger(), Verdict.BLEW_UP, str(error))

        trace = _trace(alpha, ledger, Verdict.BOUNDED, None)
        initial, peak = trace.hsigma_norm[0], max(trace.hsigma_norm)
        if peak > plan.growth_limit * initial:
            message = f"H^sigma norm rose from {initial:.3e} to {peak:.3e}, beyond {plan.growth_limit:g}x"
            return trace.model_copy(update={"verdict": Verdict.HIT_HORIZON, "message": message})
        return trace

    traces = _fan_out(run, alphas, jobs or plan.jobs, "alphas")
    for trace in traces:
        logger.info("alpha=%g: %s", trace.alpha, trace.verdict.value)
    return BoundednessReport(sigma=plan.sigma, growth_limit=plan.growth_limit, traces=traces)


# Identity audit


def _relative(residual: float, scale: float) -> float:
    return residual / scale if scale > 0 else 0.0


def identity_audit(
    state: SimState, sigma: float, workspace: OperatorWorkspace | None = None
) -> list[AuditRow]:
    """
    Check the exact identities and sharp inequalities on a live state.

    Every residual is relative to the natural scale of its terms and is 0 for
    the zero state. The embedding row is informational (infinite tolerance).
    """
    ws = workspace or OperatorWorkspace(state.grid)
    u, B = state.u, state.B
    alpha = state.params.alpha
    rows = []

    def add(name: str, residual: float, tolerance: float) -> None:
        rows.append(AuditRow(name=name, residual=float(residual), tolerance=tolerance))

    hall = ws.hall_identity_residuals(B).relative()
    add("hall_orthogonality", hall.orthogonality, HALL_TOLERANCE)
    add("hall_derivative_shift", hall.derivative_shift, HALL_TOLERANCE)
    add("hall_vector_identity", hall.vector_identity, HALL_TOLERANCE)

    J = curl(B)
    J_max = float(np.max(np.abs(ws.physical(J)))) if not J.is_zero() else 0.0
    B_max = float(np.max(np.abs(ws.physical(B)))) if not B.is_zero() else 0.0
    alignment = max(
        (ws.hall_alignment_residual(B, lp.shell_mask(state.grid, l)) for l in lp.shell_range(state.grid)),
        default=0.0,
    )
    add("hall_alignment", _relative(alignment, B_max * J_max**2), HALL_TOLERANCE)

    transport_scale = field_scale(u) * field_scale(B) ** 2
    add("transport_neutrality", _relative(ws.transport_neutrality(u, B), transport_scale), TRANSPORT_TOLERANCE)
    add(
        "cross_term_cancellation",
        _relative(ws.cross_term_cancellation(u, B), transport_scale),
        TRANSPORT_TOLERANCE,
    )

    decomposition = lp.decompose(B)
    add("lp_partition", float(np.max(np.abs(decomposition.reconstruct().coeffs - B.coeffs))), 0.0)

    split = lp.paraproduct_split(B, u, ws)
    add(
        "paraproduct_completeness",
        _relative(split.residual(), l2_norm(split.product)),
        PARAPRODUCT_TOLERANCE,
    )

    commutator_residual = 0.0
    scale = l2_norm(ws.advect(u, B))
    for l in decomposition.shells:
        direct = lp.commutator_block(l, u, B, ws)
        families = lp.commutator_split(l, u, B, ws).total()
        commutator_residual = max(commutator_residual, _relative(l2_norm(families - direct), scale))
    add("commutator_split", commutator_residual, COMMUTATOR_TOLERANCE)

    c1, c2 = lp.besov_sobolev_envelope(state.grid, sigma)
    besov = lp.besov_norm(B, sigma).value
    if besov > 0:
        ratio = lp.sobolev_norm(B, sigma) / besov
        envelope = max(0.0, c1 - ratio, ratio - c2) / c1
    else:
        envelope = 0.0
    add("besov_sobolev_envelope", envelope, INEQUALITY_TOLERANCE)

    bernstein, dissipation = 0.0, 0.0
    for l, block in decomposition.blocks.items():
        if l < 0 or block.is_zero():
            continue
        ratio = lp.bernstein_ratio(block, l, alpha)
        bernstein = max(bernstein, 1.0 - ratio, ratio - 2.0 ** (2 * alpha))
        value, bound = lp.dissipation_lower_bound(B, l, alpha)
        dissipation = max(dissipation, _relative(bound - value, bound))
    add("bernstein_envelope", max(bernstein, 0.0), INEQUALITY_TOLERANCE)
    add("dissipation_lower_bound", max(dissipation, 0.0), INEQUALITY_TOLERANCE)

    if sigma > 0 and not B.is_zero():
        sigma_prime = sigma / 2
        theta = sigma_prime / sigma
        ratio = lp.sobolev_norm(B, sigma_prime) / (
            l2_norm(B) ** (1 - theta) * lp.sobolev_norm(B, sigma) ** theta
        )
        interpolation = max(0.0, ratio - 1.0)
    else:
        interpolation = 0.0
    add("interpolation", interpolation, INEQUALITY_TOLERANCE)

    add(
        "divergence",
        max(u.divergence_residual(), B.divergence_residual()),
        DIVERGENCE_TOLERANCE,
    )
    add("embedding_ratio", lp.embedding_ratio(B, sigma), math.inf)

    failed = [row.name for row in rows if not row.passed]
    if failed:
        logger.warning("Identity audit failed rows: %s", ", ".join(failed))
    return rows


# Temporal order


def temporal_order_study(
    state0: SimState, horizon: float, dts: list[float], **system_options
) -> OrderStudy:
    """
    Run to the horizon at each fixed dt and compare successive rungs.

    With a halving ladder the observed order is log2 of the ratio of
    consecutive differences.
    """
    finals = []
    for dt in dts:
        final, _ = HallMHDSystem(state0, **system_options).evolve(state0, horizon, dt=dt, ledger_every=10**9)
        finals.append(final)

    errors = [
        math.hypot(l2_norm(a.u - b.u), l2_norm(a.B - b.B)) for a, b in zip(finals, finals[1:])
    ]
    orders = [
        math.log(e0 / e1) / math.log(dt0 / dt1)
        for e0, e1, dt0, dt1 in zip(errors, errors[1:], dts, dts[1:])
        if e0 > 0 and e1 > 0
    ]
    study = OrderStudy(dts=list(dts), errors=errors, orders=orders)
    logger.info("Temporal order study: errors %s, orders %s", errors, orders)
    return study


# Shell budget


def shell_energy_budget(
    state: SimState, workspace: OperatorWorkspace | None = None
) -> ShellBudget:
    """
    Nonlinear energy transfer into each dyadic shell, in commutator form.

    K1 = -<[Δ_l, u.grad] u, Δ_l u>      K2 = <[Δ_l, B.grad] B, Δ_l u>
    K3 = <[Δ_l, B.grad] u, Δ_l B>       K4 = -<[Δ_l, u.grad] B, Δ_l B>
    K5 = -h <Δ_l(J x B) - (Δ_l J) x B, Δ_l J>,  J = curl B
    The transport parts removed by the commutators integrate to zero, so the
    five terms add up to the direct transfer of the shell.
    """
    system = HallMHDSystem(state)
    ws = workspace or system.workspace
    du, dB = system.rhs(state)
    u, B = state.u, state.B
    J = curl(B)
    J_cross_B = ws.cross(J, B)
    hall = state.params.hall_coefficient
    decay = state.grid.wavenumber_squared() ** state.params.alpha

    shells = list(lp.shell_range(state.grid))
    terms, transfer, dissipation = {}, {}, {}
    for l in shells:
        mask = lp.shell_mask(state.grid, l)
        u_l, B_l, J_l = restrict(u, mask), restrict(B, mask), restrict(J, mask)
        k1 = -inner(lp.commutator_block(l, u, u, ws), u_l)
        k2 = inner(lp.commutator_block(l, B, B, ws), u_l)
        k3 = inner(lp.commutator_block(l, B, u, ws), B_l)
        k4 = -inner(lp.commutator_block(l, u, B, ws), B_l)
        k5 = -hall * inner(restrict(J_cross_B, mask) - ws.cross(J_l, B), J_l)
        terms[l] = (k1, k2, k3, k4, k5)
        transfer[l] = inner(du, u_l) + inner(dB, B_l)
        dissipation[l] = -multiplier_norm(B_l, decay) ** 2
    return ShellBudget(shells=shells, terms=terms, transfer=transfer, dissipation=dissipation)
