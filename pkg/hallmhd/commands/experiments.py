import logging
from pathlib import Path
import time
from typing import Annotated, Optional

import typer

from hallmhd import __version__
from hallmhd.core.diagnostics import alpha_probe, friedrichs_sweep, identity_audit
from hallmhd.core.dynamics import HallMHDSystem
from hallmhd.errors import ConfigError, DivergenceError, PlotDataError, SnapshotError
from hallmhd.models.plan import Manifest, RunPlan
from hallmhd.models.reports import Verdict
from hallmhd.models.state import SimState
from hallmhd.providers.provider import Provider
from hallmhd.storage.ledgers import LEDGER_FILE, CSVLedgerSink
from hallmhd.storage.manifest import write_manifest
from hallmhd.storage.reports import write_audit, write_boundedness_report, write_convergence_report
from hallmhd.storage.snapshots import read_snapshot, snapshot_name, write_snapshot
from hallmhd.utils.parsing import parse_config, parse_float_list

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


class ExperimentOutcome:
    """Artifacts and flags collected while an experiment runs."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.artifacts: list[Path] = []
        self.diverged = False
        self.message: str | None = None

    def add(self, *paths: Path) -> None:
        self.artifacts.extend(paths)


def _initial_state(plan: RunPlan) -> SimState:
    provider = Provider.create(plan.data, plan.grid, plan.model_dump())
    return provider.initial_state(plan.params)


def _run(plan: RunPlan, outcome: ExperimentOutcome) -> None:
    state0 = _initial_state(plan)
    system = HallMHDSystem(state0, cfl=plan.cfl, dt_max=plan.dt_max, blowup_cap=plan.blowup_cap)
    snapshots = outcome.directory / "snapshots"

    def save(state: SimState) -> None:
        outcome.add(write_snapshot(snapshots / snapshot_name(state.step), state))

    save(state0)
    outcome.add(outcome.directory / LEDGER_FILE)
    with CSVLedgerSink(outcome.directory / LEDGER_FILE) as sink:
        try:
            final, _ = system.evolve(
                state0,
                plan.horizon,
                sink,
                dt=None if plan.dt == "auto" else float(plan.dt),
                ledger_every=plan.ledger_every,
                snapshot_every=plan.snapshot_every,
                on_snapshot=save,
            )
        except DivergenceError as error:
            if error.state is not None:
                save(error.state)
            raise
    if not plan.snapshot_every or final.step % plan.snapshot_every:
        save(final)


def _diagnose(plan: RunPlan, outcome: ExperimentOutcome) -> None:
    state = _initial_state(plan)
    rows = identity_audit(state, plan.sigma)
    outcome.add(*write_audit(outcome.directory, rows, plan.sigma))
    failed = [row.name for row in rows if not row.passed]
    if failed:
        outcome.message = f"audit rows failed: {', '.join(failed)}"


def _converge(plan: RunPlan, outcome: ExperimentOutcome) -> None:
    report = friedrichs_sweep(plan, output=outcome.directory)
    outcome.add(*write_convergence_report(outcome.directory, report))
    if report.diverged:
        outcome.diverged = True
        outcome.message = f"cutoffs {report.diverged} diverged"


def _alpha_sweep(plan: RunPlan, outcome: ExperimentOutcome) -> None:
    report = alpha_probe(plan, output=outcome.directory)
    outcome.add(*write_boundedness_report(outcome.directory, report))
    blown = [trace.alpha for trace in report.traces if trace.verdict == Verdict.BLEW_UP]
    if blown:
        outcome.diverged = True
        outcome.message = f"alphas {blown} blew up"


EXPERIMENTS = {
    "run": _run,
    "diagnose": _diagnose,
    "converge": _converge,
    "alpha-sweep": _alpha_sweep,
}


def run_experiment(plan: RunPlan) -> int:
    """
    Execute a plan and leave its artifacts and manifest in plan.output.

    Returns the exit status: 0 on success, 3 when a run diverged (partial
    artifacts are kept and the manifest is flagged).
    """
    started = time.perf_counter()
    directory = Path(plan.output)
    directory.mkdir(parents=True, exist_ok=True)
    warnings = plan.warnings()
    for message in warnings:
        logger.warning(message)

    outcome = ExperimentOutcome(directory)
    logger.info("Starting %s experiment in %s", plan.experiment, directory)
    try:
        EXPERIMENTS[plan.experiment](plan, outcome)
    except DivergenceError as error:
        outcome.diverged = True
        outcome.message = str(error)
    status = EXIT_DIVERGENCE if outcome.diverged else EXIT_OK

    manifest = Manifest(
        version=__version__,
        plan=plan.resolved(),
        mode="reference" if plan.jobs == 1 else "parallel",
        warnings=warnings,
        exit_status=status,
        diverged=outcome.diverged,
        message=outcome.message,
        wall_time=time.perf_counter() - started,
        artifacts=list(dict.fromkeys(str(path.relative_to(directory)) for path in outcome.artifacts)),
    )
    write_manifest(directory, manifest)
    logger.info("Finished %s with exit status %d in %.2fs", plan.experiment, status, manifest.wall_time)
    return status


def execute(plan_factory) -> None:
    """Build a plan, run it and exit with the status mapped from its outcome."""
    try:
        plan = plan_factory()
        status = run_experiment(plan)
    except (ConfigError, PlotDataError) as error:
        logger.error("Invalid configuration: %s", error)
        raise typer.Exit(code=EXIT_VALIDATION)
    except (OSError, SnapshotError) as error:
        logger.error("I/O failure: %s", error)
        raise typer.Exit(code=EXIT_IO)
    raise typer.Exit(code=status)


# Command-line surface

ConfigOption = Annotated[
    Optional[Path], typer.Option("--config", help="JSON key-value document with the run plan")
]
OutputOption = Annotated[Optional[Path], typer.Option("--output", help="Output directory")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Seed of the random initial data")]
JobsOption = Annotated[Optional[int], typer.Option("--jobs", help="Concurrent runs in a sweep")]
DtOption = Annotated[Optional[str], typer.Option("--dt", help="'auto' or a fixed time step")]
SnapshotEveryOption = Annotated[
    Optional[int], typer.Option("--snapshot-every", help="Write a snapshot every k steps (0: final only)")
]


def _overrides(experiment: str, output, seed, jobs, dt, snapshot_every, **extra) -> dict:
    return {
        "experiment": experiment,
        "output": output,
        "seed": seed,
        "jobs": jobs,
        "dt": dt,
        "snapshot_every": snapshot_every,
        **extra,
    }


def run_command(
    config: ConfigOption = None,
    output: OutputOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
    dt: DtOption = None,
    snapshot_every: SnapshotEveryOption = None,
) -> None:
    """Evolve one Friedrichs approximation and write its ledger and snapshots."""
    execute(lambda: parse_config(config, _overrides("run", output, seed, jobs, dt, snapshot_every)))


def diagnose_command(
    snapshot: Annotated[Path, typer.Argument(help="HMHD1 snapshot to audit")],
    sigma: Annotated[Optional[float], typer.Option("--sigma", help="Regularity index of the audit")] = None,
    config: ConfigOption = None,
    output: OutputOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
    dt: DtOption = None,
    snapshot_every: SnapshotEveryOption = None,
) -> None:
    """Audit the exact identities and sharp inequalities on a saved state."""

    def plan() -> RunPlan:
        # the audit runs on the snapshot's own grid
        saved = read_snapshot(snapshot)
        overrides = _overrides(
            "diagnose",
            output,
            seed,
            jobs,
            dt,
            snapshot_every,
            data="snapshot",
            snapshot=snapshot,
            sigma=sigma,
            N=saved.grid.points_per_axis,
            dim_mode=saved.grid.dim_mode,
            alpha=saved.alpha,
        )
        return parse_config(config, overrides)

    execute(plan)


def converge_command(
    cutoffs: Annotated[Optional[str], typer.Option("--cutoffs", help="Friedrichs radii, e.g. 8,12,16,21")] = None,
    config: ConfigOption = None,
    output: OutputOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
    dt: DtOption = None,
    snapshot_every: SnapshotEveryOption = None,
) -> None:
    """Sweep the Friedrichs radius and report the pairwise Cauchy differences."""

    def plan() -> RunPlan:
        parsed = parse_float_list(cutoffs) if cutoffs is not None else None
        overrides = _overrides("converge", output, seed, jobs, dt, snapshot_every, cutoffs=parsed)
        return parse_config(config, overrides)

    execute(plan)


def alpha_sweep_command(
    alphas: Annotated[Optional[str], typer.Option("--alphas", help="Diffusion orders, e.g. 0.6,0.75,1")] = None,
    config: ConfigOption = None,
    output: OutputOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
    dt: DtOption = None,
    snapshot_every: SnapshotEveryOption = None,
) -> None:
    """Probe H^sigma boundedness across fractional diffusion orders."""

    def plan() -> RunPlan:
        parsed = parse_float_list(alphas) if alphas is not None else None
        overrides = _overrides("alpha-sweep", output, seed, jobs, dt, snapshot_every, alphas=parsed)
        return parse_config(config, overrides)

    execute(plan)
