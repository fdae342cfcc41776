"""
Report files: one CSV per swept parameter value, named
``{experiment}_{param}={value}.csv``, plus a plain-text summary block.
"""

import csv
import logging
from pathlib import Path

from hallmhd.errors import PlotDataError
from hallmhd.models.reports import AuditRow, BoundednessReport, ConvergenceReport

logger = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = ("m", "t", "u_l2", "b_l2", "total_l2", "hsigma")
TRACE_COLUMNS = ("t", "hsigma_norm", "hsigma_dissipation_integral", "dissipation_integral", "dissipation")
AUDIT_COLUMNS = ("name", "residual", "tolerance", "passed")


def report_name(experiment: str, param: str, value: float) -> str:
    return f"{experiment}_{param}={value:g}.csv"


def summary_name(experiment: str) -> str:
    return f"{experiment}_summary.txt"


def _write_rows(path: Path, columns: tuple[str, ...], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        writer.writerows(rows)
    return path


def _write_summary(path: Path, lines: list[str]) -> Path:
    path.write_text("\n".join(lines) + "\n")
    return path


def write_convergence_report(directory: Path, report: ConvergenceReport) -> list[Path]:
    directory = Path(directory)
    written = []
    for n in sorted(set(report.cutoffs)):
        rows = []
        for pair in report.pairs:
            if pair.n != n:
                continue
            for t, u, b, total, hs in zip(
                report.times, pair.u_l2, pair.b_l2, pair.total_l2, pair.hsigma
            ):
                rows.append([f"{pair.m:g}", str(t), str(u), str(b), str(total), str(hs)])
        if rows:
            written.append(
                _write_rows(directory / report_name("converge", "n", n), CONVERGENCE_COLUMNS, rows)
            )

    lines = [
        "Friedrichs cutoff sweep",
        f"cutoffs: {', '.join(f'{n:g}' for n in report.cutoffs)}",
        f"horizon: {report.times[-1]:g}" if report.times else "horizon: -",
        f"H^s' differences use s' = {report.sigma_prime:g}",
        "",
        "{:>6} {:>6} {:>14} {:>14} {:>14}".format("n", "m", "final L2", "max L2", "final Hs'"),
    ]
    for pair in report.pairs:
        lines.append(
            f"{pair.n:>6g} {pair.m:>6g} {pair.final:>14.6e} {pair.maximum:>14.6e} {pair.hsigma[-1]:>14.6e}"
        )
    lines.append("")
    if report.diverged:
        lines.append(f"diverged cutoffs: {', '.join(f'{n:g}' for n in report.diverged)}")
    lines.append(f"monotone along the ladder (5% slack per rung): {'yes' if report.monotone else 'no'}")
    lines.extend(f"warning: {message}" for message in report.warnings)
    written.append(_write_summary(directory / summary_name("converge"), lines))
    logger.info("Convergence report written to %s", directory)
    return written


def write_boundedness_report(directory: Path, report: BoundednessReport) -> list[Path]:
    directory = Path(directory)
    written = []
    for trace in report.traces:
        rows = [
            [str(t), str(h), str(q2), str(q), str(d)]
            for t, h, q2, q, d in zip(
                trace.times,
                trace.hsigma_norm,
                trace.hsigma_dissipation_integral,
                trace.dissipation_integral,
                trace.dissipation,
            )
        ]
        written.append(
            _write_rows(
                directory / report_name("alpha-sweep", "alpha", trace.alpha), TRACE_COLUMNS, rows
            )
        )

    lines = [
        "Fractional diffusion threshold probe",
        f"sigma: {report.sigma:g}",
        f"growth limit: {report.growth_limit:g} x initial H^sigma norm",
        "",
        f"{'alpha':>8} {'verdict':>12} {'max Hs':>14} {'int |L^a B|^2_Hs':>18} {'quadrature gap':>15}",
    ]
    for trace in report.traces:
        peak = max(trace.hsigma_norm) if trace.hsigma_norm else float("nan")
        integral = trace.hsigma_dissipation_integral[-1] if trace.hsigma_dissipation_integral else float("nan")
        lines.append(
            f"{trace.alpha:>8g} {trace.verdict.value:>12} {peak:>14.6e} {integral:>18.6e} {trace.quadrature_gap():>15.3e}"
        )
        if trace.message:
            lines.append(f"         {trace.message}")
    written.append(_write_summary(directory / summary_name("alpha-sweep"), lines))
    logger.info("Boundedness report written to %s", directory)
    return written


def write_audit(directory: Path, rows: list[AuditRow], sigma: float) -> list[Path]:
    directory = Path(directory)
    table = [[row.name, str(row.residual), str(row.tolerance), str(row.passed)] for row in rows]
    path = _write_rows(directory / report_name("diagnose", "sigma", sigma), AUDIT_COLUMNS, table)

    width = max((len(row.name) for row in rows), default=4)
    lines = [f"Identity audit at sigma = {sigma:g}", ""]
    for row in rows:
        status = "info" if row.tolerance == float("inf") else ("pass" if row.passed else "FAIL")
        lines.append(f"{row.name:<{width}}  {row.residual:.3e}  (tol {row.tolerance:.1e})  {status}")
    summary = _write_summary(directory / summary_name("diagnose"), lines)
    return [path, summary]


def read_convergence_file(path: Path) -> list[dict[str, float]]:
    """
    Rows of one converge_n=... file with the lower cutoff n added.

    Raises:
        PlotDataError: naming the file, line and column of the first malformed entry
    """
    path = Path(path)
    stem = path.stem
    try:
        n = float(stem.split("=", 1)[1])
    except (IndexError, ValueError):
        raise PlotDataError(f"{path}: file name does not carry a cutoff (converge_n=<n>.csv)") from None

    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != CONVERGENCE_COLUMNS:
            raise PlotDataError(f"{path}, line 1: expected columns {', '.join(CONVERGENCE_COLUMNS)}")
        rows = []
        for line, values in enumerate(reader, start=2):
            if len(values) != len(CONVERGENCE_COLUMNS):
                raise PlotDataError(
                    f"{path}, line {line}: expected {len(CONVERGENCE_COLUMNS)} fields, found {len(values)}"
                )
            row = {"n": n}
            for column, value in zip(CONVERGENCE_COLUMNS, values):
                try:
                    row[column] = float(value)
                except ValueError:
                    raise PlotDataError(
                        f"{path}, line {line}, column '{column}': cannot parse {value!r}"
                    ) from None
            rows.append(row)
    return rows
