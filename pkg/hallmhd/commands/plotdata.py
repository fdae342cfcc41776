"""
Whitespace-separated .dat tables for gnuplot-style plotting, extracted from a
ledger or from converge report files.
"""

import logging
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer

from hallmhd.commands.experiments import EXIT_IO, EXIT_VALIDATION
from hallmhd.errors import PlotDataError
from hallmhd.storage.ledgers import LEDGER_FILE, read_ledger
from hallmhd.storage.reports import read_convergence_file

logger = logging.getLogger(__name__)

ENERGY_FILE = "energy.dat"
HSIGMA_FILE = "hsigma.dat"
CAUCHY_FILE = "cauchy.dat"
CONVERGE_PATTERN = "converge_n=*.csv"


def _save(path: Path, columns: list[str], table: np.ndarray) -> Path:
    np.savetxt(path, table.reshape(-1, len(columns)), fmt="%.17g", header=" ".join(columns))
    logger.info("Wrote %s", path)
    return path


def ledger_tables(ledger_path: Path, output: Path) -> list[Path]:
    ledger = read_ledger(ledger_path)
    t = ledger.column("t")
    energy_u, energy_b = ledger.column("energy_u"), ledger.column("energy_b")
    energy = energy_u + energy_b
    energy_table = np.column_stack(
        [t, energy_u, energy_b, energy, energy + ledger.column("dissipation_integral")]
    )
    hsigma_table = np.column_stack(
        [t, ledger.column("hsigma_u"), ledger.column("hsigma_b"), ledger.column("hsigma_dissipation_integral")]
    )
    return [
        _save(output / ENERGY_FILE, ["t", "E_u", "E_B", "E", "E+int_D"], energy_table),
        _save(output / HSIGMA_FILE, ["t", "hsigma_u", "hsigma_b", "int_hsigma_D"], hsigma_table),
    ]


def convergence_table(files: list[Path], output: Path) -> Path:
    """One line per cutoff pair holding its differences at the final sample time."""
    table = []
    for path in sorted(files):
        rows = read_convergence_file(path)
        for m in sorted({row["m"] for row in rows}):
            final = max((row for row in rows if row["m"] == m), key=lambda row: row["t"])
            table.append([final["n"], m, final["total_l2"], final["u_l2"], final["b_l2"]])
    return _save(output / CAUCHY_FILE, ["n", "m", "total_l2", "u_l2", "b_l2"], np.array(table, dtype=float))


def emit_plotdata(path: Path, output: Path | None = None) -> list[Path]:
    """
    Convert a ledger file, a converge report file or a run directory holding
    either into .dat tables written next to the source unless output is given.

    Raises:
        PlotDataError: if nothing plottable is found or a file is malformed
    """
    path = Path(path)
    if not path.exists():
        raise PlotDataError(f"{path}: no such file or directory")

    if path.is_dir():
        ledgers = [path / LEDGER_FILE] if (path / LEDGER_FILE).is_file() else []
        converge = sorted(path.glob(CONVERGE_PATTERN))
        directory = path
    elif path.name.startswith("converge_"):
        ledgers, converge, directory = [], [path], path.parent
    else:
        ledgers, converge, directory = [path], [], path.parent
    if not ledgers and not converge:
        raise PlotDataError(f"{path}: neither {LEDGER_FILE} nor {CONVERGE_PATTERN} found")

    output = Path(output) if output is not None else directory
    output.mkdir(parents=True, exist_ok=True)
    written = []
    for ledger in ledgers:
        written.extend(ledger_tables(ledger, output))
    if converge:
        written.append(convergence_table(converge, output))
    return written


def plotdata_command(
    path: Annotated[Path, typer.Argument(help="Ledger, converge report or run directory")],
    output: Annotated[Optional[Path], typer.Option("--output", help="Directory for the .dat files")] = None,
) -> None:
    """Emit plot-ready .dat tables from a ledger or a cutoff sweep."""
    try:
        for written in emit_plotdata(path, output):
            typer.echo(written)
    except PlotDataError as error:
        logger.error("%s", error)
        raise typer.Exit(code=EXIT_VALIDATION)
    except OSError as error:
        logger.error("I/O failure: %s", error)
        raise typer.Exit(code=EXIT_IO)
