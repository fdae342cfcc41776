import csv
import logging
from pathlib import Path

from hallmhd.errors import PlotDataError
from hallmhd.models.ledger import LEDGER_COLUMNS, EnergyLedger, LedgerRow

logger = logging.getLogger(__name__)

LEDGER_FILE = "ledger.csv"


class CSVLedgerSink:
    """
    Streams ledger rows to a CSV file as they are produced.

    Floats are written in their shortest round-trip form, so reading the
    file back yields the exact values that were logged.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self._handle = None
        self._writer = None

    def __enter__(self) -> "CSVLedgerSink":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(self.path, "w", newline="")
        self._writer = csv.writer(self._handle)
        self._writer.writerow(LEDGER_COLUMNS)
        return self

    def __exit__(self, *exc_info) -> None:
        self._handle.close()
        logger.info("Ledger written to %s", self.path)

    def write(self, row: LedgerRow) -> None:
        self._writer.writerow([str(row[column]) for column in LEDGER_COLUMNS])
        self._handle.flush()


def write_ledger(path: Path, ledger: EnergyLedger) -> Path:
    with CSVLedgerSink(path) as sink:
        for row in ledger.rows:
            sink.write(row)
    return Path(path)


def read_ledger(path: Path) -> EnergyLedger:
    """
    Raises:
        PlotDataError: naming the file, line and column of the first malformed entry
    """
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise PlotDataError(f"{path}: empty file, expected a ledger header")
        if tuple(header) != LEDGER_COLUMNS:
            missing = [c for c in LEDGER_COLUMNS if c not in header]
            raise PlotDataError(f"{path}, line 1: not a ledger header (missing columns {missing})")

        ledger = EnergyLedger()
        for line, values in enumerate(reader, start=2):
            if len(values) != len(LEDGER_COLUMNS):
                raise PlotDataError(
                    f"{path}, line {line}: expected {len(LEDGER_COLUMNS)} fields, found {len(values)}"
                )
            row = {}
            for column, value in zip(LEDGER_COLUMNS, values):
                try:
                    row[column] = int(value) if column == "step" else float(value)
                except ValueError:
                    raise PlotDataError(
                        f"{path}, line {line}, column '{column}': cannot parse {value!r}"
                    ) from None
            ledger.append(LedgerRow(**row))
    return ledger
