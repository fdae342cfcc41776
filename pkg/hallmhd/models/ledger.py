from typing_extensions import TypedDict

import numpy as np
from pydantic import BaseModel


class LedgerRow(TypedDict):
    t: float
    step: int
    dt: float
    energy_u: float  # ½||u||^2
    energy_b: float  # ½||B||^2
    dissipation: float  # ||Λ^α B||^2
    hsigma_u: float
    hsigma_b: float
    div_u: float
    div_b: float
    hall_flux: float  # ∫ curl((curl B) x B) . B
    dissipation_integral: float
    hsigma_dissipation_integral: float
    balance_residual: float  # |E(t) + ∫ D - E(0)|


LEDGER_COLUMNS: tuple[str, ...] = tuple(LedgerRow.__annotations__)


class EnergyLedger(BaseModel):
    """Time series of energies, dissipation and invariant residuals of one run."""

    rows: list[LedgerRow] = []
    diverged: bool = False

    def append(self, row: LedgerRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def last(self) -> LedgerRow | None:
        return self.rows[-1] if self.rows else None

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    def total_energy(self) -> np.ndarray:
        return self.column("energy_u") + self.column("energy_b")

    def max_balance_residual(self) -> float:
        return float(self.column("balance_residual").max()) if self.rows else 0.0
