from enum import Enum
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

# allowed growth of the Cauchy difference from one rung of the cutoff ladder to the next
RUNG_SLACK = 0.05


class CutoffDifference(BaseModel):
    """Differences between the runs at cutoffs n < m, one entry per sample time."""

    n: float
    m: float
    u_l2: list[float]
    b_l2: list[float]
    hsigma: list[float]  # ||(u^n - u^m, B^n - B^m)||_{H^{σ'}}

    @property
    def total_l2(self) -> list[float]:
        return [math.hypot(a, b) for a, b in zip(self.u_l2, self.b_l2)]

    @property
    def final(self) -> float:
        return self.total_l2[-1]

    @property
    def maximum(self) -> float:
        return max(self.total_l2)


class ConvergenceReport(BaseModel):
    cutoffs: list[float]
    times: list[float]
    sigma_prime: float
    pairs: list[CutoffDifference]
    diverged: list[float] = []
    warnings: list[str] = []

    def pair(self, n: float, m: float) -> CutoffDifference:
        for item in self.pairs:
            if {item.n, item.m} == {n, m}:
                return item
        raise KeyError(f"No pair ({n}, {m}) in report")

    def ladder(self) -> list[CutoffDifference]:
        """Adjacent-rung pairs (n_i, n_{i+1}) in increasing order of n_i."""
        rungs = sorted(set(self.cutoffs))
        return [self.pair(a, b) for a, b in zip(rungs, rungs[1:])]

    @property
    def monotone(self) -> bool:
        """Final-time differences nonincreasing along the ladder, up to RUNG_SLACK per rung."""
        if self.diverged:
            return False
        finals = [item.final for item in self.ladder()]
        return all(b <= (1 + RUNG_SLACK) * a for a, b in zip(finals, finals[1:]))


class Verdict(str, Enum):
    BOUNDED = "bounded"
    HIT_HORIZON = "hit_horizon"  # horizon reached but the growth limit was exceeded
    BLEW_UP = "blew_up"


class AlphaTrace(BaseModel):
    alpha: float
    times: list[float]
    hsigma_norm: list[float]  # ||(u, B)||_{H^σ}
    hsigma_dissipation_integral: list[float]
    dissipation_integral: list[float]
    dissipation: list[float]  # sampled ||Λ^α B||^2
    verdict: Verdict
    message: str | None = None

    def quadrature_gap(self) -> float:
        """
        Relative gap between the dissipation integral carried by the stepper and
        the trapezoid rule over the sampled dissipation column (0 without samples).
        """
        if len(self.times) < 2:
            return 0.0
        carried = self.dissipation_integral[-1] - self.dissipation_integral[0]
        if carried == 0.0:
            return 0.0
        t, rate = np.asarray(self.times), np.asarray(self.dissipation)
        trapezoid = float(0.5 * np.sum(np.diff(t) * (rate[1:] + rate[:-1])))
        return abs(carried - trapezoid) / abs(carried)


class BoundednessReport(BaseModel):
    sigma: float
    growth_limit: float
    traces: list[AlphaTrace]

    @property
    def alphas(self) -> list[float]:
        return [trace.alpha for trace in self.traces]

    def trace(self, alpha: float) -> AlphaTrace:
        for trace in self.traces:
            if trace.alpha == alpha:
                return trace
        raise KeyError(f"No trace for alpha={alpha}")


class AuditRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    residual: float
    tolerance: float  # inf marks an informational row

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


class ShellBudget(BaseModel):
    """
    Per-shell nonlinear energy transfer split into commutator terms.

    transfer[l] = <Δ_l rhs_u, Δ_l u> + <Δ_l rhs_B, Δ_l B> computed directly;
    terms[l] holds the five commutator contributions whose sum reproduces it.
    """

    shells: list[int]
    terms: dict[int, tuple[float, float, float, float, float]]
    transfer: dict[int, float]
    dissipation: dict[int, float]

    def split_residual(self) -> float:
        return max((abs(sum(self.terms[l]) - self.transfer[l]) for l in self.shells), default=0.0)

    def net_transfer(self) -> float:
        return sum(self.transfer.values())


class OrderStudy(BaseModel):
    """Self-convergence of the stepper over a dt-halving ladder."""

    dts: list[float]
    errors: list[float]  # ||X_{dt_j} - X_{dt_{j+1}}||_{L^2}
    orders: list[float]  # log2(errors[j] / errors[j + 1])

    @property
    def observed_order(self) -> float:
        return min(self.orders) if self.orders else float("nan")
