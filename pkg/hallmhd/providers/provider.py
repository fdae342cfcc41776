import logging

import numpy as np

from hallmhd.core.spectral import apply_filter, leray_project
from hallmhd.models.fields import FrequencyFilter, SpectralVectorField
from hallmhd.models.grid import Grid
from hallmhd.models.state import SimParams, SimState

logger = logging.getLogger(__name__)


class Provider:

    @staticmethod
    def create(provider_name: str, grid: Grid, config: dict | None = None) -> "Provider":
        """
        Factory method to create an initial-data provider based on the preset name.
        """
        provider_classes = {
            "orszag-tang": OrszagTang,
            "random": RandomSolenoidal,
            "single-mode": SingleMode,
            "zero": Zero,
            "snapshot": Snapshot,
        }

        if provider_name.lower() not in provider_classes:
            raise ValueError(f"Initial data '{provider_name}' is not supported.")

        SpecificProvider = provider_classes[provider_name.lower()]

        return SpecificProvider(grid=grid, config=config)

    def __init__(self, grid: Grid, config: dict | None = None):
        self.grid = grid
        self.config = config or {}

    @property
    def amplitude(self) -> float:
        return float(self.config.get("amplitude", 1.0))

    def fields(self) -> tuple[SpectralVectorField, SpectralVectorField]:
        """
        Build (u0, B0) on the provider's grid.
        This method should be implemented by subclasses.
        """
        raise NotImplementedError("Subclasses must implement this method.")

    def initial_state(self, params: SimParams) -> SimState:
        """
        Initial data brought into the Friedrichs space of params: dealiased,
        Leray projected and filtered to the ball, in that order.
        """
        u, B = self.fields()
        ball = params.ball
        dealias = FrequencyFilter.dealias()
        u, B = (apply_filter(leray_project(apply_filter(f, dealias)), ball) for f in (u, B))
        if params.freeze_velocity:
            u = SpectralVectorField.zeros(self.grid)
        logger.info(
            "Initial data %s on N=%d: max|u_hat|=%.3e, max|B_hat|=%.3e",
            type(self).__name__,
            self.grid.points_per_axis,
            u.max_coefficient(),
            B.max_coefficient(),
        )
        return SimState(u=u, B=B, params=params)


def physical_field(grid: Grid, components) -> np.ndarray:
    """Stack three sample arrays (or scalars) into a (3, *shape) real array."""
    return np.stack([np.broadcast_to(np.asarray(c, dtype=float), grid.shape) for c in components])


from hallmhd.providers.presets import OrszagTang, SingleMode, Zero
from hallmhd.providers.solenoidal import RandomSolenoidal
from hallmhd.providers.snapshot import Snapshot
