import logging
from pathlib import Path

from hallmhd.core.spectral import resample
from hallmhd.models.fields import SpectralVectorField
from hallmhd.providers.provider import Provider
from hallmhd.storage.snapshots import read_snapshot

logger = logging.getLogger(__name__)


class Snapshot(Provider):
    """Fields read from an HMHD1 file, resampled when its resolution differs from the grid."""

    def fields(self) -> tuple[SpectralVectorField, SpectralVectorField]:
        path = Path(self.config["snapshot"])
        snapshot = read_snapshot(path)
        u, B = snapshot.u, snapshot.B
        if snapshot.grid != self.grid:
            logger.info(
                "Resampling snapshot %s from N=%d to N=%d",
                path,
                snapshot.grid.points_per_axis,
                self.grid.points_per_axis,
            )
            u, B = resample(u, self.grid), resample(B, self.grid)
        return u, B
