"""
HMHD1 snapshot files.

Layout (little-endian): magic b"HMHD", version byte, dim_mode byte, N as
uint32, alpha and t as float64, then the coefficients of u followed by those
of B as interleaved complex128, component-major and in numpy FFT storage
order. Reading back what was written is bit-exact.
"""

import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict

from hallmhd.errors import SnapshotError
from hallmhd.models.fields import SpectralVectorField
from hallmhd.models.grid import DimMode, Grid
from hallmhd.models.state import SimState

logger = logging.getLogger(__name__)

MAGIC = b"HMHD"
VERSION = 1
HEADER = np.dtype(
    [
        ("magic", "S4"),
        ("version", "u1"),
        ("dim_mode", "u1"),
        ("points", "<u4"),
        ("alpha", "<f8"),
        ("time", "<f8"),
    ]
)
COEFFICIENT = np.dtype("<c16")
DIM_MODE_CODES = {DimMode.TWO_POINT_FIVE_D: 2, DimMode.THREE_D: 3}


class Snapshot(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    alpha: float
    time: float
    u: SpectralVectorField
    B: SpectralVectorField


def snapshot_name(step: int) -> str:
    return f"snapshot_{step:06d}.hmhd"


def write_snapshot(path: Path, state: SimState) -> Path:
    grid = state.grid
    header = np.zeros((), dtype=HEADER)
    header["magic"] = MAGIC
    header["version"] = VERSION
    header["dim_mode"] = DIM_MODE_CODES[grid.dim_mode]
    header["points"] = grid.points_per_axis
    header["alpha"] = state.params.alpha
    header["time"] = state.t

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(header.tobytes())
        for field in (state.u, state.B):
            handle.write(np.ascontiguousarray(field.coeffs, dtype=COEFFICIENT).tobytes())
    logger.debug("Wrote snapshot %s at t=%g", path, state.t)
    return path


def read_snapshot(path: Path) -> Snapshot:
    """
    Raises:
        SnapshotError: if the file is not a well-formed HMHD1 snapshot
    """
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.itemsize:
        raise SnapshotError(f"{path}: too short for an HMHD1 header")
    header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
    if header["magic"] != MAGIC:
        raise SnapshotError(f"{path}: bad magic {header['magic']!r}")
    if header["version"] != VERSION:
        raise SnapshotError(f"{path}: unsupported version {header['version']}")
    codes = {code: mode for mode, code in DIM_MODE_CODES.items()}
    if int(header["dim_mode"]) not in codes:
        raise SnapshotError(f"{path}: unknown dimension mode {header['dim_mode']}")

    try:
        grid = Grid.create(int(header["points"]), codes[int(header["dim_mode"])])
    except ValueError:
        raise SnapshotError(f"{path}: invalid resolution {header['points']}") from None
    shape = (3, *grid.shape)
    count = int(np.prod(shape))
    expected = HEADER.itemsize + 2 * count * COEFFICIENT.itemsize
    if len(raw) != expected:
        raise SnapshotError(f"{path}: expected {expected} bytes for N={grid.points_per_axis}, found {len(raw)}")
    body = np.frombuffer(raw, dtype=COEFFICIENT, offset=HEADER.itemsize)

    u, B = (
        SpectralVectorField.from_coefficients(
            body[i * count : (i + 1) * count].reshape(shape).astype(np.complex128), grid
        )
        for i in range(2)
    )
    return Snapshot(grid=grid, alpha=float(header["alpha"]), time=float(header["time"]), u=u, B=B)
