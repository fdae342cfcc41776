import logging
from pathlib import Path

from hallmhd.models.plan import Manifest

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"


def write_manifest(directory: Path, manifest: Manifest) -> Path:
    path = Path(directory) / MANIFEST_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2))
    logger.info("Manifest written to %s (exit status %d)", path, manifest.exit_status)
    return path


def read_manifest(directory: Path) -> Manifest:
    return Manifest.model_validate_json((Path(directory) / MANIFEST_FILE).read_text())
