"""Run manifest: everything needed to reproduce and audit one run."""

import hashlib
import json
import logging
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import ot
import scipy

from src import __version__
from src.experiment.config import RunConfig
from src.numerics.run_log import RunLog
from src.renderers.csv_tables import SCHEMA_VERSION

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def sha256_file(path) -> str:
    """Return the hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Resolved configuration, gate reports, diagnostics, versions and checksums."""

    config: RunConfig
    admissibility: Dict[str, Optional[Dict[str, Any]]] = field(default_factory=dict)
    diagnostics: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    distances: Dict[str, Any] = field(default_factory=dict)
    started: str = ""
    wall_clock_seconds: float = 0.0
    files: Dict[str, str] = field(default_factory=dict)

    def record_files(self, out_dir: Path, paths: List[Path]) -> None:
        """Checksum every output file, keyed by its path relative to out_dir."""
        for path in sorted(paths):
            self.files[str(Path(path).relative_to(out_dir))] = sha256_file(path)

    def to_dict(self, run_log: Optional[RunLog] = None) -> Dict[str, Any]:
        """Return the manifest as JSON-friendly values."""
        return {
            "temsp_version": __version__,
            "csv_schema_version": SCHEMA_VERSION,
            "versions": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "pot": ot.__version__,
            },
            "config": self.config.to_dict(),
            "admissibility": self.admissibility,
            "diagnostics": self.diagnostics,
            "distances": self.distances,
            "started": self.started,
            "wall_clock_seconds": self.wall_clock_seconds,
            "files": self.files,
            "events": run_log.to_records() if run_log else [],
        }

    def write(self, out_dir, run_log: Optional[RunLog] = None) -> Path:
        """Write ``manifest.json`` into out_dir and return its path."""
        path = Path(out_dir) / MANIFEST_NAME
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(run_log), handle, indent=2, sort_keys=True)
            handle.write("\n")
        logger.info("Wrote run manifest %s", path)
        return path


def utc_now() -> str:
    """Return the current UTC time in ISO format."""
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
