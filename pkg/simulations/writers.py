"""Deterministic CSV and JSON emitters for scenario results."""
import json
import logging
import math
from pathlib import Path

import pandas as pd

from fourwave import __version__

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every double; NaN becomes an empty cell.
CSV_OPTIONS = {
    "index": False,
    "float_format": "%.17g",
    "na_rep": "",
    "lineterminator": "\r\n",
    "encoding": "utf-8",
}


class OutputSet:
    """Files written by one run, so a failed run can take them back."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.paths = []

    def path(self, name: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / name
        self.paths.append(path)
        return path

    def discard(self):
        for path in self.paths:
            try:
                path.unlink()
            except FileNotFoundError:
                continue
            logger.info(f"removed partial output {path}")
        self.paths = []


def write_frame(path: Path, frame: pd.DataFrame) -> Path:
    frame.to_csv(path, **CSV_OPTIONS)
    return path


def write_table(path: Path, header, rows) -> Path:
    return write_frame(path, pd.DataFrame(list(rows), columns=list(header)))


def record_frame(record) -> pd.DataFrame:
    """A TrajectoryRecord as a DataFrame: the coordinate column first, then its columns in order."""
    data = {record.coordinate_label: record.coordinate}
    data.update(record.columns)
    return pd.DataFrame(data, columns=record.labels)


def write_record(path: Path, record) -> Path:
    return write_frame(path, record_frame(record))


def json_safe(value):
    """Replace non-finite floats with None so the output stays valid JSON."""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path: Path, payload) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(json_safe(payload), handle, sort_keys=True, indent=2, default=str, allow_nan=False)
        handle.write("\n")
    return path


def write_manifest(outputs: OutputSet, config, wall_time: float) -> Path:
    written = [p.name for p in outputs.paths]
    path = outputs.path("manifest.json")
    return write_json(
        path,
        {
            "scenario": config.scenario,
            "config": config.params,
            "config_sha256": config.config_hash,
            "version": __version__,
            "workers": config.workers,
            "wall_time_seconds": round(wall_time, 6),
            "outputs": written,
        },
    )
