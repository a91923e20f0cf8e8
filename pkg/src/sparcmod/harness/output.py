"""CSV tables and the JSON run manifest."""

import json
import logging
from pathlib import Path
from typing import Iterable, Optional, Union

import pandas as pd

from sparcmod import __version__

logger = logging.getLogger(__name__)

MANIFEST_SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.10g"

RESULTS_COLUMNS = ["ebn0_db", "K", "M", "L", "n", "R_bits_per_dim", "omega", "lambda", "rho",
                   "operator", "trials", "ser", "ser_stderr", "ber", "ber_stderr", "fer",
                   "fer_stderr", "loc_err", "val_err", "mean_iters"]

_INTEGER_COLUMNS = ["K", "M", "L", "n", "omega", "lambda", "trials"]

PathLike = Union[str, Path]


def results_frame(points: Iterable) -> pd.DataFrame:
    """One row per sweep point, in the fixed results column order."""
    rows = []
    for p in points:
        row = p.to_dict()
        row["lambda"] = row.pop("Lambda")
        rows.append(row)
    frame = pd.DataFrame(rows, columns=RESULTS_COLUMNS)
    for col in _INTEGER_COLUMNS:
        frame[col] = frame[col].astype("Int64")
    return frame


def _write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %d row(s) to %s", len(frame), path)
    return path


def write_results_csv(points: Iterable, path: PathLike) -> Path:
    return _write_csv(results_frame(points), path)


def write_se_csv(trajectory, path: PathLike) -> Path:
    return _write_csv(trajectory.to_frame(), path)


def write_compare_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    return _write_csv(frame, path)


def build_manifest(config, points: Iterable, wall_time: float,
                   extra: Optional[dict] = None) -> dict:
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "version": __version__,
        "config": config.to_dict(),
        "results": [p.to_dict() for p in points],
        "wall_time_s": wall_time,
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(manifest: dict, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    logger.info("wrote manifest %s", path)
    return path


def write_sweep(config, sweep) -> dict:
    """Results CSV and manifest for a finished sweep, at the paths named in ``config.output``."""
    csv_path = write_results_csv(sweep.points, config.output.path("results_csv"))
    payload = config.payload()
    extra = {"payload_padding_bits": payload.padding} if payload is not None else None
    manifest_path = write_manifest(build_manifest(config, sweep.points, sweep.wall_time, extra),
                                   config.output.path("manifest_json"))
    return {"results_csv": csv_path, "manifest_json": manifest_path}
