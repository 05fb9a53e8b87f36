import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..core.config import CASE_TOL, CSV_FLOAT_FORMAT, OUTPUT_FORMATS
from ..core.exceptions import DomainError
from ..core.logger import get_logger
from ..models.schemas import EHLevels, LevelSet, MetricParams, Trajectory
from . import eguchi_hanson as eh
from .reduced_flow import tau_of_t

logger = get_logger(__name__)


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """One row per sample: lambda, the state, the first integrals and their drift from the first sample."""
    rows = []
    reference = traj.samples[0].integrals
    for sample in traj.samples:
        row = {"lambda": sample.lam}
        row.update(zip(traj.state_names, sample.state))
        if sample.tau is not None:
            row["tau"] = sample.tau
        for name, value in sample.integrals.items():
            row[name] = value
        for name, value in sample.integrals.items():
            row[f"{name}_drift"] = abs(value - reference[name]) / max(abs(reference[name]), 1.0)
        rows.append(row)
    return pd.DataFrame(rows)


def tau_frame(levels: LevelSet, params: MetricParams, grid: Sequence[float]) -> pd.DataFrame:
    """tau(t) measured from the first grid point, by quadrature along one radial branch."""
    base = float(grid[0])
    taus = [tau_of_t(levels, params, base, float(t)) for t in grid]
    return pd.DataFrame({"t": np.asarray(grid, dtype=float), "tau": taus})


def eh_tau_frame(levels: EHLevels, grid: Sequence[float]) -> pd.DataFrame:
    """tau(rho) from the first grid point by quadrature, the closed form and their difference."""
    base = float(grid[0])
    gamma = float(np.sqrt(levels.gamma2))
    target = 2.0 * levels.e * gamma
    degenerate = abs(levels.m3) <= CASE_TOL * max(1.0, np.sqrt(levels.mu2)) and abs(levels.mu2 - target) <= CASE_TOL * max(1.0, target)
    closed_form = eh.eh_tau_degenerate if degenerate else eh.eh_tau_closed

    origin = closed_form(levels, base)
    quad, closed = [], []
    for rho in grid:
        quad.append(eh.eh_tau_quadrature(levels, base, float(rho)))
        closed.append(closed_form(levels, float(rho)) - origin)
    quad, closed = np.array(quad), np.array(closed)
    frame = pd.DataFrame({"rho": np.asarray(grid, dtype=float), "tau": quad, "tau_closed": closed, "abs_diff": np.abs(quad - closed)})
    logger.info(f"EH tau table: {len(frame)} rows, max |quadrature - closed form| = {frame['abs_diff'].max():.3e}")
    return frame


def _metadata_lines(meta: Optional[Dict]) -> List[str]:
    return [f"# {key}: {value}" for key, value in (meta or {}).items()]


def save_csv(df: pd.DataFrame, path: Path, meta: Optional[Dict] = None) -> Path:
    """CSV with '#'-prefixed metadata lines, a header row and round-trip-safe floats."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for line in _metadata_lines(meta):
            handle.write(line + "\n")
        df.to_csv(handle, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Created CSV file: {path}")
    return path


def save_jsonl(df: pd.DataFrame, path: Path, meta: Optional[Dict] = None) -> Path:
    """One JSON object per row; the first line holds the metadata when given."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        if meta:
            handle.write(json.dumps({"metadata": meta}, default=str) + "\n")
        for record in df.to_dict(orient="records"):
            # json floats use repr, which round-trips
            handle.write(json.dumps({k: float(v) if isinstance(v, (np.floating, float)) else v for k, v in record.items()}) + "\n")
    logger.info(f"Created JSON-lines file: {path}")
    return path


def save_table(df: pd.DataFrame, path: Path, fmt: str = "csv", meta: Optional[Dict] = None) -> Path:
    if fmt not in OUTPUT_FORMATS:
        raise DomainError(f"Unknown output format '{fmt}', choose from {OUTPUT_FORMATS}")
    if fmt == "csv":
        return save_csv(df, path, meta)
    return save_jsonl(df, path, meta)


def save_report(report: BaseModel, path: Path) -> Path:
    """Pretty-printed JSON dump of a pydantic report."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote report: {path}")
    return path
