"""
Metric rows, their CSV files and the per-beta aggregate over seeds.
"""

import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from priorlab.errors import MetricError

PathLike = Union[str, Path]

METRIC_FILE = "metrics.csv"
EXTRA_FILE = "metrics_extra.csv"
CONFIG_COLUMNS = ["run_id", "beta", "latent_dim", "prior", "seed"]
METRIC_COLUMNS = [
    "frechet",
    "separability_bits",
    "ppl_z0",
    "ppl_zT",
    "diversity",
    "recon_mse",
    "latent_frechet",
]
REPORT_COLUMNS = CONFIG_COLUMNS + METRIC_COLUMNS
EXTRA_COLUMNS = ["run_id", "name", "value"]
GROUP_COLUMNS = ["beta", "latent_dim", "prior"]


class MetricReport(BaseModel):
    """One evaluated run. ``None`` marks a metric that failed."""

    model_config = ConfigDict(extra="forbid")

    run_id: str
    beta: float
    latent_dim: int
    prior: str
    seed: int
    frechet: Optional[float] = None
    separability_bits: Optional[float] = None
    ppl_z0: Optional[float] = None
    ppl_zT: Optional[float] = None
    diversity: Optional[float] = None
    recon_mse: Optional[float] = None
    latent_frechet: Optional[float] = None
    extra: Dict[str, float] = Field(default_factory=dict)

    @field_validator(*METRIC_COLUMNS)
    @classmethod
    def _finite_or_failed(
        cls, value: Optional[float]
    ) -> Optional[float]:
        if value is None or not math.isfinite(value):
            return None
        return float(value)

    def row(self) -> Dict[str, object]:
        return {column: getattr(self, column) for column in REPORT_COLUMNS}

    def failed(self) -> List[str]:
        return [c for c in METRIC_COLUMNS if getattr(self, c) is None]


def reports_frame(reports: Iterable[MetricReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [report.row() for report in reports], columns=REPORT_COLUMNS
    )


def write_reports(
    reports: Sequence[MetricReport], out_dir: PathLike
) -> Path:
    """Write ``metrics.csv`` and, if any report has extras, the
    long-format ``metrics_extra.csv`` next to it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / METRIC_FILE
    reports_frame(reports).to_csv(
        path, index=False, na_rep="", float_format="%.10g"
    )
    extras = [
        (report.run_id, name, value)
        for report in reports
        for name, value in sorted(report.extra.items())
    ]
    if extras:
        pd.DataFrame(extras, columns=EXTRA_COLUMNS).to_csv(
            out_dir / EXTRA_FILE,
            index=False,
            na_rep="",
            float_format="%.10g",
        )
    return path


def read_reports(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    frame = pd.read_csv(path)
    if list(frame.columns) != REPORT_COLUMNS:
        raise MetricError(
            f"{path.parent}: unexpected columns {list(frame.columns)}"
        )
    return frame


def collect_reports(run_dirs: Sequence[PathLike]) -> pd.DataFrame:
    """
    Concatenate run tables. A directory holding its own ``metrics.csv``
    contributes that file; otherwise every ``metrics.csv`` below it.
    """
    frames = []
    for run_dir in run_dirs:
        run_dir = Path(run_dir)
        if not run_dir.is_dir():
            raise MetricError(f"{run_dir}: not a directory")
        own = run_dir / METRIC_FILE
        files = [own] if own.is_file() else sorted(
            run_dir.rglob(METRIC_FILE)
        )
        if not files:
            raise MetricError(f"{run_dir}: no {METRIC_FILE} found")
        for path in files:
            frame = read_reports(path)
            if frame.empty:
                raise MetricError(f"{path.parent}: {METRIC_FILE} is empty")
            frames.append(frame)
    if not frames:
        raise MetricError("no run directories given")
    return pd.concat(frames, ignore_index=True)


def aggregate_reports(frame: pd.DataFrame) -> pd.DataFrame:
    """
    Mean and population std across seeds for each beta (and each
    latent dimension and prior, when a table mixes several).

    Columns are ``beta, latent_dim, prior, runs`` followed by
    ``<metric>_mean`` and ``<metric>_std`` in report order; failed
    metrics are skipped.
    """
    frame = frame.astype({column: float for column in METRIC_COLUMNS})
    grouped = frame.groupby(GROUP_COLUMNS, sort=True)
    out = pd.DataFrame({"runs": grouped.size()})
    for column in METRIC_COLUMNS:
        values = grouped[column]
        out[f"{column}_mean"] = values.mean()
        out[f"{column}_std"] = values.std(ddof=0)
    logger.debug(f"aggregated {len(frame)} rows into {len(out)} groups")
    return out.reset_index()


def write_aggregate(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, na_rep="", float_format="%.10g")
    return path
