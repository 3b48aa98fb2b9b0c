"""Monte-Carlo benchmark grids over noise, outliers, missing data and budget.

For every grid cell (noise sigma, outlier count, missing fraction, k)
the engine runs a fixed number of seeded trials through each selected
estimation pipeline and records the mean SNR of the non-redundant set
and the mean localization error.  Per-trial randomness depends only on
(seed, noise index, outlier index, missing index, run index) - never on
k or on the pipeline - so rows that differ only in those two columns
are paired, trial for trial.

Failures (non-recoverable masks, degenerate localizations, undefined
metrics) never abort a sweep: the failing trial is dropped from that
cell's mean and counted in the ``failures`` column; a cell with no
surviving trials records ``nan``.

One CSV per metric is written with the full cell coordinates on every
row.  With ``jobs=1`` the output is byte-reproducible for a fixed
config; parallel cells are reassembled in deterministic order.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .completion import complete, robust_complete
from .denoise import denoise_closed_form
from .errors import LocalizationError, NonRecoverableMaskError, UndefinedMetricError
from .localize import chan_ho_locate
from .robust import robust_denoise
from .scenes import SPEED_OF_SOUND, CorruptionSpec, Trial, random_scene, simulate_trial, snr_db

PIPELINES = ("raw", "denoise", "robust_denoise", "complete", "robust_complete")

SNR_CSV = "snr_db.csv"
LOC_CSV = "localization_error_mm.csv"


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition; times in seconds, distances in meters."""

    n: int = 10
    runs: int = 20
    noise_sigmas: tuple[float, ...] = (1e-6,)
    outlier_counts: tuple[int, ...] = (0,)
    missing_fractions: tuple[float, ...] = (0.0,)
    k_values: tuple[int, ...] = (8,)
    eps: float = 1e-10
    max_iter: int = 1000
    seed: int = 0
    sensor_cube_side: float = 1.0
    source_cube_side: float = 2.0
    c: float = SPEED_OF_SOUND
    pipelines: tuple[str, ...] = PIPELINES

    def __post_init__(self):
        for name in self.pipelines:
            if name not in PIPELINES:
                raise ValueError(f"unknown pipeline {name!r}; choose from {PIPELINES}")
        if self.n < 2 or self.runs < 1:
            raise ValueError("need n >= 2 and runs >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        coerced = dict(data)
        for key in ("noise_sigmas", "outlier_counts", "missing_fractions", "k_values", "pipelines"):
            if key in coerced:
                coerced[key] = tuple(coerced[key])
        return cls(**coerced)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SweepConfig":
        path = Path(path)
        if path.suffix.lower() == ".toml":
            try:
                import tomllib as toml
            except ImportError:
                import tomli as toml
            data = toml.loads(path.read_text())
        else:
            data = json.loads(path.read_text())
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out


@dataclass
class CellStats:
    """Accumulated per-(cell, pipeline) metric values and failure counts."""

    snr_values: list[float]
    loc_values: list[float]
    snr_failures: int
    loc_failures: int

    def mean_snr(self) -> float:
        return float(np.mean(self.snr_values)) if self.snr_values else math.nan

    def mean_loc(self) -> float:
        return float(np.mean(self.loc_values)) if self.loc_values else math.nan


@dataclass
class SweepResult:
    """Paths of the written CSV files plus aggregate failure counts."""

    snr_path: Path
    loc_path: Path
    cells: int
    rows: int
    snr_failures: int
    loc_failures: int


def apply_pipeline(name: str, trial: Trial, k: int, eps: float, max_iter: int) -> np.ndarray:
    """Run one estimation pipeline on a trial; returns the estimated matrix.

    Pipelines that are unaware of the mask see the corrupted matrix
    with missing entries zero-filled, which is exactly the naive
    baseline the mask-aware pipelines are compared against.
    """
    zero_filled = trial.mask.entries * trial.corrupted
    if name == "raw":
        return zero_filled
    if name == "denoise":
        return denoise_closed_form(zero_filled)
    if name == "robust_denoise":
        return robust_denoise(zero_filled, k=k, eps=eps, max_iter=max_iter).m_star
    if name == "complete":
        return complete(trial.corrupted, trial.mask)
    if name == "robust_complete":
        return robust_complete(trial.corrupted, trial.mask, k=k, eps=eps, max_iter=max_iter).m_star
    raise ValueError(f"unknown pipeline {name!r}")


def _run_cell(config: SweepConfig, cell: tuple[int, int, int, int]) -> dict[str, CellStats]:
    i_sig, i_out, i_miss, i_k = cell
    sigma = config.noise_sigmas[i_sig]
    outliers = config.outlier_counts[i_out]
    missing = config.missing_fractions[i_miss]
    k = config.k_values[i_k]
    stats = {name: CellStats([], [], 0, 0) for name in config.pipelines}
    for run in range(config.runs):
        entropy = (config.seed, i_sig, i_out, i_miss, run)
        scene = random_scene(
            config.n,
            sensor_cube_side=config.sensor_cube_side,
            source_cube_side=config.source_cube_side,
            seed=entropy,
        )
        spec = CorruptionSpec(
            noise_sigma=sigma,
            outlier_count=outliers,
            missing_fraction=missing,
            rng_seed=entropy,
        )
        trial = simulate_trial(scene, spec)
        for name in config.pipelines:
            cell_stats = stats[name]
            try:
                estimate = apply_pipeline(name, trial, k, config.eps, config.max_iter)
            except NonRecoverableMaskError:
                cell_stats.snr_failures += 1
                cell_stats.loc_failures += 1
                continue
            try:
                cell_stats.snr_values.append(snr_db(trial.ground_truth, estimate))
            except UndefinedMetricError:
                cell_stats.snr_failures += 1
            try:
                position = chan_ho_locate(estimate[1:, 0], scene.sensors, scene.c)
                cell_stats.loc_values.append(1e3 * float(np.linalg.norm(position - scene.source)))
            except LocalizationError:
                cell_stats.loc_failures += 1
    return stats


def _cell_grid(config: SweepConfig) -> list[tuple[int, int, int, int]]:
    return list(
        product(
            range(len(config.noise_sigmas)),
            range(len(config.outlier_counts)),
            range(len(config.missing_fractions)),
            range(len(config.k_values)),
        )
    )


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_sweep(config: SweepConfig, out_dir: Union[str, Path], jobs: int = 1) -> SweepResult:
    """Execute the grid and write one CSV per metric into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = _cell_grid(config)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, [config] * len(cells), cells))
    else:
        results = [_run_cell(config, cell) for cell in cells]

    header = ["noise_sigma_s", "outlier_count", "missing_fraction", "k", "pipeline", "seed_base", "runs"]
    snr_path = out_dir / SNR_CSV
    loc_path = out_dir / LOC_CSV
    rows = 0
    snr_failures = 0
    loc_failures = 0
    with open(snr_path, "w", newline="") as snr_file, open(loc_path, "w", newline="") as loc_file:
        snr_writer = csv.writer(snr_file, lineterminator="\n")
        loc_writer = csv.writer(loc_file, lineterminator="\n")
        snr_writer.writerow(header + ["mean_snr_db", "failures"])
        loc_writer.writerow(header + ["mean_localization_error_mm", "failures"])
        for cell, stats in zip(cells, results):
            i_sig, i_out, i_miss, i_k = cell
            coords = [
                _format(float(config.noise_sigmas[i_sig])),
                _format(int(config.outlier_counts[i_out])),
                _format(float(config.missing_fractions[i_miss])),
                _format(int(config.k_values[i_k])),
            ]
            for name in config.pipelines:
                cell_stats = stats[name]
                base = coords + [name, _format(config.seed), _format(config.runs)]
                snr_writer.writerow(base + [_format(cell_stats.mean_snr()), _format(cell_stats.snr_failures)])
                loc_writer.writerow(base + [_format(cell_stats.mean_loc()), _format(cell_stats.loc_failures)])
                snr_failures += cell_stats.snr_failures
                loc_failures += cell_stats.loc_failures
                rows += 1

    return SweepResult(
        snr_path=snr_path,
        loc_path=loc_path,
        cells=len(cells),
        rows=rows,
        snr_failures=snr_failures,
        loc_failures=loc_failures,
    )


def load_rows(path: Union[str, Path]) -> list[dict]:
    """Read a sweep CSV back into typed row dicts (floats where sensible)."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        rows = []
        for raw in reader:
            row: dict = dict(raw)
            for key in ("noise_sigma_s", "missing_fraction", "mean_snr_db", "mean_localization_error_mm"):
                if key in row and row[key] is not None:
                    row[key] = float(row[key])
            for key in ("outlier_count", "k", "runs", "failures", "seed_base"):
                if key in row and row[key] is not None:
                    row[key] = int(row[key])
            rows.append(row)
    return rows
