"""Synthetic scenes, measurement corruption, and the SNR quality metric.

A scene is one source plus ``n`` synchronized sensors in 3-D; its
exact times of arrival generate a consistent ground-truth TDOA matrix.
:func:`corrupt` then degrades that truth the way the benchmark
protocol prescribes:

* white Gaussian noise on every pairwise measurement,
* a chosen number of entries *replaced* (not perturbed) by draws that
  are unrelated to the true values, which makes them true outliers,
* a fraction of pairs marked missing in the availability mask, chosen
  independently of the outlier positions (a discarded measurement may
  well have been an outlier).

Randomness is split into four named streams (scene, noise, outlier,
mask) derived from one seed via ``numpy.random.SeedSequence`` spawn
keys, so each corruption axis can be varied while holding the others
fixed.  Every generated object is a pure function of (config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .completion import Mask
from .errors import InvalidMatrixError, UndefinedMetricError
from .matrices import from_toas

#: Default propagation speed (speed of sound in air), m/s.
SPEED_OF_SOUND = 343.313

# Stream identifiers of the seed-splitting scheme.
STREAM_SCENE = 0
STREAM_NOISE = 1
STREAM_OUTLIER = 2
STREAM_MASK = 3

Seed = Union[int, Sequence[int]]

_MIN_SENSOR_SEPARATION = 1e-6  # meters


def stream_rng(seed: Seed, stream: int) -> np.random.Generator:
    """Generator for one of the named random streams of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


@dataclass(frozen=True)
class Scene:
    """One source and ``n`` pairwise-distinct sensors, positions in meters."""

    sensors: np.ndarray
    source: np.ndarray
    c: float = SPEED_OF_SOUND

    def __post_init__(self):
        sensors = np.asarray(self.sensors, dtype=float)
        source = np.asarray(self.source, dtype=float)
        if sensors.ndim != 2 or sensors.shape[1] != 3:
            raise InvalidMatrixError(f"sensors must have shape (n, 3), got {sensors.shape}")
        if sensors.shape[0] < 2:
            raise InvalidMatrixError(f"need at least 2 sensors, got {sensors.shape[0]}")
        if source.shape != (3,):
            raise InvalidMatrixError(f"source must have shape (3,), got {source.shape}")
        if not (np.all(np.isfinite(sensors)) and np.all(np.isfinite(source))):
            raise InvalidMatrixError("scene positions contain non-finite values")
        if not self.c > 0:
            raise InvalidMatrixError(f"propagation speed must be positive, got {self.c}")
        diff = sensors[:, None, :] - sensors[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= _MIN_SENSOR_SEPARATION:
            raise InvalidMatrixError(
                f"sensors are not pairwise distinct (min separation {dist.min():.3e} m)"
            )
        object.__setattr__(self, "sensors", sensors)
        object.__setattr__(self, "source", source)

    @property
    def n(self) -> int:
        return self.sensors.shape[0]


@dataclass(frozen=True)
class CorruptionSpec:
    """How to degrade a ground-truth matrix; all times in seconds."""

    noise_sigma: float = 0.0
    outlier_count: int = 0
    outlier_sigma: float = 1e-4
    missing_fraction: float = 0.0
    rng_seed: Seed = 0

    def __post_init__(self):
        if self.noise_sigma < 0 or self.outlier_sigma < 0:
            raise InvalidMatrixError("noise/outlier sigma must be nonnegative")
        if self.outlier_count < 0:
            raise InvalidMatrixError("outlier count must be nonnegative")
        if not 0.0 <= self.missing_fraction < 1.0:
            raise InvalidMatrixError("missing fraction must lie in [0, 1)")


@dataclass
class Trial:
    """Ground truth plus one corrupted realization of it."""

    ground_truth: np.ndarray
    corrupted: np.ndarray
    mask: Mask
    injected_outlier_pairs: tuple[tuple[int, int], ...]
    scene: Optional[Scene] = None
    spec: Optional[CorruptionSpec] = None


def random_scene(
    n: int,
    sensor_cube_side: float = 1.0,
    source_cube_side: float = 2.0,
    seed: Seed = 0,
    max_retries: int = 100,
) -> Scene:
    """Scene with sensors and source uniform in origin-centered cubes.

    Deterministic for a fixed seed.  Coincident sensors (measure-zero,
    but possible with adversarial seeds) trigger regeneration, bounded
    by ``max_retries``.
    """
    if n < 2:
        raise InvalidMatrixError(f"need at least 2 sensors, got n={n}")
    rng = stream_rng(seed, STREAM_SCENE)
    for _ in range(max_retries):
        sensors = rng.uniform(-sensor_cube_side / 2, sensor_cube_side / 2, size=(n, 3))
        source = rng.uniform(-source_cube_side / 2, source_cube_side / 2, size=3)
        try:
            return Scene(sensors=sensors, source=source)
        except InvalidMatrixError:
            continue
    raise InvalidMatrixError(f"failed to draw a non-degenerate scene in {max_retries} tries")


def toa_vector(scene: Scene) -> np.ndarray:
    """Exact times of arrival ``|source - sensor_i| / c`` in seconds."""
    return np.linalg.norm(scene.source - scene.sensors, axis=1) / scene.c


def ground_truth_tdoa(scene: Scene) -> np.ndarray:
    """Noise-free TDOA matrix of the scene; consistent by construction."""
    return from_toas(toa_vector(scene))


def missing_pair_count(n: int, fraction: float) -> int:
    """Number of masked pairs for a missing fraction (rounded up)."""
    return math.ceil(fraction * (n * (n - 1) // 2))


def corrupt(truth: np.ndarray, spec: CorruptionSpec, scene: Optional[Scene] = None) -> Trial:
    """Apply noise, replacement outliers, and a missing mask to ``truth``.

    Upper-triangle entries get independent Gaussian noise mirrored with
    opposite sign.  Outlier positions are then drawn without
    replacement and their entries overwritten by fresh draws.  Finally
    ``ceil(missing_fraction * npairs)`` pairs are masked, drawn from a
    stream independent of the outlier stream.
    """
    truth = np.asarray(truth, dtype=float)
    n = truth.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    npairs = iu.size
    n_missing = missing_pair_count(n, spec.missing_fraction)
    if spec.outlier_count + n_missing > npairs:
        raise InvalidMatrixError(
            f"corruption budget too large: {spec.outlier_count} outliers + "
            f"{n_missing} missing > {npairs} pairs"
        )

    corrupted = truth.copy()
    noise = stream_rng(spec.rng_seed, STREAM_NOISE).normal(0.0, spec.noise_sigma, size=npairs)
    corrupted[iu, ju] += noise
    corrupted[ju, iu] = -corrupted[iu, ju]

    injected: tuple[tuple[int, int], ...] = ()
    if spec.outlier_count > 0:
        out_rng = stream_rng(spec.rng_seed, STREAM_OUTLIER)
        picks = out_rng.choice(npairs, size=spec.outlier_count, replace=False)
        values = out_rng.normal(0.0, spec.outlier_sigma, size=spec.outlier_count)
        for t, value in zip(picks, values):
            i, j = int(iu[t]), int(ju[t])
            corrupted[i, j] = value
            corrupted[j, i] = -value
        injected = tuple(sorted((int(iu[t]), int(ju[t])) for t in picks))

    if n_missing > 0:
        mask_rng = stream_rng(spec.rng_seed, STREAM_MASK)
        gone = mask_rng.choice(npairs, size=n_missing, replace=False)
        mask = Mask.from_missing_pairs(n, [(int(iu[t]), int(ju[t])) for t in gone])
    else:
        mask = Mask.full(n)

    return Trial(
        ground_truth=truth,
        corrupted=corrupted,
        mask=mask,
        injected_outlier_pairs=injected,
        scene=scene,
        spec=spec,
    )


def simulate_trial(scene: Scene, spec: CorruptionSpec) -> Trial:
    """Generate ground truth from ``scene`` and corrupt it per ``spec``."""
    return corrupt(ground_truth_tdoa(scene), spec, scene=scene)


def nonredundant_column(m: np.ndarray) -> np.ndarray:
    """The n-1 delays referenced to sensor 0 (first column, rows 1..n-1)."""
    return np.asarray(m, dtype=float)[1:, 0]


def snr_db(truth: np.ndarray, estimate: np.ndarray) -> float:
    """Signal-to-noise ratio (dB) of the estimated non-redundant set.

    ``10 log10(sum_i truth[i,0]^2 / sum_i (estimate[i,0]-truth[i,0])^2)``
    over rows ``i >= 1``.  A perfect estimate returns ``math.inf``; an
    all-zero reference column leaves the ratio undefined and raises
    :class:`~tdoa_denoise.errors.UndefinedMetricError`.
    """
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.shape != estimate.shape:
        raise InvalidMatrixError(
            f"shape mismatch: truth {truth.shape} vs estimate {estimate.shape}"
        )
    ref = nonredundant_column(truth)
    err = nonredundant_column(estimate) - ref
    signal = float(np.sum(ref * ref))
    if signal == 0.0:
        raise UndefinedMetricError("reference non-redundant set is identically zero")
    noise = float(np.sum(err * err))
    if noise == 0.0:
        return math.inf
    return 10.0 * math.log10(signal / noise)
