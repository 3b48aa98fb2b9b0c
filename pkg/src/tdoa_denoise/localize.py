"""Closed-form source localization from reference-sensor delays.

Implements the classic two-stage weighted-least-squares hyperbolic
positioning estimator.  Range differences to the reference sensor
linearize once the range to the reference itself is treated as an
extra unknown; a second solve then exploits the quadratic dependence
between that range and the coordinates.

Variant fixed here (the estimator leaves a few choices open): identity
weighting on the first pass refined once with inverse-squared
estimated ranges, and per-coordinate sign selection by proximity to
the first-stage estimate.  With exact inputs the estimator is exact,
which the tests pin down to micrometer level.
"""

from __future__ import annotations

import numpy as np

from .errors import LocalizationError


def _solve_weighted(design: np.ndarray, rhs: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve the weighted normal equations; return (solution, normal matrix)."""
    normal = design.T @ (weights[:, None] * design)
    try:
        sol = np.linalg.solve(normal, design.T @ (weights * rhs))
    except np.linalg.LinAlgError as exc:
        raise LocalizationError(f"normal equations are singular: {exc}") from exc
    return sol, normal


def chan_ho_locate(tdoa_column: np.ndarray, sensors: np.ndarray, c: float) -> np.ndarray:
    """Estimate the 3-D source position from delays w.r.t. sensor 0.

    ``tdoa_column[i-1]`` holds ``tau_i - tau_0`` in seconds for
    ``i = 1..n-1``; ``sensors`` is the (n, 3) array of positions in
    meters.  Requires ``n >= 5`` (four independent range differences
    for four scalar unknowns).  Raises
    :class:`~tdoa_denoise.errors.LocalizationError` on degenerate
    geometry (rank-deficient or singular systems).
    """
    sensors = np.asarray(sensors, dtype=float)
    delays = np.asarray(tdoa_column, dtype=float)
    if sensors.ndim != 2 or sensors.shape[1] != 3:
        raise LocalizationError(f"sensors must have shape (n, 3), got {sensors.shape}")
    n = sensors.shape[0]
    if n < 5:
        raise LocalizationError(f"3-D positioning needs at least 5 sensors, got n={n}")
    if delays.shape != (n - 1,):
        raise LocalizationError(
            f"expected {n - 1} delays referenced to sensor 0, got shape {delays.shape}"
        )
    if not (np.all(np.isfinite(sensors)) and np.all(np.isfinite(delays)) and c > 0):
        raise LocalizationError("non-finite inputs or non-positive propagation speed")

    ref = sensors[0]
    others = sensors[1:]
    range_diff = c * delays  # r_i - r_0, meters

    # Stage 1: coordinates and reference range as independent unknowns.
    design = np.hstack([others - ref, range_diff[:, None]])
    rhs = 0.5 * (np.sum(others**2, axis=1) - np.sum(ref**2) - range_diff**2)
    if np.linalg.matrix_rank(design) < 4:
        raise LocalizationError("degenerate sensor geometry: rank-deficient design matrix")

    first, _ = _solve_weighted(design, rhs, np.ones(n - 1))

    # One weighting refinement: inverse squared estimated ranges.
    ranges = np.linalg.norm(first[:3] - others, axis=1)
    floor = 1e-6 * max(1.0, float(ranges.max()))
    ranges = np.maximum(ranges, floor)
    stage1, normal1 = _solve_weighted(design, rhs, 1.0 / ranges**2)

    # Stage 2: enforce the quadratic tie between coordinates and range.
    offset = stage1[:3] - ref
    ref_range = stage1[3]
    rhs2 = np.concatenate([offset**2, [ref_range**2]])
    design2 = np.vstack([np.eye(3), np.ones(3)])
    scale = max(1.0, float(np.max(np.abs(offset))), abs(float(ref_range)))
    diag = np.concatenate([offset, [ref_range]])
    signs = np.where(diag >= 0, 1.0, -1.0)
    diag = signs * np.maximum(np.abs(diag), 1e-9 * scale)
    b_inv = np.diag(1.0 / diag)
    weight2 = 0.25 * b_inv @ normal1 @ b_inv
    normal2 = design2.T @ weight2 @ design2
    try:
        squared = np.linalg.solve(normal2, design2.T @ (weight2 @ rhs2))
    except np.linalg.LinAlgError as exc:
        raise LocalizationError(f"second-stage system is singular: {exc}") from exc

    position = ref + np.sign(offset) * np.sqrt(np.maximum(squared, 0.0))
    if not np.all(np.isfinite(position)):
        raise LocalizationError("position estimate is non-finite")
    return position
