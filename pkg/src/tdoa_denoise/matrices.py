"""Core algebra of skew-symmetric TDOA matrices.

A TDOA matrix collects every pairwise time difference of arrival of a
single wavefront at ``n`` synchronized sensors: entry ``(i, j)`` holds
``tau_i - tau_j`` in seconds.  Such a matrix is skew-symmetric, has rank
at most two, and is fully determined by a single n-vector (the "gauge
vector") orthogonal to the all-ones direction:

    M = x 1_h^T - 1_h x^T        with  1_h = ones(n)/sqrt(n),  x = M 1_h

``compose`` / ``decompose`` implement the two directions of that
bijection; they are the workhorse of every denoising routine in this
package.  Entrywise the composition reads ``M[i, j] = (x[i] - x[j]) /
sqrt(n)``, a convention pinned by the unit tests.

All functions are pure and operate on plain ``numpy`` arrays holding
seconds.  Matrices produced here are *exactly* skew-symmetric (IEEE
subtraction is sign-symmetric), so downstream validation can use exact
equality on internally constructed data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateMatrixError, InvalidMatrixError

# Absolute skew-symmetry tolerance (seconds) granted to matrices that
# arrive from parsers rather than from constructors in this module.
PARSED_SKEW_TOL = 1e-12

# Default relative tolerance of the consistency test.
CONSISTENCY_TOL = 1e-10


class SvdPair(NamedTuple):
    """Principal direction and singular value of a consistent TDOA matrix."""

    u_hat: np.ndarray
    sigma: float


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of :func:`is_consistent` with its residual diagnostics."""

    consistent: bool
    residual: float
    threshold: float

    def __bool__(self) -> bool:
        return self.consistent


def _unit_ones(n: int) -> np.ndarray:
    return np.ones(n) / np.sqrt(n)


def _as_square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidMatrixError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] < 2:
        raise InvalidMatrixError(f"{name} needs at least 2 sensors, got n={m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrixError(f"{name} contains non-finite entries")
    return m


def check_skew_symmetric(m: np.ndarray, tol: float = PARSED_SKEW_TOL) -> np.ndarray:
    """Validate shape, finiteness and skew-symmetry of ``m``.

    ``tol`` is an absolute bound in seconds on ``|m[i, j] + m[j, i]|``
    (which also covers the diagonal).  Raises
    :class:`~tdoa_denoise.errors.InvalidMatrixError` naming the worst
    offending entry.  Returns ``m`` as a float array for chaining.
    """
    m = _as_square(m)
    asym = m + m.T
    worst_flat = int(np.argmax(np.abs(asym)))
    i, j = np.unravel_index(worst_flat, asym.shape)
    worst = abs(asym[i, j])
    if worst > tol:
        raise InvalidMatrixError(
            f"matrix is not skew-symmetric: |m[{i},{j}] + m[{j},{i}]| = {worst:.3e} s "
            f"exceeds tolerance {tol:.3e} s"
        )
    return m


def from_toas(toas: np.ndarray) -> np.ndarray:
    """Build the full pairwise-difference matrix from times of arrival.

    ``out[i, j] = toas[i] - toas[j]`` (seconds); exactly skew-symmetric.
    """
    tau = np.asarray(toas, dtype=float)
    if tau.ndim != 1:
        raise InvalidMatrixError(f"times of arrival must be a 1-D vector, got shape {tau.shape}")
    if tau.size < 2:
        raise InvalidMatrixError(f"need at least 2 times of arrival, got {tau.size}")
    if not np.all(np.isfinite(tau)):
        raise InvalidMatrixError("times of arrival contain non-finite entries")
    return tau[:, None] - tau[None, :]


def compose(x: np.ndarray) -> np.ndarray:
    """Expand a gauge vector into its TDOA matrix.

    The input is first projected onto the hyperplane orthogonal to the
    all-ones direction (adding a constant to every coordinate does not
    change the composed matrix), which makes the map total.  Entrywise:
    ``out[i, j] = (x[i] - x[j]) / sqrt(n)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidMatrixError(f"gauge vector must be 1-D with n >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidMatrixError("gauge vector contains non-finite entries")
    xp = x - x.mean()
    return (xp[:, None] - xp[None, :]) / np.sqrt(x.size)


def decompose(m: np.ndarray) -> np.ndarray:
    """Recover the gauge vector of a skew-symmetric matrix.

    Computes ``m @ (ones(n)/sqrt(n))``, i.e. row sums scaled by
    ``1/sqrt(n)``.  For any skew-symmetric input the result is
    orthogonal to the all-ones direction up to rounding.
    """
    m = _as_square(m)
    return m @ _unit_ones(m.shape[0])


def svd_params(m: np.ndarray) -> SvdPair:
    """Principal direction and singular value of a consistent matrix.

    Returns ``(u_hat, sigma)`` with ``u_hat = x/|x|`` and ``sigma = |x|``
    for the gauge vector ``x``, so that

        sigma * (outer(u_hat, 1_h) - outer(1_h, u_hat))

    reconstructs ``m``.  Raises
    :class:`~tdoa_denoise.errors.DegenerateMatrixError` for the zero
    matrix, whose principal direction is undefined.
    """
    x = decompose(m)
    sigma = float(np.linalg.norm(x))
    if sigma == 0.0:
        raise DegenerateMatrixError(
            "zero matrix: singular value is 0 and the principal direction is undefined"
        )
    return SvdPair(u_hat=x / sigma, sigma=sigma)


def projection_residual(m: np.ndarray) -> float:
    """Frobenius distance between ``m`` and its closest consistent matrix."""
    return float(np.linalg.norm(m - compose(decompose(m))))


def is_consistent(m: np.ndarray, tol: float = CONSISTENCY_TOL) -> ConsistencyReport:
    """Check whether a skew-symmetric matrix is a valid TDOA matrix.

    The test compares ``m`` against its gauge round trip: consistent
    matrices are exact fixed points.  The residual check simultaneously
    detects rank above two and rank-2 impostors whose singular subspace
    does not contain the all-ones direction.

    ``tol`` is relative: the residual is compared against
    ``tol * max(1, ||m||_F)``.
    """
    m = _as_square(m)
    residual = projection_residual(m)
    threshold = tol * max(1.0, float(np.linalg.norm(m)))
    return ConsistencyReport(consistent=residual <= threshold, residual=residual, threshold=threshold)
