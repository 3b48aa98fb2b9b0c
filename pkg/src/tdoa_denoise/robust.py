"""Outlier-resistant denoising by alternating projection and hard thresholding.

Gross errors (spurious correlation peaks, dropouts) are modeled as a
sparse skew-symmetric matrix added on top of the consistent part plus
noise.  The estimator alternates two globally-solvable subproblems:

    M_t = closest consistent matrix to (m_tilde - S_{t-1})
    S_t = hard threshold of (m_tilde - M_t) keeping the k strongest pairs

Each step minimizes the shared objective ||m_tilde - M - S||_F^2 over
its own variable, so the objective never increases.  Convergence is to
a fixed point that need not be the global optimum; non-convergence
within the iteration budget is reported, never silent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMatrixError
from .matrices import check_skew_symmetric, compose, decompose

STOP_MODES = ("change", "level")


@dataclass(frozen=True)
class OutlierMatrix:
    """Sparse skew-symmetric matrix of detected outliers.

    ``support`` holds both orientations of every kept pair; exact-zero
    entries are never part of the support.  ``budget_clamped`` flags
    that the requested budget exceeded the number of off-diagonal pairs
    and was clamped to keep everything.
    """

    n: int
    entries: np.ndarray
    support: frozenset = field(default_factory=frozenset)
    budget_clamped: bool = False

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.entries))


@dataclass
class RobustResult:
    """Outcome of an alternating robust estimation run."""

    m_star: np.ndarray
    s_star: OutlierMatrix
    iterations: int
    objective_trace: list[float]
    converged: bool


def _upper_pairs_by_magnitude(x: np.ndarray) -> list[tuple[int, int]]:
    """Upper-triangle pairs sorted by |value| descending, ties by (row, col)."""
    iu, ju = np.triu_indices(x.shape[0], k=1)
    order = np.lexsort((ju, iu, -np.abs(x[iu, ju])))
    return [(int(iu[t]), int(ju[t])) for t in order]


def hard_threshold_pairs(residual: np.ndarray, k: int) -> OutlierMatrix:
    """Keep the ``k`` strongest symmetric pairs of a skew-symmetric matrix.

    Keeps the 2k entries of largest absolute value (pairs share a
    magnitude, so they are kept or dropped together) and zeroes the
    rest.  Ties between distinct pairs are broken toward the smaller
    (row, col) index so results are platform-independent.  A budget
    larger than the number of pairs is clamped and flagged.
    """
    x = check_skew_symmetric(residual)
    n = x.shape[0]
    if k < 0:
        raise InvalidMatrixError(f"pair budget must be nonnegative, got k={k}")
    npairs = n * (n - 1) // 2
    clamped = k > npairs
    kept = min(k, npairs)
    out = np.zeros_like(x)
    support = set()
    for i, j in _upper_pairs_by_magnitude(x)[:kept]:
        if x[i, j] == 0.0:
            break  # remaining candidates are all zero
        out[i, j] = x[i, j]
        out[j, i] = x[j, i]
        support.add((i, j))
        support.add((j, i))
    return OutlierMatrix(n=n, entries=out, support=frozenset(support), budget_clamped=clamped)


def robust_denoise(
    m_tilde: np.ndarray,
    k: int,
    eps: float = 1e-10,
    max_iter: int = 1000,
    stop: str = "change",
) -> RobustResult:
    """Separate a consistent TDOA matrix from at most ``k`` outlier pairs.

    Alternates the consistent-projection update with hard thresholding
    of the residual until the normalized objective
    ``||m_tilde - M - S||_F^2 / ||m_tilde||_F^2`` stabilizes.

    ``stop`` selects the rule: ``"change"`` (default) halts when the
    objective changes by less than ``eps`` between iterations, which
    always terminates even when the noise floor keeps the objective
    itself above ``eps``; ``"level"`` halts when the objective drops
    below ``eps``.
    """
    m = check_skew_symmetric(m_tilde)
    if eps <= 0:
        raise InvalidMatrixError(f"eps must be positive, got {eps}")
    if max_iter < 1:
        raise InvalidMatrixError(f"max_iter must be >= 1, got {max_iter}")
    if stop not in STOP_MODES:
        raise InvalidMatrixError(f"stop must be one of {STOP_MODES}, got {stop!r}")

    n = m.shape[0]
    denom = float(np.sum(m * m))
    if denom == 0.0:
        empty = OutlierMatrix(n=n, entries=np.zeros_like(m))
        return RobustResult(
            m_star=np.zeros_like(m),
            s_star=empty,
            iterations=0,
            objective_trace=[0.0],
            converged=True,
        )

    s = OutlierMatrix(n=n, entries=np.zeros_like(m))
    m_star = m
    trace: list[float] = []
    converged = False
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        m_star = compose(decompose(m - s.entries))
        s = hard_threshold_pairs(m - m_star, k)
        obj = float(np.sum((m - m_star - s.entries) ** 2)) / denom
        trace.append(obj)
        if stop == "level":
            if obj < eps:
                converged = True
                break
        elif len(trace) >= 2 and abs(trace[-2] - obj) < eps:
            converged = True
            break

    return RobustResult(
        m_star=m_star,
        s_star=s,
        iterations=iterations,
        objective_trace=trace,
        converged=converged,
    )
