"""Completion of TDOA matrices with known missing entries.

When some pairwise measurements are unavailable, the least-squares fit
of a consistent matrix to the *visible* entries still has a closed
form.  With ``L`` the symmetric 0/1 availability matrix (unit
diagonal), ``beta`` its row sums and ``Lbar = 1 - L``, the gauge vector
of the minimizer solves the linear system

    (diag(beta) + Lbar) x = n * (L o m_tilde) @ 1_h

The system matrix ``A = diag(beta) + Lbar`` decides uniqueness: the
completion is unique iff ``A`` is nonsingular, which is why
:func:`recoverability` is exposed as a first-class check and
:func:`complete` refuses non-recoverable masks by default.

:func:`robust_complete` combines completion with the sparse-outlier
alternation, constraining outliers to visible positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidMatrixError, NonRecoverableMaskError
from .matrices import check_skew_symmetric, compose, _unit_ones
from .robust import OutlierMatrix, RobustResult, STOP_MODES, hard_threshold_pairs

# Relative singular-value cutoff below which the recovery system counts
# as rank-deficient.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class Mask:
    """Symmetric 0/1 availability matrix with unit diagonal.

    ``entries[i, j] == 1`` means the measurement between sensors ``i``
    and ``j`` is available.  The diagonal is always 1 (a sensor is
    trivially available to itself), so the per-sensor count ``beta[i]``
    equals ``n`` minus the number of missing measurements at ``i``.
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidMatrixError(f"mask must be square, got shape {entries.shape}")
        if entries.shape[0] < 2:
            raise InvalidMatrixError(f"mask needs n >= 2, got n={entries.shape[0]}")
        if not np.all((entries == 0.0) | (entries == 1.0)):
            raise InvalidMatrixError("mask entries must be 0 or 1")
        if not np.array_equal(entries, entries.T):
            raise InvalidMatrixError("mask must be symmetric")
        if not np.all(np.diag(entries) == 1.0):
            raise InvalidMatrixError("mask diagonal must be all ones")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def beta(self) -> np.ndarray:
        """Per-sensor available-measurement counts (self included)."""
        return self.entries.sum(axis=1)

    @property
    def is_full(self) -> bool:
        return bool(np.all(self.entries == 1.0))

    @property
    def missing_pairs(self) -> tuple[tuple[int, int], ...]:
        """Upper-triangle (i, j) pairs whose measurement is unavailable."""
        iu, ju = np.triu_indices(self.n, k=1)
        gone = self.entries[iu, ju] == 0.0
        return tuple((int(i), int(j)) for i, j in zip(iu[gone], ju[gone]))

    @classmethod
    def full(cls, n: int) -> "Mask":
        return cls(np.ones((n, n)))

    @classmethod
    def from_missing_pairs(cls, n: int, pairs: Iterable[Sequence[int]]) -> "Mask":
        """Build a mask from missing (i, j) pairs, each listed once (0-based)."""
        entries = np.ones((n, n))
        for pair in pairs:
            i, j = int(pair[0]), int(pair[1])
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidMatrixError(f"missing pair ({i},{j}) out of range for n={n}")
            if i == j:
                raise InvalidMatrixError(f"missing pair ({i},{j}) may not be on the diagonal")
            entries[i, j] = 0.0
            entries[j, i] = 0.0
        return cls(entries)


@dataclass(frozen=True)
class RecoverabilityReport:
    """Spectral diagnosis of the completion system matrix."""

    recoverable: bool
    condition: float
    smallest_singular_value: float
    largest_singular_value: float

    def __bool__(self) -> bool:
        return self.recoverable


def recovery_system(mask: Mask) -> np.ndarray:
    """System matrix ``diag(beta) + (1 - L)`` governing completion uniqueness."""
    return np.diag(mask.beta) + (1.0 - mask.entries)


def recoverability(mask: Mask) -> RecoverabilityReport:
    """Report whether the mask admits a unique completion.

    The completion is unique iff the recovery system is numerically full
    rank (smallest singular value above ``RANK_TOL`` times the largest).
    """
    sv = np.linalg.svd(recovery_system(mask), compute_uv=False)
    largest = float(sv[0])
    smallest = float(sv[-1])
    recoverable = smallest > RANK_TOL * largest
    condition = largest / smallest if smallest > 0 else float("inf")
    return RecoverabilityReport(
        recoverable=recoverable,
        condition=condition,
        smallest_singular_value=smallest,
        largest_singular_value=largest,
    )


def _recovery_inverse(mask: Mask, pseudo: bool) -> np.ndarray:
    """Inverse (or pseudo-inverse) of the recovery system, gated on uniqueness."""
    a = recovery_system(mask)
    if pseudo:
        return np.linalg.pinv(a)
    report = recoverability(mask)
    if not report.recoverable:
        raise NonRecoverableMaskError(
            "missing-data pattern is not uniquely recoverable: recovery system is "
            f"rank-deficient (smallest singular value {report.smallest_singular_value:.3e} "
            f"vs largest {report.largest_singular_value:.3e}); "
            f"missing pairs: {list(mask.missing_pairs)}"
        )
    return np.linalg.inv(a)


def _check_mask_matches(m: np.ndarray, mask: Mask) -> None:
    if mask.n != m.shape[0]:
        raise InvalidMatrixError(f"mask size n={mask.n} does not match matrix n={m.shape[0]}")


def complete_gauge(m_tilde: np.ndarray, mask: Mask, pseudo: bool = False) -> np.ndarray:
    """Gauge vector of the masked least-squares fit.

    Solves ``(diag(beta) + Lbar) x = n * (L o m_tilde) @ 1_h``.  Under
    ``pseudo=True`` a rank-deficient system yields the minimum-norm
    solution, which is only one member of an affine family.
    """
    m = check_skew_symmetric(m_tilde)
    _check_mask_matches(m, mask)
    n = m.shape[0]
    q = _recovery_inverse(mask, pseudo)
    visible = mask.entries * m
    return n * (q @ (visible @ _unit_ones(n)))


def complete(m_tilde: np.ndarray, mask: Mask, pseudo: bool = False) -> np.ndarray:
    """Fill in and denoise a measurement matrix with known missing entries.

    Entries of ``m_tilde`` at masked positions are ignored (zeroed
    before use), so callers may pass any placeholder there.  The output
    is a consistent TDOA matrix fitting the visible entries in the
    least-squares sense; with a full mask this reduces exactly to the
    plain denoising projection.

    Raises :class:`~tdoa_denoise.errors.NonRecoverableMaskError` when
    the mask does not determine a unique completion, unless
    ``pseudo=True`` requests the (non-unique) minimum-norm completion.
    """
    return compose(complete_gauge(m_tilde, mask, pseudo=pseudo))


def robust_complete(
    m_tilde: np.ndarray,
    mask: Mask,
    k: int,
    eps: float = 1e-10,
    max_iter: int = 1000,
    stop: str = "change",
    pseudo: bool = False,
) -> RobustResult:
    """Joint outlier separation and completion under a known mask.

    Alternates the masked completion update with hard thresholding of
    the *visible* residual, so detected outliers always live on
    observed positions (masked positions carry no information to blame
    on an outlier).  The pair budget ``k`` therefore only counts
    visible pairs.  The recovery inverse is computed once per call.

    Objective traced: ``||L o (m_tilde - M - S)||_F^2`` normalized by
    the visible energy of ``m_tilde``.  Stopping rules mirror
    :func:`~tdoa_denoise.robust.robust_denoise`; with a full mask the
    two functions agree and with ``k=0`` this reduces to
    :func:`complete`.
    """
    m = check_skew_symmetric(m_tilde)
    _check_mask_matches(m, mask)
    if eps <= 0:
        raise InvalidMatrixError(f"eps must be positive, got {eps}")
    if max_iter < 1:
        raise InvalidMatrixError(f"max_iter must be >= 1, got {max_iter}")
    if stop not in STOP_MODES:
        raise InvalidMatrixError(f"stop must be one of {STOP_MODES}, got {stop!r}")

    n = m.shape[0]
    ell = mask.entries
    one_hat = _unit_ones(n)
    visible = ell * m
    denom = float(np.sum(visible * visible))
    if denom == 0.0:
        empty = OutlierMatrix(n=n, entries=np.zeros_like(m))
        return RobustResult(
            m_star=np.zeros_like(m),
            s_star=empty,
            iterations=0,
            objective_trace=[0.0],
            converged=True,
        )

    q = _recovery_inverse(mask, pseudo)
    s = OutlierMatrix(n=n, entries=np.zeros_like(m))
    m_star = m
    trace: list[float] = []
    converged = False
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        x = n * (q @ ((visible - s.entries) @ one_hat))
        m_star = compose(x)
        s = hard_threshold_pairs(ell * (m - m_star), k)
        obj = float(np.sum((ell * (m - m_star) - s.entries) ** 2)) / denom
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
