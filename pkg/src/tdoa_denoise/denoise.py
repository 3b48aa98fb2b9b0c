"""Least-squares projection of noisy measurements onto consistent TDOA matrices.

Under independent Gaussian noise on each pairwise measurement, the
Frobenius-closest consistent matrix is the optimal estimate, and it has
a closed form.  Two algebraically identical routes are provided:

* :func:`denoise_closed_form` goes through the gauge vector
  (decompose, then compose), costing O(n^2);
* :func:`denoise_element_form` averages row and column sums entrywise,
  the classical best-linear-unbiased estimate of the non-redundant set.

Keeping both is deliberate: each serves as an independent cross-check
of the other, and the test suite pins their elementwise agreement.
"""

from __future__ import annotations

import numpy as np

from .matrices import check_skew_symmetric, compose, decompose


def denoise_closed_form(m_tilde: np.ndarray) -> np.ndarray:
    """Project a skew-symmetric measurement matrix onto the consistent set.

    The output is the unique minimizer of ``||m_tilde - M||_F`` over
    consistent TDOA matrices; consistent inputs are fixed points.  Input
    that is not skew-symmetric is rejected rather than silently fixed,
    since sign errors upstream would otherwise go unnoticed.
    """
    m = check_skew_symmetric(m_tilde)
    return compose(decompose(m))


def denoise_element_form(m_tilde: np.ndarray) -> np.ndarray:
    """Entrywise form of the same projection.

    ``out[i, j] = (row_sum(i) + col_sum(j)) / n``.  Serves as an
    independent oracle for :func:`denoise_closed_form`.
    """
    m = check_skew_symmetric(m_tilde)
    n = m.shape[0]
    row = m.sum(axis=1)
    col = m.sum(axis=0)
    return (row[:, None] + col[None, :]) / n
