"""Shared hypothesis strategies and helpers for the test suite."""

import numpy as np
from hypothesis import strategies as st

# Entry scale: seconds.  Kept well inside float range so Frobenius norms
# and squared objectives never overflow.
_finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@st.composite
def toa_vectors(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    return np.array(draw(st.lists(_finite, min_size=n, max_size=n)))


@st.composite
def gauge_vectors(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    return np.array(draw(st.lists(_finite, min_size=n, max_size=n)))


@st.composite
def skew_matrices(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    npairs = n * (n - 1) // 2
    upper = draw(st.lists(_finite, min_size=npairs, max_size=npairs))
    m = np.zeros((n, n))
    iu, ju = np.triu_indices(n, k=1)
    m[iu, ju] = upper
    m[ju, iu] = -m[iu, ju]
    return m


def random_skew(rng, n, scale=1.0):
    m = np.zeros((n, n))
    iu, ju = np.triu_indices(n, k=1)
    m[iu, ju] = rng.normal(0.0, scale, iu.size)
    m[ju, iu] = -m[iu, ju]
    return m
