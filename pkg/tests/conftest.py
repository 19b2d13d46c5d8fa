import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_nonneg_product(rng, m, n, k, zero_frac=0.0):
    """Seeded ``A = W H`` with nonnegative factors, rejecting rank-deficient draws."""
    from exactnmf.numerics import rank

    while True:
        W = rng.random((m, k))
        H = rng.random((k, n))
        if zero_frac:
            W[rng.random(W.shape) < zero_frac] = 0.0
        A = W @ H
        if rank(A) == k:
            return A, W, H
