import math

import numpy as np
import pytest

from topdots import MatrixView, validate_pair


def make_pair(a_dense, b_dense=None):
    A = MatrixView.from_dense(np.asarray(a_dense, dtype=float))
    if b_dense is None:
        return validate_pair(A, A)
    B = MatrixView.from_dense(np.asarray(b_dense, dtype=float))
    return validate_pair(A, B)


@pytest.fixture
def small_pair():
    """d=2, m=2, n=3 with C = [[1,2,1],[0,1,1]], ||W||_1 = 10."""
    return make_pair([[1, 0], [1, 1]], [[1, 1, 0], [0, 1, 1]])


def random_view(rng, d, m, density=1.0, signed=True, integer=False):
    dense = rng.uniform(0.1, 1.0, size=(d, m))
    if integer:
        dense = rng.integers(1, 5, size=(d, m)).astype(float)
    if signed:
        dense *= rng.choice([-1.0, 1.0], size=(d, m))
    if density < 1.0:
        dense[rng.random((d, m)) >= density] = 0.0
    return MatrixView.from_dense(dense)


def brute_product(pair):
    return pair.A.to_dense().T @ pair.B.to_dense()


def binom_interval(s, p, nsig=4.0):
    mu = s * p
    sd = math.sqrt(max(s * p * (1.0 - p), 0.0))
    return mu - nsig * sd, mu + nsig * sd


def assert_within_binomial(count, s, p, nsig=4.0, label=""):
    lo, hi = binom_interval(s, p, nsig)
    assert lo <= count <= hi, (
        f"{label} count {count} outside [{lo:.1f}, {hi:.1f}] "
        f"for s={s}, p={p:.6f}")
