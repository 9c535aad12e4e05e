import numpy as np
import pytest
import scipy.sparse as sp

from graphpot import HarmonicSpace, generate


def random_transient_space(rng, max_n=12, killed=False):
    """Random connected weighted space with at least one absorbing vertex
    (or killing), so the Green function is finite."""
    n = int(rng.integers(4, max_n + 1))
    ids = [str(i) for i in range(n)]
    rows, cols, vals = [], [], []
    order = rng.permutation(n)
    for a, b in zip(order, order[1:]):          # random spanning tree
        w = float(rng.uniform(0.2, 2.0))
        rows += [a, b]
        cols += [b, a]
        vals += [w, w]
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        a, b = rng.integers(0, n, size=2)
        if a == b:
            continue
        w = float(rng.uniform(0.2, 2.0))
        rows += [int(a), int(b)]
        cols += [int(b), int(a)]
        vals += [w, w]
    W = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    n_abs = int(rng.integers(1, max(2, n // 3) + 1))
    absorbing = [ids[i] for i in rng.choice(n, size=n_abs, replace=False)]
    interior = [v for v in ids if v not in absorbing]
    killing = None
    if killed:
        killing = {v: float(rng.uniform(0.0, 0.3)) for v in interior
                   if rng.random() < 0.5}
    return HarmonicSpace(ids, W, absorbing, interior[int(rng.integers(len(interior)))],
                         killing=killing)


def random_symmetric_kernel_space(rng, max_n=12):
    """Random space whose averaging kernel is a symmetric matrix.

    Built by drawing a symmetric substochastic matrix S and realizing it
    with W = S and killing 1 - rowsum, so P = S exactly and the Green
    function is symmetric (counting-measure capacity is then provably
    monotone and subadditive)."""
    n = int(rng.integers(4, max_n + 1))
    ids = [str(i) for i in range(n)]
    rows, cols, vals = [], [], []
    order = rng.permutation(n)
    for a, b in zip(order, order[1:]):
        w = float(rng.uniform(0.2, 2.0))
        rows += [a, b]
        cols += [b, a]
        vals += [w, w]
    for _ in range(int(rng.integers(0, n))):
        a, b = rng.integers(0, n, size=2)
        if a == b:
            continue
        w = float(rng.uniform(0.2, 2.0))
        rows += [int(a), int(b)]
        cols += [int(b), int(a)]
        vals += [w, w]
    W = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    scale = float(np.asarray(W.sum(axis=1)).max()) * float(rng.uniform(1.05, 1.6))
    S = W / scale
    s = np.asarray(S.sum(axis=1)).ravel()
    n_abs = int(rng.integers(1, max(2, n // 3) + 1))
    absorbing = [ids[i] for i in rng.choice(n, size=n_abs, replace=False)]
    interior = [v for v in ids if v not in absorbing]
    killing = {ids[i]: float(1.0 - s[i]) for i in range(n) if ids[i] in set(interior)}
    return HarmonicSpace(ids, S, absorbing, interior[int(rng.integers(len(interior)))],
                         killing=killing)


@pytest.fixture(scope="session")
def path5():
    return generate("path(5)")


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)
