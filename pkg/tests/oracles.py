"""Independent brute-force references used by several test modules."""

import itertools

import numpy as np


def subset_indicators(n):
    """(2^n, n) matrix whose rows are all 0/1 vectors of length n."""
    return np.array(list(itertools.product([0, 1], repeat=n)), dtype=float)


def cut_norm(M):
    """max over vertex sets I, J of |sum_{i in I, j in J} M_ij| / n^2."""
    n = M.shape[0]
    X = subset_indicators(n)
    return float(np.abs(X @ M @ X.T).max()) / n ** 2


def matrix_formula(M, p, delta):
    """max |<M, 1_I x 1_J>| / ((|I| v n0)(|J| v n0)) with n0 = n p^(delta-1)."""
    n = M.shape[0]
    n0 = n * p ** (delta - 1)
    X = subset_indicators(n)[1:]
    s = np.maximum(X.sum(axis=1), n0)
    return float((np.abs(X @ M @ X.T) / np.outer(s, s)).max())


def star_formula(M, p, delta):
    """max over I of |<degrees of M, 1_I>| / (n (|I| v n0))."""
    n = M.shape[0]
    n0 = n * p ** (delta - 1)
    X = subset_indicators(n)[1:]
    return float((np.abs(X @ M.sum(axis=1)) / (n * np.maximum(X.sum(axis=1), n0))).max())


def random_symmetric(rng, n, integer=False):
    Z = rng.integers(-3, 4, size=(n, n)).astype(float) if integer else rng.normal(size=(n, n))
    Z = np.triu(Z, 1)
    return Z + Z.T


def hom_loop(H, arr):
    n = arr.shape[0]
    total = 0.0
    for phi in itertools.product(range(n), repeat=H.num_vertices):
        term = 1.0
        for e in H.edges:
            term *= arr[tuple(phi[v] for v in e)]
            if term == 0:
                break
        total += term
    return total
