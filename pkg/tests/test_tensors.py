import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperdev.tensors import (ErModel, SymTensor, jay, lin_form, loglik_ratio, loglik_ratio_batch,
                              relent, relent_scalar, sample, sample_many)


@st.composite
def weight_tensors(draw, max_n=6):
    r = draw(st.sampled_from([2, 3]))
    n = draw(st.integers(r, max_n))
    vals = draw(st.lists(st.floats(0, 1), min_size=math.comb(n, r), max_size=math.comb(n, r)))
    return SymTensor(n, r, vals)


def test_jay_examples():
    assert jay(3, 2).values.tolist() == [1, 1, 1]
    assert jay(3, 2).dense().sum() == 6
    assert jay(4, 3).values.size == 4
    assert jay(3, 3).values.size == 1
    with pytest.raises(ValueError):
        jay(2, 3)


@given(weight_tensors())
def test_symmetry_and_diagonal(S):
    arr = S.dense()
    for perm in itertools.permutations(range(S.r)):
        assert np.array_equal(arr, arr.transpose(perm))
    for idx in itertools.product(range(S.n), repeat=S.r):
        if len(set(idx)) < S.r:
            assert arr[idx] == 0
        else:
            assert arr[idx] == S[idx]


@given(weight_tensors())
def test_dense_roundtrip(S):
    assert SymTensor.from_dense(S.dense()) == S
    assert SymTensor.from_entries(S.n, S.r, S.entries()) == S


def test_from_dense_rejects_asymmetric():
    a = np.zeros((3, 3))
    a[0, 1] = 1
    with pytest.raises(ValueError):
        SymTensor.from_dense(a)


def test_relent_scalar_examples():
    assert relent_scalar(0.3, 0.3) == 0
    assert relent_scalar(0.3, 1.0) == pytest.approx(math.log(1 / 0.3))
    assert relent_scalar(0.5, 0.75) == pytest.approx(0.75 * math.log(1.5) + 0.25 * math.log(0.5))
    assert relent_scalar(0.5, 0.75) == pytest.approx(0.130812, abs=1e-6)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            relent_scalar(bad, 0.5)


def test_relent_convex_zero_only_at_p():
    for p in (0.01, 0.2, 0.5, 0.9):
        xs = np.linspace(0, 1, 2001)
        f = relent_scalar(p, xs)
        assert np.all(np.diff(f, 2) >= -1e-12)
        assert np.all(f[np.abs(xs - p) > 1e-3] > 0)


def test_relent_quadratic_lower_bound():
    worst = math.inf
    for p in (0.5, 0.1, 0.01, 0.001):
        xs = np.linspace(0, 1 - p, 1001)[1:]
        worst = min(worst, float(np.min(relent_scalar(p, p + xs) / (xs ** 2 * math.log(1 / p)))))
    assert worst > 0.1


def test_relent_examples():
    assert relent(0.3, SymTensor.full(5, 2, 0.3)) == 0
    assert relent(0.3, jay(3, 2)) == pytest.approx(3 * math.log(1 / 0.3))
    with pytest.raises(ValueError):
        relent(0.3, SymTensor(3, 2, [0.2, 1.2, 0.1]))


@given(weight_tensors(), st.floats(0.01, 0.99))
def test_relent_is_entrywise_sum(S, p):
    naive = sum(relent_scalar(p, float(v)) for v in S.values)
    assert relent(p, S) == pytest.approx(naive, rel=1e-12, abs=1e-12)


def test_sample_examples():
    assert sample(ErModel(6, 2, 0.0), 1).values.sum() == 0
    assert sample(ErModel(6, 3, 1.0), 1) == jay(6, 3)
    assert sample(ErModel(7, 2, 0.4), 5) == sample(ErModel(7, 2, 0.4), 5)
    counts = sample_many(ErModel(20, 2, 0.3), 10_000, seed=3).sum(axis=1)
    sigma = math.sqrt(190 * 0.3 * 0.7 / 10_000)
    assert abs(counts.mean() - 57) < 3 * sigma
    with pytest.raises(ValueError):
        ErModel(4, 2, 1.5)


def test_loglik_ratio_examples():
    A = sample(ErModel(5, 2, 0.5), 0)
    assert loglik_ratio(A, SymTensor.full(5, 2, 0.3), 0.3) == pytest.approx(0)
    assert loglik_ratio(jay(5, 2), SymTensor.full(5, 2, 0.6), 0.3) == pytest.approx(10 * math.log(2))
    Q = SymTensor(3, 2, [1.0, 0.5, 0.5])
    assert loglik_ratio(SymTensor(3, 2, [0, 1, 1]), Q, 0.4) == -math.inf


def test_loglik_ratio_mean_is_relent():
    rng = np.random.default_rng(0)
    Q = SymTensor(6, 2, rng.uniform(0.1, 0.9, 15))
    bits = sample_many(ErModel(6, 2, Q), 20_000, seed=1)
    W = loglik_ratio_batch(bits, Q, 0.3)
    assert abs(W.mean() - relent(0.3, Q)) < 3 * W.std() / math.sqrt(W.size)
    assert loglik_ratio(SymTensor(6, 2, bits[0]), Q, 0.3) == pytest.approx(W[0])


@given(weight_tensors(max_n=5), st.integers(0, 2 ** 32 - 1))
def test_lin_form_against_loop(S, seed):
    rng = np.random.default_rng(seed)
    T = SymTensor(S.n, S.r, rng.normal(size=S.values.size))
    naive = sum(S[idx] * T[idx] for idx in itertools.product(range(S.n), repeat=S.r))
    assert lin_form(S, T) == pytest.approx(naive, abs=1e-9)
    assert lin_form(S, jay(S.n, S.r)) == pytest.approx(math.factorial(S.r) * S.values.sum())


def test_lin_form_examples():
    assert lin_form(jay(3, 2), jay(3, 2)) == 6
    assert lin_form(jay(4, 2), SymTensor.full(4, 2, 0.0)) == 0
    with pytest.raises(ValueError):
        lin_form(jay(3, 2), jay(4, 2))
