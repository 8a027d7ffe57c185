"""Symmetric r-tensors with distinct-coordinate support, product Bernoulli
measures and Bernoulli relative entropy."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import xlogy


@lru_cache(maxsize=None)
def subset_index(n: int, r: int) -> np.ndarray:
    """Array of shape (C(n,r), r): the r-subsets of range(n) in lexicographic order."""
    if r == 0:
        return np.zeros((1, 0), dtype=np.intp)
    combos = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), r)),
                         dtype=np.intp)
    return combos.reshape(-1, r)


@lru_cache(maxsize=None)
def flat_positions(n: int, r: int) -> np.ndarray:
    """(r!, C(n,r)) flat indices into [n]^r of every ordering of every r-subset."""
    subs = subset_index(n, r)
    strides = n ** np.arange(r - 1, -1, -1)
    rows = [subs[:, list(perm)] @ strides for perm in itertools.permutations(range(r))]
    return np.array(rows, dtype=np.intp).reshape(-1, len(subs))


def dense_from_values(n: int, r: int, values: np.ndarray) -> np.ndarray:
    """Symmetric dense array from a vector over r-subsets; zero off the distinct part.

    A leading batch axis is allowed: values of shape (B, C(n,r)) give (B, n, ..., n).
    """
    values = np.asarray(values, dtype=float)
    batch = values.shape[:-1]
    out = np.zeros(batch + (n ** r,), dtype=float)
    for row in flat_positions(n, r):
        out[..., row] = values
    return out.reshape(batch + (n,) * r)


class SymTensor:
    """Symmetric r-tensor on [n]^r that vanishes on repeated coordinates.

    Stored twice: as the vector of values on r-subsets (lexicographic order)
    and as the dense symmetric array used by contractions.
    """

    __slots__ = ("n", "r", "values", "_dense")

    def __init__(self, n: int, r: int, values):
        if r < 1 or n < 1:
            raise ValueError("n and r must be positive")
        values = np.asarray(values, dtype=float)
        if values.shape != (math.comb(n, r),):
            raise ValueError(f"expected {math.comb(n, r)} subset values, got shape {values.shape}")
        self.n, self.r = n, r
        self.values = values
        self.values.setflags(write=False)
        self._dense = None

    @classmethod
    def from_dense(cls, arr: np.ndarray, *, check: bool = True, atol: float = 1e-12) -> "SymTensor":
        arr = np.asarray(arr, dtype=float)
        n, r = arr.shape[0], arr.ndim
        if arr.shape != (n,) * r:
            raise ValueError("dense tensor must be hypercubic")
        flat = arr.reshape(-1)
        pos = flat_positions(n, r)
        t = cls(n, r, flat[pos[0]])
        if check and not np.allclose(t.dense(), arr, atol=atol, rtol=0):
            raise ValueError("array is not symmetric with zero repeated-coordinate entries")
        return t

    @classmethod
    def from_entries(cls, n: int, r: int, entries: dict) -> "SymTensor":
        vals = np.zeros(math.comb(n, r))
        lookup = subset_lookup(n, r)
        for key, v in entries.items():
            key = tuple(sorted(key))
            if len(key) != r or len(set(key)) != r:
                raise ValueError(f"entry {key} is not an r-subset")
            vals[lookup[key]] = v
        return cls(n, r, vals)

    @classmethod
    def full(cls, n: int, r: int, value: float = 1.0) -> "SymTensor":
        return cls(n, r, np.full(math.comb(n, r), float(value)))

    def dense(self) -> np.ndarray:
        if self._dense is None:
            self._dense = dense_from_values(self.n, self.r, self.values)
            self._dense.setflags(write=False)
        return self._dense

    def __getitem__(self, idx) -> float:
        idx = tuple(idx)
        if len(set(idx)) < len(idx):
            return 0.0
        return float(self.values[subset_lookup(self.n, self.r)[tuple(sorted(idx))]])

    def entries(self) -> dict:
        return {tuple(int(i) for i in s): float(v)
                for s, v in zip(subset_index(self.n, self.r), self.values) if v != 0}

    def is_weight(self) -> bool:
        return bool(np.all((self.values >= 0) & (self.values <= 1)))

    def is_boolean(self) -> bool:
        return bool(np.all((self.values == 0) | (self.values == 1)))

    def map(self, fn) -> "SymTensor":
        return SymTensor(self.n, self.r, fn(self.values))

    def _coerce(self, other):
        if isinstance(other, SymTensor):
            if (other.n, other.r) != (self.n, self.r):
                raise ValueError("shape mismatch")
            return other.values
        return other

    def __add__(self, other):
        return SymTensor(self.n, self.r, self.values + self._coerce(other))

    def __sub__(self, other):
        return SymTensor(self.n, self.r, self.values - self._coerce(other))

    def __rsub__(self, other):
        return SymTensor(self.n, self.r, self._coerce(other) - self.values)

    def __mul__(self, c):
        return SymTensor(self.n, self.r, self.values * self._coerce(c))

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return SymTensor(self.n, self.r, -self.values)

    def __eq__(self, other):
        return (isinstance(other, SymTensor) and (self.n, self.r) == (other.n, other.r)
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.n, self.r, self.values.tobytes()))

    def __repr__(self):
        return f"SymTensor(n={self.n}, r={self.r}, nnz={int(np.count_nonzero(self.values))})"


@lru_cache(maxsize=None)
def subset_lookup(n: int, r: int) -> dict:
    return {tuple(int(i) for i in s): k for k, s in enumerate(subset_index(n, r))}


TensorLike = Union[SymTensor, np.ndarray]


def as_array(x: TensorLike) -> np.ndarray:
    """Dense [n]^r array view of a tensor, test tensor or ndarray."""
    if isinstance(x, SymTensor):
        return x.dense()
    if hasattr(x, "dense"):
        return x.dense()
    return np.asarray(x, dtype=float)


def jay(n: int, r: int) -> SymTensor:
    if n < r:
        raise ValueError(f"need n >= r (got n={n}, r={r})")
    return SymTensor.full(n, r, 1.0)


@dataclass(frozen=True)
class ErModel:
    """Product Bernoulli law on Boolean r-tensors: scalar p or per-subset Q."""

    n: int
    r: int
    density: Union[float, SymTensor]

    def __post_init__(self):
        probs = self.probabilities()
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("densities must lie in [0,1]")

    def probabilities(self) -> np.ndarray:
        if isinstance(self.density, SymTensor):
            if (self.density.n, self.density.r) != (self.n, self.r):
                raise ValueError("density tensor shape mismatch")
            return self.density.values
        return np.full(math.comb(self.n, self.r), float(self.density))


def sample(model: ErModel, seed=None) -> SymTensor:
    rng = np.random.default_rng(seed)
    probs = model.probabilities()
    return SymTensor(model.n, model.r, (rng.random(probs.shape) < probs).astype(float))


def sample_many(model: ErModel, count: int, seed=None) -> np.ndarray:
    """(count, C(n,r)) Boolean matrix of independent samples."""
    rng = np.random.default_rng(seed)
    probs = model.probabilities()
    return (rng.random((count, probs.size)) < probs).astype(float)


def _check_p(p):
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0,1), got {p}")


def relent_scalar(p: float, x):
    """I_p(x), the Bernoulli relative entropy, with 0 log 0 = 0. Vectorized in x."""
    _check_p(p)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0,1]")
    out = xlogy(x, x) - xlogy(x, p) + xlogy(1 - x, 1 - x) - xlogy(1 - x, 1 - p)
    return float(out) if out.ndim == 0 else out


def relent(p: float, Q: TensorLike) -> float:
    """Sum of I_p over the r-subset entries of a weight tensor."""
    vals = Q.values if isinstance(Q, SymTensor) else np.asarray(Q, dtype=float).ravel()
    if np.any((vals < 0) | (vals > 1)):
        raise ValueError("weight tensor entries must lie in [0,1]")
    return math.fsum(np.atleast_1d(relent_scalar(p, vals)))


def loglik_ratio(A: SymTensor, Q: SymTensor, p: float) -> float:
    """W(A) = log dμ_Q/dμ_p at A; ±inf when A has an entry Q rules out."""
    _check_p(p)
    a, q = A.values, Q.values
    with np.errstate(divide="ignore"):
        on = np.where(a > 0, np.log(q) - math.log(p), 0.0)
        off = np.where(a > 0, 0.0, np.log1p(-q) - math.log1p(-p))
    terms = on + off
    if np.isneginf(terms).any():
        return -math.inf
    return math.fsum(terms)


def loglik_ratio_batch(samples: np.ndarray, Q: SymTensor, p: float) -> np.ndarray:
    """W for each row of a (B, C(n,r)) Boolean sample matrix."""
    _check_p(p)
    q = Q.values
    with np.errstate(divide="ignore"):
        lon = np.log(q) - math.log(p)
        loff = np.log1p(-q) - math.log1p(-p)
    # avoid 0 * inf when an entry is deterministic
    lon = np.where(np.isfinite(lon), lon, 0.0)
    loff = np.where(np.isfinite(loff), loff, 0.0)
    out = samples @ lon + (1 - samples) @ loff
    bad = ((samples > 0) & (q == 0)) | ((samples == 0) & (q == 1))
    out[bad.any(axis=1)] = -math.inf
    return out


def lin_form(Z: TensorLike, T: TensorLike) -> float:
    """Euclidean pairing over all ordered r-tuples."""
    a, b = as_array(Z), as_array(T)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sum(a * b))
