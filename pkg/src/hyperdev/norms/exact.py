"""Exact maximization of |<Z,T>| / ||T||_B over test tensors.

Two enumeration schemes, whichever is cheaper:

* factor enumeration: every factor configuration is listed except for one
  "free" member whose coordinates no other member touches.  With the others
  fixed, ||T||_1 and ||T||_free depend on the free factor only through its
  support size, so the best free factor of each size is a top-s set of the
  conditional marginal.
* support closure: an optimal T may be replaced by the smallest test tensor
  containing supp(T) ∩ supp(Z) (all sizes shrink, the pairing is unchanged),
  so it suffices to enumerate subsets of supp(Z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..tensors import as_array
from .bases import TestTensor, WeightedBase, _expand, test_size

MAX_CONFIGS = 2 ** 24
_CHUNK_ELEMS = 1 << 21


class InfeasibleError(ValueError):
    """Raised when exact enumeration would exceed the configuration budget."""


@dataclass
class NormCertificate:
    value: float
    witness: TestTensor
    mode: str
    inner: float = 0.0
    size: float = 1.0

    def check(self, Z, p: float, rtol: float = 1e-9) -> bool:
        """Recompute |<Z,T>|/||T||_B from the witness."""
        arr = as_array(Z)
        ratio = abs(float(np.sum(arr * self.witness.dense()))) / test_size(self.witness, p)
        return math.isclose(ratio, self.value, rel_tol=rtol, abs_tol=1e-14)

    def to_json(self) -> dict:
        return {"value": self.value, "mode": self.mode, "inner": self.inner,
                "size": self.size, "witness": self.witness.to_json()}


def _bits(codes: np.ndarray, width: int) -> np.ndarray:
    return ((codes[:, None] >> np.arange(width, dtype=np.int64)) & 1).astype(bool)


def _plan(Z: np.ndarray, wb: WeightedBase):
    n = Z.shape[0]
    members = wb.nonempty()
    free = None
    for idx, (_, pos, _) in enumerate(members):
        others = {q for j, (_, qs, _) in enumerate(members) if j != idx for q in qs}
        if not others.intersection(pos) and (free is None or len(pos) > len(members[free][1])):
            free = idx
    enum_A = [m for j, m in enumerate(members) if j != free]
    log_A = sum(math.log2(2.0 ** (n ** len(pos)) - 1) for _, pos, _ in enum_A)
    m = int(np.count_nonzero(Z))
    log_B = math.log2(2.0 ** m - 1) if m else 0.0
    return free, log_A, log_B


def config_count(Z, wb: WeightedBase) -> float:
    """log2 of the cheaper enumeration size."""
    _, a, b = _plan(as_array(Z), wb)
    return min(a, b)


def dual_norm_exact(Z, wb: WeightedBase, p: float, max_configs: int = MAX_CONFIGS) -> NormCertificate:
    arr = as_array(Z)
    n, r = arr.shape[0], arr.ndim
    if r != wb.r or arr.shape != (n,) * r:
        raise ValueError("tensor shape does not match the base")
    if not np.any(arr):
        return NormCertificate(0.0, TestTensor(wb, n), "exact", 0.0, test_size(TestTensor(wb, n), p))
    free, log_A, log_B = _plan(arr, wb)
    limit = math.log2(max_configs)
    if min(log_A, log_B) > limit + 1e-9:
        raise InfeasibleError(
            f"exact search needs 2^{min(log_A, log_B):.1f} configurations (limit 2^{limit:.0f}); "
            "use the heuristic oracle instead")
    if log_A <= log_B:
        cert = _factor_enumeration(arr, wb, p, free)
    else:
        cert = _support_closure(arr, wb, p)
    return cert


def _factor_enumeration(Z: np.ndarray, wb: WeightedBase, p: float, free) -> NormCertificate:
    n, r = Z.shape[0], Z.ndim
    members = wb.nonempty()
    K0 = float(n) ** r * p ** wb.d_star
    enum = [(b, pos, wb.coefficient(b, n, p)) for j, (b, pos, _) in enumerate(members) if j != free]
    radix = [2 ** (n ** len(pos)) - 1 for _, pos, _ in enum]
    total = math.prod(radix)
    batch = max(1, _CHUNK_ELEMS // (n ** r))
    best = (-1.0, None)

    if free is not None:
        fb, fpos, _ = members[free]
        fcoef = wb.coefficient(fb, n, p)
        fcells = n ** len(fpos)
        other_axes = tuple(1 + k for k in range(r) if k not in fpos)
        svals = np.arange(1, fcells + 1, dtype=float)

    for start in range(0, total, batch):
        codes = np.arange(start, min(total, start + batch), dtype=np.int64)
        B = len(codes)
        M = np.ones((B,) + (1,) * r)
        sizes = np.full(B, K0)
        digits = codes.copy()
        for (b, pos, coef), rad in zip(enum, radix):
            d = digits % rad + 1
            digits //= rad
            theta = _bits(d, n ** len(pos)).reshape((B,) + (n,) * len(pos))
            M = M * _expand(theta, pos, r, batch=1)
            sizes = np.maximum(sizes, coef * theta.reshape(B, -1).sum(axis=1))
        M = np.broadcast_to(M, (B,) + (n,) * r)
        if free is None:
            num = np.einsum("b...,...->b", M, Z)
            l1 = M.reshape(B, -1).sum(axis=1)
            ratio = np.abs(num) / np.maximum(sizes, l1)
            k = int(np.argmax(ratio))
            if ratio[k] > best[0]:
                best = (float(ratio[k]), (int(codes[k]), None))
            continue
        prod = M * Z
        w = prod.sum(axis=other_axes) if other_axes else prod
        w = w.reshape(B, fcells)
        count0 = M.reshape(B, -1).sum(axis=1) / fcells
        up = np.cumsum(-np.sort(-w, axis=1, kind="stable"), axis=1)
        down = np.cumsum(np.sort(w, axis=1, kind="stable"), axis=1)
        num = np.maximum(np.abs(up), np.abs(down))
        denom = np.maximum(np.maximum(count0[:, None], fcoef) * svals[None, :], sizes[:, None])
        ratio = num / denom
        flat = int(np.argmax(ratio))
        k, s = divmod(flat, fcells)
        if ratio[k, s] > best[0]:
            sign = 1.0 if abs(up[k, s]) >= abs(down[k, s]) else -1.0
            best = (float(ratio[k, s]), (int(codes[k]), (s + 1, sign)))

    code, free_choice = best[1]
    factors = {}
    digits = np.array([code], dtype=np.int64)
    for (b, pos, _), rad in zip(enum, radix):
        d = digits % rad + 1
        digits //= rad
        factors[b] = _bits(d, n ** len(pos))[0].reshape((n,) * len(pos))
    if free_choice is not None:
        s, sign = free_choice
        T0 = TestTensor(wb, n, dict(factors))
        M = T0.dense()
        prod = M * Z
        axes = tuple(k for k in range(r) if k not in fpos)
        w = (prod.sum(axis=axes) if axes else prod).reshape(-1)
        order = np.argsort(-sign * w, kind="stable")[:s]
        theta = np.zeros(fcells, dtype=bool)
        theta[order] = True
        factors[fb] = theta.reshape((n,) * len(fpos))
    return _finish(Z, wb, p, TestTensor(wb, n, factors))


def _support_closure(Z: np.ndarray, wb: WeightedBase, p: float) -> NormCertificate:
    n, r = Z.shape[0], Z.ndim
    K0 = float(n) ** r * p ** wb.d_star
    coords = np.argwhere(Z != 0)
    zvals = Z[tuple(coords.T)]
    m = len(coords)
    members = []
    for b, pos, _ in wb.nonempty():
        cells = n ** len(pos)
        ids = np.ravel_multi_index(tuple(coords[:, list(pos)].T), (n,) * len(pos)) if pos else np.zeros(m, int)
        inc = np.zeros((m, cells))
        inc[np.arange(m), ids] = 1.0
        members.append((b, pos, wb.coefficient(b, n, p), inc, ids))
    total = 2 ** m - 1
    batch = max(1, _CHUNK_ELEMS // (n ** r))
    best = (-1.0, None)
    for start in range(1, total + 1, batch):
        codes = np.arange(start, min(total + 1, start + batch), dtype=np.int64)
        B = len(codes)
        sel = _bits(codes, m).astype(float)
        M = np.ones((B,) + (1,) * r)
        on_supp = np.ones((B, m))
        sizes = np.full(B, K0)
        for b, pos, coef, inc, ids in members:
            theta = (sel @ inc) > 0
            sizes = np.maximum(sizes, coef * theta.sum(axis=1))
            on_supp *= theta[:, ids]
            M = M * _expand(theta.reshape((B,) + (n,) * len(pos)), pos, r, batch=1)
        num = on_supp @ zvals
        l1 = np.broadcast_to(M, (B,) + (n,) * r).reshape(B, -1).sum(axis=1)
        ratio = np.abs(num) / np.maximum(sizes, l1)
        k = int(np.argmax(ratio))
        if ratio[k] > best[0]:
            best = (float(ratio[k]), int(codes[k]))
    sel = _bits(np.array([best[1]], dtype=np.int64), m)[0]
    factors = {}
    for b, pos, _, inc, ids in members:
        theta = np.zeros(n ** len(pos), dtype=bool)
        theta[ids[sel]] = True
        factors[b] = theta.reshape((n,) * len(pos))
    return _finish(Z, wb, p, TestTensor(wb, n, factors))


def _finish(Z, wb, p, T: TestTensor, mode: str = "exact") -> NormCertificate:
    inner = float(np.sum(Z * T.dense()))
    size = test_size(T, p)
    return NormCertificate(abs(inner) / size, T, mode, inner, size)
