"""Alternating maximization lower bound for the dual norm."""

from __future__ import annotations

import numpy as np

from ..tensors import as_array
from .bases import TestTensor, WeightedBase, _expand
from .exact import NormCertificate, _finish


def _cap_grid(cells: int) -> list[int]:
    caps, c = [], 1
    while c < cells:
        caps.append(c)
        c *= 2
    caps.append(cells)
    return caps


def _best_response(Z, wb, p, factors, j, cap):
    """Best θ_j (by prefix of the sorted conditional marginal) given the others."""
    n, r = Z.shape[0], Z.ndim
    members = wb.nonempty()
    b, pos, _ = members[j]
    M = np.ones((1,) * r)
    K = float(n) ** r * p ** wb.d_star
    for i, (bi, posi, _) in enumerate(members):
        if i == j:
            continue
        M = M * _expand(factors[bi], posi, r)
        K = max(K, wb.coefficient(bi, n, p) * factors[bi].sum())
    M = np.broadcast_to(M, Z.shape)
    axes = tuple(k for k in range(r) if k not in pos)
    w = ((M * Z).sum(axis=axes) if axes else M * Z).reshape(-1)
    c = (M.sum(axis=axes) if axes else M).reshape(-1)
    order = np.argsort(-w, kind="stable")
    limit = max(1, min(cap, int(np.count_nonzero(w > 0))))
    order = order[:limit]
    s = np.arange(1, limit + 1)
    denom = np.maximum(np.maximum(np.cumsum(c[order]), wb.coefficient(b, n, p) * s), K)
    ratio = np.cumsum(w[order]) / denom
    k = int(np.argmax(ratio))
    theta = np.zeros(w.size, dtype=bool)
    theta[order[:k + 1]] = True
    return theta.reshape((n,) * len(pos))


def _climb(Z, wb, p, factors, caps, max_sweeps):
    members = wb.nonempty()
    for _ in range(max_sweeps):
        changed = False
        for j, (b, _, _) in enumerate(members):
            new = _best_response(Z, wb, p, factors, j, caps[j])
            if not np.array_equal(new, factors[b]):
                factors[b] = new
                changed = True
        if not changed:
            break
    return factors


def dual_norm_heuristic(Z, wb: WeightedBase, p: float, restarts: int = 16, seed=0,
                        max_sweeps: int = 50) -> NormCertificate:
    """Lower bound on the dual norm with a realizing witness.

    Each restart draws per-factor support caps from a geometric grid and a
    random initial factor set, climbs by best responses under the caps, then
    climbs again with the caps lifted.  Both signs of Z are tried.
    """
    arr = as_array(Z)
    n, r = arr.shape[0], arr.ndim
    if r != wb.r or arr.shape != (n,) * r:
        raise ValueError("tensor shape does not match the base")
    members = wb.nonempty()
    full_caps = [n ** len(pos) for _, pos, _ in members]
    best = _finish(arr, wb, p, TestTensor(wb, n), "heuristic-lower-bound")
    if not np.any(arr) or not members:
        return best
    seqs = np.random.SeedSequence(seed).spawn(restarts)
    for sign in (1.0, -1.0):
        Zs = sign * arr
        for k, ss in enumerate(seqs):
            rng = np.random.default_rng(ss)
            if k == 0:
                caps = list(full_caps)
                factors = {b: np.ones((n,) * len(pos), dtype=bool) for b, pos, _ in members}
            else:
                caps = [int(rng.choice(_cap_grid(c))) for c in full_caps]
                factors = {}
                for (b, pos, _), cap in zip(members, caps):
                    theta = np.zeros(n ** len(pos), dtype=bool)
                    theta[rng.choice(theta.size, size=cap, replace=False)] = True
                    factors[b] = theta.reshape((n,) * len(pos))
            for cset in (caps, full_caps):
                factors = _climb(Zs, wb, p, factors, cset, max_sweeps)
                cert = _finish(arr, wb, p, TestTensor(wb, n, dict(factors)), "heuristic-lower-bound")
                if cert.value > best.value:
                    best = cert
    return best
