"""Test-tensor norms and their duals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..tensors import as_array
from .bases import (BaseSystem, TestTensor, WeightedBase, default_base_system, factor_size,
                    growing, matrix_base, star_base, test_size, uniform_base,
                    weighted_base_for_edge)
from .exact import MAX_CONFIGS, InfeasibleError, NormCertificate, config_count, dual_norm_exact
from .heuristic import dual_norm_heuristic

MODES = ("exact", "heuristic", "auto")


def dual_norm(Z, wb: WeightedBase, p: float, mode: str = "exact", restarts: int = 16, seed=0):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "exact":
        return dual_norm_exact(Z, wb, p)
    if mode == "auto" and config_count(Z, wb) <= math.log2(MAX_CONFIGS):
        return dual_norm_exact(Z, wb, p)
    return dual_norm_heuristic(Z, wb, p, restarts=restarts, seed=seed)


def _transfer(T: TestTensor, wb: WeightedBase) -> TestTensor:
    """Same factors, relabelled onto another base with identical coordinate layout."""
    if T.base is wb:
        return T
    by_pos = {T.base.positions(b): theta for b, theta in T.factors.items()}
    return TestTensor(wb, T.n, {b: by_pos[pos] for b, pos, _ in wb.nonempty()})


@dataclass
class SystemNorm:
    value: float
    certificates: list = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return all(c.mode == "exact" for c in self.certificates)

    @property
    def argmax(self) -> NormCertificate:
        return max(self.certificates, key=lambda c: c.value)


def system_norm(Z, sys, p: float, mode: str = "exact", restarts: int = 16, seed=0) -> SystemNorm:
    """Max of the per-edge dual norms; bases with equal shape are solved once."""
    arr = as_array(Z)
    bases = list(sys) if not isinstance(sys, WeightedBase) else [sys]
    cache = {}
    certs = []
    for wb in bases:
        key = wb.shape_key()
        if key not in cache:
            cache[key] = dual_norm(arr, wb, p, mode=mode, restarts=restarts, seed=seed)
        c = cache[key]
        certs.append(NormCertificate(c.value, _transfer(c.witness, wb), c.mode, c.inner, c.size))
    return SystemNorm(max(c.value for c in certs) if certs else 0.0, certs)


@dataclass
class Membership:
    member: bool | None
    status: str
    value: float
    certificate: NormCertificate | None = None


def ball_membership(A, Q, sys, p: float, delta: float, mode: str = "exact", seed=0) -> Membership:
    """Is ||Q - A||* <= delta?  Heuristic mode can only refute membership."""
    if math.isinf(delta) and delta > 0:
        return Membership(True, "member", 0.0)
    Z = as_array(Q) - as_array(A)
    res = system_norm(Z, sys, p, mode=mode, seed=seed)
    cert = res.argmax if res.certificates else None
    if res.value > delta:
        return Membership(False, "non-member", res.value, cert)
    if res.exact:
        return Membership(True, "member", res.value, cert)
    return Membership(None, "inconclusive", res.value, cert)


__all__ = [
    "BaseSystem", "TestTensor", "WeightedBase", "NormCertificate", "InfeasibleError", "SystemNorm",
    "Membership", "default_base_system", "factor_size", "growing", "matrix_base", "star_base",
    "uniform_base", "weighted_base_for_edge", "test_size", "dual_norm_exact", "dual_norm_heuristic",
    "dual_norm", "system_norm", "ball_membership", "config_count", "MAX_CONFIGS",
]
