"""Iterative peeling of correlated test tensors off A - pJ."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .norms import NormCertificate, TestTensor, WeightedBase, dual_norm_exact, dual_norm_heuristic
from .norms.bases import test_size
from .tensors import ErModel, SymTensor, as_array, jay, sample

CONVERGED = "converged"
EXHAUSTED = "budget-exhausted"
INCONCLUSIVE = "oracle-inconclusive"


@dataclass
class Step:
    inner: float  # <R_{k-1}, T_k>
    size: float  # ||T_k||_B
    distance: float  # ||T̂_k||_2
    certified: bool  # chosen by the exact oracle


@dataclass
class DecompositionResult:
    status: str
    alphas: np.ndarray
    tests: list
    residual: np.ndarray
    structured: np.ndarray
    steps: list = field(default_factory=list)
    budget_used: float = 0.0
    budget: float = 0.0
    final_certificate: NormCertificate | None = None
    oracle: str = "exact"

    @property
    def k(self) -> int:
        return len(self.tests)

    def to_json(self) -> dict:
        cert = self.final_certificate
        return {
            "status": self.status,
            "alphas": [float(a) for a in self.alphas],
            "tests": [t.to_json() for t in self.tests],
            "budget_used": float(self.budget_used),
            "residual_norm_certificate": None if cert is None else {
                "value": cert.value, "mode": cert.mode, "witness": cert.witness.to_json()},
        }


def _oracle(kind: str, seed):
    if kind == "exact":
        return lambda R, wb, p, k: dual_norm_exact(R, wb, p)
    if kind == "heuristic":
        base = np.random.SeedSequence(seed)
        return lambda R, wb, p, k: dual_norm_heuristic(
            R, wb, p, seed=int(base.spawn(k + 1)[k].generate_state(1)[0]))
    raise ValueError("oracle must be 'exact' or 'heuristic'")


def step_bound(wb: WeightedBase, p: float, eps: float, kappa: float) -> int:
    return math.floor(1 + kappa * eps ** -2 * p ** (-wb.d_star - 2))


def decompose(A, wb: WeightedBase, p: float, eps: float, kappa: float, oracle: str = "exact",
              seed=0) -> DecompositionResult:
    """Greedy decomposition A = pJ + Σ α_i T_i + R.

    Each step takes the oracle's maximizing test tensor T_k for the current
    residual, orthogonalizes it against the previous ones and projects it out
    of A - pJ.  The run stops when the residual's dual norm is at most εp or
    when the accumulated size Σ||T_i||_B exceeds κ ε^-2 n^r p^-2; the budget
    is tested first, so the status is a deterministic function of the
    (budget-independent) trajectory.
    """
    if eps <= 0 or kappa < 0 or not 0 < p <= 1:
        raise ValueError("need eps > 0, kappa >= 0 and p in (0,1]")
    a = as_array(A)
    n, r = a.shape[0], a.ndim
    J = jay(n, r).dense()
    Abar = (a - p * J).reshape(-1)
    budget = kappa * eps ** -2 * float(n) ** r * p ** -2
    ask = _oracle(oracle, seed)
    R = Abar.copy()
    U: list[np.ndarray] = []
    tests: list[TestTensor] = []
    steps: list[Step] = []
    used = 0.0
    status = None
    cert = None
    while True:
        cert = ask(R.reshape(a.shape), wb, p, len(tests))
        if cert.value <= eps * p:
            status = CONVERGED if oracle == "exact" else INCONCLUSIVE
            break
        T = cert.witness
        t = T.dense().reshape(-1)
        that = t.copy()
        for _ in range(2):
            for u in U:
                that -= (u @ that) * u
        dist = float(np.linalg.norm(that))
        if dist <= 1e-10 * max(1.0, float(np.linalg.norm(t))):
            status = INCONCLUSIVE
            break
        u = that / dist
        inner = float(R @ t)
        R = R - (R @ u) * u
        U.append(u)
        tests.append(T)
        size = test_size(T, p)
        used += size
        steps.append(Step(inner, size, dist, oracle == "exact"))
        if used > budget:
            status = EXHAUSTED
            cert = None
            break
    if tests:
        Tm = np.stack([T.dense().reshape(-1) for T in tests], axis=1)
        alphas = np.linalg.lstsq(Tm, Abar - R, rcond=None)[0]
        structured = p * J + (Tm @ alphas).reshape(a.shape)
    else:
        alphas = np.zeros(0)
        structured = p * J
    return DecompositionResult(status, alphas, tests, R.reshape(a.shape), structured, steps,
                               used, budget, cert if status == CONVERGED else cert, oracle)


def verify_result(A, res: DecompositionResult, wb: WeightedBase, p: float, eps: float, kappa: float,
                  oracle: str = "exact") -> dict:
    """Recheck every clause of a decomposition.  Values: 'pass', 'fail' or 'not claimed'."""
    a = as_array(A)
    n, r = a.shape[0], a.ndim
    out = {}
    J = jay(n, r).dense()
    Tm = [T.dense() for T in res.tests]
    recon = p * J + sum((al * T for al, T in zip(res.alphas, Tm)), np.zeros(a.shape))
    err = float(np.max(np.abs(recon + res.residual - a))) if a.size else 0.0
    out["reconstruction"] = "pass" if err <= 1e-9 * float(n) ** r else "fail"
    sizes = [test_size(T, p) for T in res.tests]
    budget = kappa * eps ** -2 * float(n) ** r * p ** -2
    before_last = sum(sizes[:-1]) if sizes else 0.0
    out["budget"] = "pass" if before_last <= budget * (1 + 1e-12) else "fail"
    out["step_bound"] = "pass" if res.k <= step_bound(wb, p, eps, kappa) else "fail"
    # orthogonal distances, recomputed from scratch
    floor = eps * p ** (1 + wb.d_star) * float(n) ** (r / 2)
    ok = True
    U = []
    for T, st in zip(Tm, res.steps):
        v = T.reshape(-1).copy()
        for _ in range(2):
            for u in U:
                v -= (u @ v) * u
        d = float(np.linalg.norm(v))
        U.append(v / d if d > 0 else v)
        if st.certified and d < floor * (1 - 1e-9):
            ok = False
    out["distance"] = "pass" if ok else "fail"
    # residual orthogonal to every T_i
    orth = all(abs(float(np.sum(res.residual * T))) <= 1e-8 * max(1.0, float(T.sum())) for T in Tm)
    out["orthogonality"] = "pass" if orth else "fail"
    if res.status == CONVERGED and oracle == "exact":
        val = dual_norm_exact(res.residual, wb, p).value
        out["residual"] = "pass" if val <= eps * p * (1 + 1e-9) else "fail"
    else:
        out["residual"] = "not claimed"
    out["all_pass"] = all(v != "fail" for v in out.values())
    return out


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ph = successes / trials
    den = 1 + z * z / trials
    centre = (ph + z * z / (2 * trials)) / den
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


def exceptional_frequency(model: ErModel, wb: WeightedBase, eps: float, kappa, trials: int, seed=0,
                          oracle: str = "exact") -> dict:
    """Share of μ_p samples whose decomposition ends budget-exhausted.

    ``kappa`` may be a sequence; the same samples are then reused for every
    value so that rates are comparable pathwise.
    """
    if not isinstance(model.density, (int, float)):
        raise ValueError("exceptional_frequency needs a scalar density")
    p = float(model.density)
    kappas = [kappa] if np.isscalar(kappa) else list(kappa)
    seqs = np.random.SeedSequence(seed).spawn(trials)
    flags = np.zeros((len(kappas), trials), dtype=bool)
    for t, ss in enumerate(seqs):
        A = sample(model, np.random.default_rng(ss))
        for j, kp in enumerate(kappas):
            flags[j, t] = decompose(A, wb, p, eps, kp, oracle=oracle).status == EXHAUSTED
    rows = []
    for kp, f in zip(kappas, flags):
        lo, hi = wilson_interval(int(f.sum()), trials)
        rows.append({"kappa": kp, "rate": float(f.mean()), "ci": [lo, hi]})
    return {"trials": trials, "seed": seed, "eps": eps, "rows": rows, "flags": flags}
