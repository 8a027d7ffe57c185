"""Tail probabilities: exact enumeration, Monte Carlo, importance sampling,
and numerical checks of the accompanying probabilistic inequalities."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import logsumexp
from scipy.stats import binom

from .decomposition import wilson_interval
from .homomorphism import (_proper_edge_subgraphs, hom_batch, induced_hom_batch,
                           quotient_hom_expectation)
from .hypergraph import RGraph, cycle, isomorphic, matching, path
from .tensors import (ErModel, SymTensor, dense_from_values, jay, loglik_ratio_batch, relent,
                      relent_scalar, sample_many)
from .variational import TailProblem, planted_hub

MAX_ENUM_ENTRIES = 22
CHUNK = 1 << 15
REL_TOL = 1e-12  # slack on density thresholds so exact ties count as inside the event

Event = Callable[[np.ndarray], np.ndarray]


@dataclass
class TailEstimate:
    log_prob: float
    method: str
    exact: bool
    stderr: float = 0.0
    samples: int = 0
    seed: int | None = None
    ci: tuple = (0.0, 1.0)
    info: dict = field(default_factory=dict)

    @property
    def prob(self) -> float:
        return math.exp(self.log_prob) if self.log_prob > -math.inf else 0.0

    def covers(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(self.prob - value) <= sigmas * self.stderr + 1e-15

    def to_json(self) -> dict:
        return {"log_prob": self.log_prob, "prob": self.prob, "method": self.method,
                "exact": self.exact, "stderr": self.stderr, "samples": self.samples,
                "seed": self.seed, "ci": list(self.ci), "info": self.info}


# ---------------------------------------------------------------- events


def density_batch(H: RGraph, bits: np.ndarray, n: int, induced: bool = False) -> np.ndarray:
    """t(H, A) for each row of a (B, C(n,r)) 0/1 matrix."""
    dense = dense_from_values(n, H.r, bits)
    counts = induced_hom_batch(H, dense) if induced else hom_batch(H, dense)
    return counts / float(n) ** H.num_vertices


def tail_event(problem: TailProblem) -> Event:
    """Joint event of the problem: every density constraint holds."""
    n = problem.n

    def event(bits):
        ok = np.ones(bits.shape[0], dtype=bool)
        for k, g in enumerate(problem.graphs):
            t = density_batch(g, bits, n, problem.induced)
            target = problem.target(k)
            if problem.directions[k] == "upper":
                ok &= t >= target * (1 - REL_TOL)
            else:
                ok &= t <= target * (1 + REL_TOL)
        return ok

    return event


def halfspace_event(weights, threshold: float) -> Event:
    """{a : <w, a> >= threshold} over the r-subset coordinates."""
    w = np.asarray(weights, dtype=float)
    return lambda bits: bits @ w >= threshold - 1e-9


def crude_event(graphs, n: int, p: float, cap: float) -> Event:
    """{t_p(F, A) <= cap for every proper edge-subgraph F of every graph}."""
    subs = [F for H in graphs for F in _proper_edge_subgraphs(H) if F.num_edges > 0]

    def event(bits):
        ok = np.ones(bits.shape[0], dtype=bool)
        for F in subs:
            ok &= density_batch(F, bits, n) / p ** F.num_edges <= cap * (1 + REL_TOL)
        return ok

    return event


def conjunction(*events: Event) -> Event:
    def event(bits):
        ok = np.ones(bits.shape[0], dtype=bool)
        for ev in events:
            ok &= ev(bits)
        return ok

    return event


# ---------------------------------------------------------------- exact enumeration


def _chunks(N: int, chunk: int = CHUNK):
    shifts = np.arange(N, dtype=np.int64)
    for start in range(0, 1 << N, chunk):
        codes = np.arange(start, min(start + chunk, 1 << N), dtype=np.int64)
        yield codes, ((codes[:, None] >> shifts) & 1).astype(float)


def _check_enum(n: int, r: int) -> int:
    N = math.comb(n, r)
    if N > MAX_ENUM_ENTRIES:
        raise ValueError(f"exact enumeration needs C(n,r) <= {MAX_ENUM_ENTRIES}, got {N}")
    return N


def event_counts(event: Event, n: int, r: int) -> np.ndarray:
    """Number of configurations in the event with k present entries, for each k."""
    N = _check_enum(n, r)
    counts = np.zeros(N + 1, dtype=np.int64)
    for _, bits in _chunks(N):
        mask = event(bits)
        counts += np.bincount(bits[mask].sum(axis=1).astype(int), minlength=N + 1)
    return counts


def _log_binomial_mass(counts: np.ndarray, p: float) -> float:
    N = counts.size - 1
    k = np.arange(N + 1)
    nz = counts > 0
    if not nz.any():
        return -math.inf
    terms = np.log(counts[nz].astype(float)) + k[nz] * math.log(p) + (N - k[nz]) * math.log1p(-p)
    return float(min(0.0, logsumexp(terms)))


def exact_log_prob(event: Event, n: int, r: int, probs) -> float:
    """log ν(event) for a product measure ν with the given per-entry probabilities."""
    N = _check_enum(n, r)
    q = np.broadcast_to(np.asarray(probs, dtype=float), (N,))
    if np.all(q == q[0]) and 0 < q[0] < 1:
        return _log_binomial_mass(event_counts(event, n, r), float(q[0]))
    with np.errstate(divide="ignore"):
        lon, loff = np.log(q), np.log1p(-q)
    parts = []
    for _, bits in _chunks(N):
        mask = event(bits)
        if mask.any():
            b = bits[mask]
            w = np.where(b > 0, lon, loff).sum(axis=1)
            parts.append(logsumexp(w))
    return float(min(0.0, logsumexp(parts))) if parts else -math.inf


def tail_exact_enum(problem: TailProblem) -> TailEstimate:
    counts = event_counts(tail_event(problem), problem.n, problem.r)
    lp = _log_binomial_mass(counts, problem.p)
    return TailEstimate(lp, "exact-enumeration", True, samples=1 << (counts.size - 1),
                        info={"configurations_in_event": int(counts.sum())})


def tail_binomial(problem: TailProblem) -> TailEstimate:
    """Closed form for a single r-edge: the density is r! · (entry count) / n^r."""
    g = problem.graphs[0]
    if len(problem.graphs) != 1 or g.num_edges != 1 or problem.induced:
        raise ValueError("closed form needs a single one-edge graph")
    n, r, p = problem.n, problem.r, problem.p
    N = math.comb(n, r)
    scale = math.factorial(r) / float(n) ** r
    target = problem.target(0)
    if problem.directions[0] == "upper":
        m = math.ceil(target * (1 - REL_TOL) / scale - 1e-9)
        lp = 0.0 if m <= 0 else float(binom.logsf(m - 1, N, p))
    else:
        m = math.floor(target * (1 + REL_TOL) / scale + 1e-9)
        lp = -math.inf if m < 0 else float(binom.logcdf(m, N, p))
    return TailEstimate(lp, "binomial-closed-form", True, info={"threshold_count": m, "N": N})


# ---------------------------------------------------------------- sampling


def _batches(total: int, size: int = 4096):
    while total > 0:
        yield min(size, total)
        total -= size


def tail_mc(problem: TailProblem, samples: int, seed=0) -> TailEstimate:
    if samples < 1:
        raise ValueError("need at least one sample")
    event = tail_event(problem)
    model = ErModel(problem.n, problem.r, problem.p)
    hits = 0
    for b, ss in zip(_batches(samples), np.random.SeedSequence(seed).spawn(-(-samples // 4096))):
        hits += int(event(sample_many(model, b, np.random.default_rng(ss))).sum())
    ph = hits / samples
    return TailEstimate(math.log(ph) if hits else -math.inf, "naive-mc", False,
                        stderr=math.sqrt(ph * (1 - ph) / samples), samples=samples, seed=seed,
                        ci=wilson_interval(hits, samples), info={"hits": hits})


def tail_tilted(problem: TailProblem, Q_star: SymTensor, samples: int, seed=0) -> TailEstimate:
    """Importance sampling from μ_Q with weights exp(−W(A)) on the event."""
    if np.any(Q_star.values <= 0) or np.any(Q_star.values >= 1):
        raise ValueError("tilting tensor entries must lie strictly inside (0,1)")
    if samples < 2:
        raise ValueError("need at least two samples")
    event = tail_event(problem)
    model = ErModel(problem.n, problem.r, Q_star)
    logw = []
    for b, ss in zip(_batches(samples), np.random.SeedSequence(seed).spawn(-(-samples // 4096))):
        bits = sample_many(model, b, np.random.default_rng(ss))
        w = -loglik_ratio_batch(bits, Q_star, problem.p)
        logw.append(np.where(event(bits), w, -np.inf))
    logw = np.concatenate(logw)
    hits = int(np.isfinite(logw).sum())
    if hits == 0:
        return TailEstimate(-math.inf, "tilted-is", False, samples=samples, seed=seed,
                            info={"ess": 0.0, "hits": 0})
    lmean = float(logsumexp(logw) - math.log(samples))
    w = np.exp(logw - logw[np.isfinite(logw)].max())
    ess = float(w.sum() ** 2 / (w ** 2).sum())
    sd = float(np.std(np.exp(logw - lmean), ddof=1)) * math.exp(lmean)
    se = sd / math.sqrt(samples)
    mean = math.exp(lmean)
    return TailEstimate(lmean, "tilted-is", False, stderr=se, samples=samples, seed=seed,
                        ci=(max(0.0, mean - 1.96 * se), mean + 1.96 * se),
                        info={"ess": ess, "hits": hits})


# ---------------------------------------------------------------- inequality checks


def tilted_concentration_check(H: RGraph, p: float, ns, samples: int, seed=0, delta: float = 1.0,
                               tensors=None) -> dict:
    """Var_Q(t_p(H,A)) / (E_Q t_p(H,A))² along a ladder of n, Q a planted hub by default."""
    rows = []
    seqs = np.random.SeedSequence(seed).spawn(len(ns))
    for i, (n, ss) in enumerate(zip(ns, seqs)):
        Q = tensors[i] if tensors is not None else planted_hub(H, n, p, delta).Q
        rng = np.random.default_rng(ss)
        vals = np.concatenate([density_batch(H, sample_many(ErModel(n, H.r, Q), b, rng), n)
                               for b in _batches(samples, 1024)]) / p ** H.num_edges
        mean = float(vals.mean())
        var = float(vals.var(ddof=1))
        rows.append({"n": n, "mean": mean, "var": var,
                     "ratio": var / mean ** 2 if mean > 0 else math.inf,
                     "relent": relent(p, Q)})
    ratios = [row["ratio"] for row in rows]
    return {"H": repr(H), "p": p, "samples": samples, "seed": seed, "rows": rows,
            "decreasing": all(a > b for a, b in zip(ratios, ratios[1:]))}


def _simplex_min(V: np.ndarray, p: float, w0: np.ndarray) -> np.ndarray:
    """Weights on the rows of V minimizing Σ I_p of their convex combination."""
    logit_p = math.log(p / (1 - p))

    def grad(w):
        x = np.clip(w @ V, 1e-15, 1 - 1e-15)
        return V @ (np.log(x / (1 - x)) - logit_p)

    res = minimize(lambda w: relent(p, np.clip(w @ V, 0, 1)), w0, jac=grad,
                   bounds=[(0, 1)] * len(w0), method="SLSQP",
                   constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1,
                                 "jac": lambda w: np.ones_like(w)}],
                   options={"ftol": 1e-15, "maxiter": 300})
    w = np.clip(res.x, 0, None)
    w = w / w.sum()
    return w if relent(p, w @ V) <= relent(p, w0 @ V) else w0


def _frank_wolfe(points: np.ndarray, p: float, iters: int, tol: float, seed=0):
    """Minimize Σ I_p over the convex hull of the rows of ``points``.

    Fully corrective: the weights on all active vertices are re-optimized after
    each new vertex enters.  Returns (value, duality-gap lower bound, minimizer).
    """
    logit_p = math.log(p / (1 - p))
    m = points.shape[0]
    rng = np.random.default_rng(seed)
    active = list(range(m)) if m <= 64 else sorted(rng.choice(m, 64, replace=False).tolist())
    w = np.full(len(active), 1 / len(active))
    lower = -math.inf
    for _ in range(iters):
        V = points[active]
        w = _simplex_min(V, p, w)
        keep = w > 1e-14
        active = [a for a, k in zip(active, keep) if k]
        w = w[keep] / w[keep].sum()
        x = w @ points[active]
        f = relent(p, np.clip(x, 0, 1))
        xc = np.clip(x, 1e-15, 1 - 1e-15)
        g = np.log(xc / (1 - xc)) - logit_p
        j = int(np.argmin(points @ g))
        gap = float(g @ (x - points[j]))
        lower = max(lower, f - gap)
        if gap <= tol * max(1.0, abs(f)) or j in active:
            break
        active.append(j)
        w = np.append(w, 0.0)
    return f, min(lower, f), x


def convex_entropy_bound_check(halfspaces, n: int, r: int, p: float, iters: int = 2000) -> dict:
    """μ_p(B) <= exp(−inf over hull(B) of I_p) for B an intersection of half-spaces.

    The infimum is bracketed by Frank-Wolfe; the check uses the lower end, so a
    pass is rigorous up to floating error.  Coordinates on which every point of
    B agrees are pinned and contribute I_p(0) or I_p(1) directly.
    """
    N = _check_enum(n, r)
    event = conjunction(*[halfspace_event(w, c) for w, c in halfspaces]) if halfspaces else (
        lambda bits: np.ones(bits.shape[0], dtype=bool))
    pts = [bits[event(bits)] for _, bits in _chunks(N)]
    pts = np.concatenate(pts) if pts else np.zeros((0, N))
    if pts.shape[0] == 0:
        return {"log_prob": -math.inf, "inf_upper": math.inf, "inf_lower": math.inf,
                "holds": True, "empty": True}
    lp = _log_binomial_mass(np.bincount(pts.sum(axis=1).astype(int), minlength=N + 1), p)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    free = lo != hi
    pinned = math.fsum(relent_scalar(p, float(v)) for v in lo[~free])
    if free.any():
        sub = np.unique(pts[:, free], axis=0)
        val, low, _ = _frank_wolfe(sub, p, iters, 1e-10)
    else:
        val = low = 0.0
    upper_inf, lower_inf = pinned + val, pinned + low
    return {"log_prob": lp, "inf_upper": upper_inf, "inf_lower": lower_inf,
            "rhs_log": -lower_inf, "holds": bool(lp <= -lower_inf + 1e-9), "empty": False}


def product_tilt_lower_bound_check(event: Event, nu, n: int, r: int, p: float) -> dict:
    """Smallest C with log μ_p(E) >= −D(ν‖μ_p) + log ν(E) − C√d |log((1−p)/p)| / √ν(E)."""
    N = _check_enum(n, r)
    q = np.broadcast_to(np.asarray(nu.values if isinstance(nu, SymTensor) else nu, dtype=float),
                        (N,))
    lmu = exact_log_prob(event, n, r, p)
    lnu = exact_log_prob(event, n, r, q)
    D = relent(p, q)
    if lnu == -math.inf:
        return {"log_mu": lmu, "log_nu": lnu, "D": D, "C_min": 0.0, "note": "ν(E) = 0"}
    slack = -D + lnu - lmu  # the bound holds with C = 0 iff this is <= 0
    scale = math.sqrt(N) * abs(math.log((1 - p) / p)) / math.exp(lnu / 2)
    if slack <= 1e-12:
        cmin = 0.0
    else:
        cmin = slack / scale if scale > 0 else math.inf
    return {"log_mu": lmu, "log_nu": lnu, "D": D, "d": N, "slack": slack, "C_min": cmin}


def markov_cap(graphs, n: int, p: float) -> float:
    """C with P(some proper-subgraph density exceeds C) <= 1/2, by Markov."""
    total = 0.0
    for H in graphs:
        for F in _proper_edge_subgraphs(H):
            if F.num_edges == 0:
                continue
            mean = quotient_hom_expectation(F, jay(n, H.r) * p)
            total += mean / (float(n) ** F.num_vertices * p ** F.num_edges)
    return max(2.0 * total, 1.0)


def fkg_restriction_check(problem: TailProblem, cap: float | None = None) -> dict:
    if any(d != "lower" for d in problem.directions):
        raise ValueError("the restriction check concerns lower-tail events")
    n, r, p = problem.n, problem.r, problem.p
    cap = markov_cap(problem.graphs, n, p) if cap is None else cap
    L = tail_event(problem)
    M = crude_event(problem.graphs, n, p, cap) if math.isfinite(cap) else None
    lL = exact_log_prob(L, n, r, p)
    if M is None:
        lLM, lM = lL, 0.0
    else:
        lLM = exact_log_prob(conjunction(L, M), n, r, p)
        lM = exact_log_prob(M, n, r, p)
    tol = 1e-12
    return {"cap": cap, "log_P_L": lL, "log_P_LM": lLM, "log_P_M": lM,
            "restriction_holds": bool(lL <= math.log(2) + lLM + tol),
            "harris_holds": bool(lLM >= lL + lM - tol)}


def _on_sidorenko_list(H: RGraph) -> bool:
    g = RGraph(H.r, H.num_vertices, H.edges)
    core = RGraph(g.r, len({v for e in g.edges for v in e}),
                  tuple(tuple(sorted({v for e in g.edges for v in e}).index(v) for v in e)
                        for e in g.edges))
    m = core.num_edges
    if m == 0:
        return False
    if isomorphic(core, matching(m, core.r)):
        return True
    if core.r != 2:
        return False
    return isomorphic(core, path(m)) or (m % 2 == 0 and m >= 4 and isomorphic(core, cycle(m)))


@functools.lru_cache(maxsize=4)
def _density_table(H: RGraph, n: int):
    """t(H, A) and the entry count of A for every configuration; independent of p."""
    N = _check_enum(n, H.r)
    dens, ks = [], []
    for _, bits in _chunks(N):
        dens.append(density_batch(H, bits, n))
        ks.append(bits.sum(axis=1).astype(np.int64))
    return np.concatenate(dens), np.concatenate(ks)


def sidorenko_lower_tail_check(H: RGraph, n: int, p: float, delta: float) -> dict:
    """Exact −log P(t_p(H,A) <= 1−δ) against C(n,r)·I_p(q)."""
    r = H.r
    e = H.num_edges
    falling = math.prod(range(n - r + 1, n + 1))
    q = (1 - delta) ** (1 / e) * p * n ** r / falling
    prob = TailProblem([H], [delta], n, p, ["lower"])
    dens, k = _density_table(H, n)
    mask = dens <= prob.target(0) * (1 + REL_TOL)
    LT = -_log_binomial_mass(np.bincount(k[mask], minlength=math.comb(n, r) + 1), p)
    verified = _on_sidorenko_list(H)
    out = {"H": repr(H), "n": n, "p": p, "delta": delta, "q": q, "LT": LT, "verified": verified}
    if q > 1:
        out.update(rhs=None, holds=None, in_range=False)
        return out
    rhs = math.comb(n, r) * relent_scalar(p, q)
    out["rhs"] = rhs
    # q > p means the target sits above the mean, where no lower-tail bound can apply
    out["in_range"] = q <= p
    out["holds"] = bool(LT >= rhs - 1e-9)
    out["advisory"] = not verified
    return out


def ipbelow_scan(ps=(0.5, 0.1, 0.01, 0.001), points: int = 400) -> dict:
    """Minimum of I_p(p+x) / (x² log(1/p)) over a grid of p and x in (0, 1−p]."""
    worst = math.inf
    rows = []
    for p in ps:
        xs = np.linspace(0, 1 - p, points + 1)[1:]
        ratio = relent_scalar(p, p + xs) / (xs ** 2 * math.log(1 / p))
        m = float(np.min(ratio))
        rows.append({"p": p, "min_ratio": m})
        worst = min(worst, m)
    return {"rows": rows, "min_ratio": worst, "holds": worst > 0.1}
