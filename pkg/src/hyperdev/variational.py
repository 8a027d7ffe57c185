"""Entropic upper- and lower-tail variational problems and planted constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .homomorphism import (hom_count, hom_gradient, induced_hom, induced_hom_gradient)
from .hypergraph import RGraph, max_degree
from .tensors import SymTensor, relent, relent_scalar, subset_index

FEAS_TOL = 1e-8


@dataclass
class TailProblem:
    graphs: list
    deltas: list
    n: int
    p: float
    directions: list = None
    induced: bool = False

    def __post_init__(self):
        if isinstance(self.graphs, RGraph):
            self.graphs = [self.graphs]
        if np.isscalar(self.deltas):
            self.deltas = [float(self.deltas)]
        self.graphs = list(self.graphs)
        self.deltas = [float(d) for d in self.deltas]
        if self.directions is None:
            self.directions = ["upper"] * len(self.graphs)
        elif isinstance(self.directions, str):
            self.directions = [self.directions] * len(self.graphs)
        if not (len(self.graphs) == len(self.deltas) == len(self.directions)) or not self.graphs:
            raise ValueError("graphs, deltas and directions must be nonempty and of equal length")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0,1)")
        rs = {g.r for g in self.graphs}
        if len(rs) != 1:
            raise ValueError("all graphs must share the uniformity")
        if self.n < self.r:
            raise ValueError("need n >= r")
        for d, di in zip(self.deltas, self.directions):
            if di not in ("upper", "lower"):
                raise ValueError("direction must be 'upper' or 'lower'")
            if di == "upper" and not d > 0:
                raise ValueError("upper-tail deltas must be positive")
            if di == "lower" and not 0 < d < 1:
                raise ValueError("lower-tail deltas must lie in (0,1)")
        if self.induced and (len(self.graphs) != 1 or self.directions[0] != "upper"):
            raise ValueError("induced problems take a single upper-tail graph")
        if not self.induced:
            for g, d, di in zip(self.graphs, self.deltas, self.directions):
                if di == "upper" and (1 + d) * self.p ** g.num_edges > 1:
                    raise ValueError("target density exceeds 1: the upper tail is empty")

    @property
    def r(self) -> int:
        return self.graphs[0].r

    def target(self, k: int) -> float:
        """Density threshold for constraint k (as a normalized count)."""
        g, d = self.graphs[k], self.deltas[k]
        sign = 1 if self.directions[k] == "upper" else -1
        base = self.p ** g.num_edges
        if self.induced:
            base *= (1 - self.p) ** (math.comb(g.num_vertices, g.r) - g.num_edges)
        return (1 + sign * d) * base

    def density(self, k: int, Q) -> float:
        g = self.graphs[k]
        count = induced_hom(g, Q) if self.induced else hom_count(g, Q)
        return count / float(self.n) ** g.num_vertices

    def density_grad(self, k: int, Q) -> np.ndarray:
        g = self.graphs[k]
        grad = induced_hom_gradient(g, Q) if self.induced else hom_gradient(g, Q)
        return grad / float(self.n) ** g.num_vertices

    def residuals(self, Q) -> list:
        """Relative slack per constraint; nonnegative means satisfied."""
        out = []
        for k in range(len(self.graphs)):
            rel = self.density(k, Q) / self.target(k) - 1
            out.append(rel if self.directions[k] == "upper" else -rel)
        return out

    def feasible(self, Q, tol: float = FEAS_TOL) -> bool:
        return all(s >= -tol for s in self.residuals(Q))


@dataclass
class VariationalSolution:
    Q: SymTensor
    value: float
    residuals: list
    method: str
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"value": self.value, "method": self.method, "residuals": self.residuals,
                "n": self.Q.n, "r": self.Q.r, "info": self.info,
                "Q": {"n": self.Q.n, "r": self.Q.r,
                      "entries": [list(k) + [v] for k, v in self.Q.entries().items()]}}


def _solution(problem: TailProblem, Q: SymTensor, method: str, **info) -> VariationalSolution:
    return VariationalSolution(Q, relent(problem.p, Q), problem.residuals(Q), method, info)


# ---------------------------------------------------------------- constructions


def hub_tensor(n: int, r: int, m: int, p: float, value: float = 1.0) -> SymTensor:
    """``value`` on r-sets meeting [m], p elsewhere."""
    subs = subset_index(n, r)
    return SymTensor(n, r, np.where(subs[:, 0] < m, value, p))


def clique_tensor(n: int, r: int, m: int, p: float) -> SymTensor:
    """1 on r-sets inside [m], p elsewhere."""
    subs = subset_index(n, r)
    return SymTensor(n, r, np.where(subs[:, -1] < m, 1.0, p))


def _smallest_feasible(problem: TailProblem, build, lo: int, hi: int):
    """Least m in [lo, hi] with build(m) feasible, assuming monotonicity in m."""
    if not problem.feasible(build(hi)):
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if problem.feasible(build(mid)):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _upper_problem(H: RGraph, n: int, p: float, delta: float) -> TailProblem:
    return TailProblem([H], [delta], n, p, ["upper"])


def planted_hub(H: RGraph, n: int, p: float, delta: float) -> VariationalSolution:
    prob = _upper_problem(H, n, p, delta)
    m = _smallest_feasible(prob, lambda m: hub_tensor(n, H.r, m, p), 0, n)
    if m is None:
        raise ValueError("hub construction is infeasible even with m = n")
    return _solution(prob, hub_tensor(n, H.r, m, p), "planted-hub", m=m)


def planted_clique(H: RGraph, n: int, p: float, delta: float) -> VariationalSolution:
    prob = _upper_problem(H, n, p, delta)
    m = _smallest_feasible(prob, lambda m: clique_tensor(n, H.r, m, p), 0, n)
    if m is None:
        raise ValueError("clique construction is infeasible even with m = n")
    return _solution(prob, clique_tensor(n, H.r, m, p), "planted-clique", m=m)


def half_density_hub(H: RGraph, n: int, p: float, delta: float) -> VariationalSolution:
    """Induced-count construction: 1/2 on r-sets meeting [m], p elsewhere.

    Induced counts are not monotone in m, so every m is scanned.
    """
    prob = TailProblem([H], [delta], n, p, ["upper"], induced=True)
    for m in range(1, n + 1):
        Q = hub_tensor(n, H.r, m, p, 0.5)
        if prob.feasible(Q):
            return _solution(prob, Q, "planted-half-hub", m=m)
    raise ValueError("half-density hub is infeasible for every hub size")


def constant_solution(problem: TailProblem) -> VariationalSolution:
    """Q ≡ q with q meeting the binding density constraint with equality."""
    n, r, p = problem.n, problem.r, problem.p
    ones = SymTensor.full(n, r, 1.0)
    qs = []
    for k, g in enumerate(problem.graphs):
        target = problem.target(k)
        if problem.induced:
            e = g.num_edges
            c = math.comb(g.num_vertices, g.r) - e
            peak = e / (e + c)
            f = lambda q: problem.density(k, SymTensor.full(n, r, q)) - target
            if f(peak) < 0:
                raise ValueError("no constant tensor reaches the induced target")
            qs.append(brentq(f, min(p, peak), peak, xtol=1e-15) if f(min(p, peak)) < 0 else min(p, peak))
            continue
        base = problem.density(k, ones)
        qs.append((target / base) ** (1.0 / g.num_edges))
    up = [q for q, d in zip(qs, problem.directions) if d == "upper"]
    low = [q for q, d in zip(qs, problem.directions) if d == "lower"]
    q = max(up) if up else min(low)
    if low and q > min(low) * (1 + 1e-12):
        raise ValueError("upper and lower constraints admit no common constant")
    if not 0 <= q <= 1:
        raise ValueError(f"constant solution q={q} lies outside [0,1]")
    Q = SymTensor.full(n, r, q)
    for _ in range(200):  # absorb rounding in the root
        if problem.feasible(Q, 0.0):
            break
        q = q + (1e-15 + 1e-14 * q) * (1 if up else -1)
        Q = SymTensor.full(n, r, q)
    if not problem.feasible(Q) or not 0 <= q <= 1:
        raise ValueError("constant solution could not be made feasible")
    return _solution(problem, Q, "constant", q=float(q))


# ---------------------------------------------------------------- descent


def _repair(problem: TailProblem, Q: SymTensor, anchor: SymTensor | None) -> SymTensor | None:
    """Move Q along a segment until every constraint holds (None if impossible).

    Upper tails move toward 1 and lower tails toward 0, both monotone in t;
    induced or mixed problems move toward ``anchor``, a known feasible point.
    """
    if problem.feasible(Q, 0.0):
        return Q
    dirs = set(problem.directions)
    if not problem.induced and dirs == {"upper"}:
        end = np.ones_like(Q.values)
    elif not problem.induced and dirs == {"lower"}:
        end = np.zeros_like(Q.values)
    elif anchor is not None:
        end = anchor.values
    else:
        return None
    seg = lambda s: SymTensor(Q.n, Q.r, (1 - s) * Q.values + s * end)
    if not problem.feasible(seg(1.0), 0.0):
        return None
    grid = np.linspace(0, 1, 65)
    lo = 0.0
    for s in grid[1:]:
        if problem.feasible(seg(s), 0.0):
            hi = s
            break
        lo = s
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if problem.feasible(seg(mid), 0.0):
            hi = mid
        else:
            lo = mid
    return seg(hi)


def _descent(problem: TailProblem, x0: np.ndarray, scale: float, iters: int,
             gamma: float = 1e-9) -> np.ndarray:
    """Augmented Lagrangian (PHR) with L-BFGS-B inner solves on a shrunken box."""
    n, r, p = problem.n, problem.r, problem.p
    K = len(problem.graphs)
    sign = np.array([-1.0 if d == "upper" else 1.0 for d in problem.directions])
    lam = np.zeros(K)
    mu = 10.0
    x = np.clip(x0, gamma, 1 - gamma)
    lp, l1p = math.log(p), math.log1p(-p)

    def cons(xv):
        Q = SymTensor(n, r, xv)
        c = np.empty(K)
        g = []
        for k in range(K):
            tk = problem.target(k)
            c[k] = sign[k] * (problem.density(k, Q) / tk - 1)
            g.append(sign[k] * problem.density_grad(k, Q) / tk)
        return c, g

    def fun(xv):
        f = float(np.sum(relent_scalar(p, xv))) / scale
        gf = (np.log(xv) - lp - np.log1p(-xv) + l1p) / scale
        c, g = cons(xv)
        act = np.maximum(0.0, lam + mu * c)
        f += float(np.sum(act ** 2 - lam ** 2)) / (2 * mu)
        for k in range(K):
            gf = gf + act[k] * g[k]
        return f, gf

    bounds = [(gamma, 1 - gamma)] * x.size
    prev = math.inf
    for _ in range(iters):
        res = minimize(fun, x, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 300, "gtol": 1e-10, "ftol": 1e-14})
        x = res.x
        c, _ = cons(x)
        lam = np.maximum(0.0, lam + mu * c)
        viol = float(np.max(np.maximum(c, 0.0)))
        if viol > 0.25 * prev:
            mu *= 10
        prev = viol
        if viol < 1e-10 and res.success:
            break
    return x


def solve(problem: TailProblem, init=0, iters: int = 12, restarts: int = 2,
          warm_starts: list | None = None) -> VariationalSolution:
    """Best feasible point among planted constructions and descent runs.

    Returned values are upper bounds on the infimum; ``info`` lists every
    candidate's value.
    """
    n, r, p = problem.n, problem.r, problem.p
    cands: list[VariationalSolution] = []
    single_upper = len(problem.graphs) == 1 and problem.directions[0] == "upper"
    H, d = problem.graphs[0], problem.deltas[0]
    builders = []
    if single_upper and not problem.induced:
        builders += [lambda: planted_hub(H, n, p, d), lambda: planted_clique(H, n, p, d)]
    if problem.induced:
        builders.append(lambda: half_density_hub(H, n, p, d))
    builders.append(lambda: constant_solution(problem))
    for b in builders:
        try:
            cands.append(b())
        except ValueError:
            pass
    # keep constructions scored against the problem actually posed
    cands = [_solution(problem, c.Q, c.method, **c.info) for c in cands if problem.feasible(c.Q)]
    anchor = min(cands, key=lambda c: c.value).Q if cands else None
    starts = [c.Q.values for c in cands]
    if warm_starts:
        starts += [np.asarray(w.values if isinstance(w, SymTensor) else w, dtype=float) for w in warm_starts]
    rng = np.random.default_rng(init)
    for _ in range(restarts):
        base = anchor.values if anchor is not None else np.full(math.comb(n, r), p)
        starts.append(np.clip(base + 0.05 * rng.standard_normal(base.size), 0, 1))
    scale = max(1.0, min((c.value for c in cands), default=1.0))
    for x0 in starts:
        x = _descent(problem, x0, scale, iters)
        Q = _repair(problem, SymTensor(n, r, x), anchor)
        if Q is not None and problem.feasible(Q):
            cands.append(_solution(problem, Q, "projected-descent"))
    if not cands:
        raise ValueError("no feasible candidate found")
    best = min(cands, key=lambda c: (c.value, c.method))
    info = dict(best.info)
    info["candidates"] = sorted(((c.method, c.value) for c in cands), key=lambda t: t[1])
    return VariationalSolution(best.Q, best.value, best.residuals, "best-of:" + best.method, info)


def phi_lower_bound_reference(H: RGraph, n: int, p: float, delta: float = 1.0) -> float:
    D = max_degree(H)
    if D < 2:
        raise ValueError("the reference scale needs max degree at least 2")
    return float(n) ** H.r * p ** D * math.log(1 / p)


def phi_induced(H: RGraph, n: int, p: float, delta: float, **opts) -> VariationalSolution:
    if p > 0.5:
        raise ValueError("induced problems assume p bounded away from 1 (p <= 1/2 here)")
    return solve(TailProblem([H], [delta], n, p, ["upper"], induced=True), **opts)


def psi_properties_check(H: RGraph, ns, p: float, delta: float, **opts) -> dict:
    """Clamping to min(Q,p) keeps lower-tail feasibility without raising entropy,
    and value / (n^r p) stays in a band along the ladder."""
    rows = []
    for n in ns:
        prob = TailProblem([H], [delta], n, p, ["lower"])
        sol = solve(prob, **opts)
        clamped = sol.Q.map(lambda v: np.minimum(v, p))
        rows.append({
            "n": n, "value": sol.value, "clamped_value": relent(p, clamped),
            "clamp_feasible": prob.feasible(clamped),
            "clamp_not_worse": relent(p, clamped) <= sol.value * (1 + 1e-12) + 1e-15,
            "normalized": sol.value / (float(n) ** H.r * p),
        })
    norm = [row["normalized"] for row in rows]
    return {"rows": rows, "band": [min(norm), max(norm)],
            "holds": all(r_["clamp_feasible"] and r_["clamp_not_worse"] for r_ in rows) and min(norm) > 0}
