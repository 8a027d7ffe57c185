"""Homomorphism counts and densities, signed and induced variants, and
counting-lemma checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .hypergraph import (RGraph, SignedRGraph, image_graph, max_degree, set_partitions)
from .tensors import ErModel, SymTensor, as_array, jay, sample


def _contract(edges, arrays, num_vertices: int, n: int, batch: bool = False):
    """Σ over vertex maps of Π_e arrays[e](φ(e)); arrays may carry a batch axis."""
    used = sorted({v for e in edges for v in e})
    isolated = num_vertices - len(used)
    if not edges:
        return float(n) ** isolated
    args = []
    out = []
    bl = num_vertices  # label for the batch axis
    for e, a in zip(edges, arrays):
        args.extend([a, ([bl] if batch else []) + list(e)])
    if batch:
        out = [bl]
    val = np.einsum(*args, out, optimize="greedy")
    return val * float(n) ** isolated


def hom_count(H: RGraph, S) -> float:
    arr = as_array(S)
    _check_shape(H, arr)
    return float(_contract(H.edges, [arr] * H.num_edges, H.num_vertices, arr.shape[0]))


def hom_batch(H: RGraph, dense_batch: np.ndarray) -> np.ndarray:
    """hom(H, ·) for a stack of dense tensors of shape (B, n, ..., n)."""
    n = dense_batch.shape[1]
    if dense_batch.ndim - 1 != H.r:
        raise ValueError("tensor order does not match the uniformity")
    res = _contract(H.edges, [dense_batch] * H.num_edges, H.num_vertices, n, batch=True)
    return np.broadcast_to(res, (dense_batch.shape[0],)).astype(float)


def hom_edge_list(edges, num_vertices: int, S) -> float:
    """hom for an edge list that may repeat edges or repeat vertices inside an edge."""
    arr = as_array(S)
    return float(_contract(list(edges), [arr] * len(edges), num_vertices, arr.shape[0]))


def _check_shape(H: RGraph, arr: np.ndarray):
    if arr.ndim != H.r:
        raise ValueError(f"tensor order {arr.ndim} does not match uniformity {H.r}")


def _pow(p, e):
    if isinstance(p, Fraction):
        return float(p ** e)
    return float(p) ** e


def t_density(H: RGraph, S) -> float:
    n = as_array(S).shape[0]
    return hom_count(H, S) / float(n) ** H.num_vertices


def tp_density(H: RGraph, S, p) -> float:
    if p <= 0:
        raise ValueError("p must be positive")
    return t_density(H, S) / _pow(p, H.num_edges)


@dataclass
class EdgeTensorAssignment:
    graph: RGraph
    tensors: dict

    def __post_init__(self):
        keyed = {tuple(sorted(k)): v for k, v in self.tensors.items()}
        if set(keyed) != set(self.graph.edges):
            raise ValueError("need exactly one tensor per edge")
        shapes = {as_array(v).shape for v in keyed.values()}
        if len(shapes) > 1:
            raise ValueError("tensor shapes disagree")
        self.tensors = keyed

    @classmethod
    def constant(cls, graph: RGraph, S) -> "EdgeTensorAssignment":
        return cls(graph, {e: S for e in graph.edges})

    def arrays(self) -> list:
        return [as_array(self.tensors[e]) for e in self.graph.edges]

    @property
    def n(self) -> int:
        return self.arrays()[0].shape[0] if self.graph.edges else 0


def hom_multilinear(assign: EdgeTensorAssignment) -> float:
    H = assign.graph
    arrays = assign.arrays()
    n = arrays[0].shape[0] if arrays else 1
    return float(_contract(H.edges, arrays, H.num_vertices, n))


def tilde(S) -> np.ndarray:
    """J - S: one minus S on distinct coordinates, zero elsewhere."""
    arr = as_array(S)
    n, r = arr.shape[0], arr.ndim
    return jay(n, r).dense() - arr


def hom_signed(sH: SignedRGraph, assign: EdgeTensorAssignment) -> float:
    if assign.graph != sH.graph:
        raise ValueError("assignment is for a different graph")
    H = sH.graph
    arrays = [a if s > 0 else tilde(a) for a, s in zip(assign.arrays(), sH.sign)]
    n = arrays[0].shape[0] if arrays else 1
    return float(_contract(H.edges, arrays, H.num_vertices, n))


def complement_signing(H: RGraph) -> SignedRGraph:
    """Complete r-graph on V(H), + on E(H) and - on the other r-sets."""
    K = RGraph(H.r, H.num_vertices, tuple(itertools.combinations(range(H.num_vertices), H.r)))
    present = set(H.edges)
    return SignedRGraph(K, tuple(1 if e in present else -1 for e in K.edges))


def induced_hom(H: RGraph, Q) -> float:
    if H.num_vertices < H.r:
        raise ValueError("need v(H) >= r")
    sK = complement_signing(H)
    return hom_signed(sK, EdgeTensorAssignment.constant(sK.graph, Q))


def induced_hom_batch(H: RGraph, dense_batch: np.ndarray) -> np.ndarray:
    sK = complement_signing(H)
    n, r = dense_batch.shape[1], dense_batch.ndim - 1
    J = jay(n, r).dense()
    arrays = [dense_batch if s > 0 else J[None] - dense_batch for s in sK.sign]
    return np.asarray(_contract(sK.graph.edges, arrays, H.num_vertices, n, batch=True), dtype=float)


def counting_constant(m: int, r: int) -> int:
    if m < 0:
        raise ValueError("m must be nonnegative")
    c = 0
    for k in range(1, m + 1):
        c = k * 2 ** r * (1 + c)
    return c


# ---------------------------------------------------------------- gradients


def _edge_gradient(edges, arrays, num_vertices: int, n: int, r: int) -> np.ndarray:
    """Σ_k ∂/∂arrays[k] of the contraction, as a dense [n]^r array."""
    grad = np.zeros((n,) * r)
    for k, e in enumerate(edges):
        args = []
        for j, f in enumerate(edges):
            if j != k:
                args.extend([arrays[j], list(f)])
        covered = {v for j, f in enumerate(edges) if j != k for v in f}
        used = covered | set(e)
        if args:
            for v in set(e) - covered:  # vertex private to e: free index
                args.extend([np.ones(n), [v]])
            marg = np.einsum(*args, list(e), optimize="greedy")
        else:
            marg = np.ones((n,) * r)
        grad = grad + marg * float(n) ** (num_vertices - len(used))
    return grad


def _to_subsets(grad: np.ndarray) -> np.ndarray:
    from .tensors import flat_positions

    n, r = grad.shape[0], grad.ndim
    return grad.reshape(-1)[flat_positions(n, r)].sum(axis=0)


def hom_gradient(H: RGraph, S) -> np.ndarray:
    """d hom(H,S) / d S(I) for each r-subset I (S viewed as a symmetric tensor)."""
    arr = as_array(S)
    n, r = arr.shape[0], arr.ndim
    return _to_subsets(_edge_gradient(H.edges, [arr] * H.num_edges, H.num_vertices, n, r))


def induced_hom_gradient(H: RGraph, S) -> np.ndarray:
    """d induced_hom(H,S) / d S(I) for each r-subset I."""
    arr = as_array(S)
    n, r = arr.shape[0], arr.ndim
    sK = complement_signing(H)
    t = tilde(arr)
    grad = np.zeros((n,) * r)
    edges = sK.graph.edges
    arrays = [arr if s > 0 else t for s in sK.sign]
    for k, (e, s) in enumerate(zip(edges, sK.sign)):
        args = []
        for j, f in enumerate(edges):
            if j != k:
                args.extend([arrays[j], list(f)])
        marg = np.einsum(*args, list(e), optimize="greedy") if args else np.ones((n,) * r)
        # vertices of K outside the other edges and e are absent since K is complete
        grad = grad + s * marg
    return _to_subsets(grad)


# ---------------------------------------------------------------- checks


def finner_bound_check(H: RGraph, Z) -> dict:
    arr = as_array(Z)
    if np.any(arr < 0):
        raise ValueError("Z must be entrywise nonnegative")
    D = max_degree(H)
    if D < 1:
        raise ValueError("H needs at least one edge")
    n, r = arr.shape[0], arr.ndim
    lhs = hom_count(H, arr) / float(n) ** H.num_vertices
    rhs = (float(np.sum(arr ** D)) / float(n) ** r) ** (H.num_edges / D)
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs * (1 + 1e-12) + 1e-300)}


def _mobius_weight(labels) -> int:
    sizes = np.bincount(labels)
    return math.prod((-1) ** (int(s) - 1) * math.factorial(int(s) - 1) for s in sizes)


def injective_hom(G: RGraph, Q) -> float:
    """Σ over injective vertex maps of Π_e Q(φ(e)), by Möbius inversion over partitions."""
    arr = as_array(Q)
    total = 0.0
    for labels in set_partitions(G.num_vertices):
        edges = [tuple(labels[v] for v in e) for e in G.edges]
        k = max(labels) + 1 if labels else 0
        total += _mobius_weight(labels) * hom_edge_list(edges, k, arr)
    return total


def quotient_hom_expectation(H: RGraph, Q, cap: int = 10) -> float:
    """E over A ~ μ_Q of hom(H, A), exactly.

    A map φ contributes Π over the distinct image r-sets of Q, so grouping maps
    by the partition they induce on V(H) gives a sum of injective counts of
    the simple images H/π (images with a collapsed edge contribute nothing).
    """
    if H.num_vertices > cap:
        raise ValueError(f"quotient expectation needs cap >= {H.num_vertices}")
    cache: dict = {}
    total = 0.0
    for labels in set_partitions(H.num_vertices):
        img = image_graph(H, labels)
        if img is None:
            continue
        if img not in cache:
            cache[img] = injective_hom(img, Q)
        total += cache[img]
    return total


def _proper_edge_subgraphs(H: RGraph):
    for k in range(H.num_edges):
        for sub in itertools.combinations(H.edges, k):
            yield RGraph(H.r, H.num_vertices, sub)


def crude_bound(H: RGraph, A, p) -> float:
    """L = max(1, max over proper edge-subgraphs F of t_p(F, A))."""
    L = 1.0
    for F in _proper_edge_subgraphs(H):
        L = max(L, tp_density(F, A, p))
    return L


def counting_lemma_instance(H: RGraph, A1, A2, p, sys=None, mode: str = "exact") -> dict:
    """Both sides of the counting inequality for one pair (A1, A2)."""
    from .norms import default_base_system, system_norm

    sys = default_base_system(H) if sys is None else sys
    Z = as_array(A1) - as_array(A2)
    norm = system_norm(Z, sys, p, mode=mode)
    eps = norm.value / p
    L = crude_bound(H, A1, p)
    C = counting_constant(H.num_edges, H.r)
    lhs = abs(tp_density(H, A1, p) - tp_density(H, A2, p))
    bound = C * L * eps
    return {
        "distance": norm.value, "eps": eps, "L": L, "constant": C, "lhs": lhs, "bound": bound,
        "in_hypothesis": eps <= 1.0, "exact": norm.exact,
        "holds": bool(lhs <= bound * (1 + 1e-9) + 1e-12),
    }


def _perturb(A: SymTensor, rng: np.random.Generator, max_flips: int, dense_ok: bool) -> SymTensor:
    vals = A.values.copy()
    kind = rng.integers(3) if dense_ok else 0
    if kind == 0:
        k = int(rng.integers(1, max_flips + 1))
        idx = rng.choice(vals.size, size=min(k, vals.size), replace=False)
        vals[idx] = 1 - vals[idx]
    elif kind == 1:
        # resample every r-set inside a random vertex block
        from .tensors import subset_index
        block = rng.random(A.n) < 0.5
        inside = block[subset_index(A.n, A.r)].all(axis=1)
        vals[inside] = (rng.random(int(inside.sum())) < vals.mean()).astype(float)
    else:
        mask = rng.random(vals.size) < 0.15
        vals[mask] = (rng.random(int(mask.sum())) < 0.5).astype(float)
    return SymTensor(A.n, A.r, vals)


def counting_lemma_check(H: RGraph, n: int, p: float, trials: int, seed=0, sys=None,
                         max_flips: int = 3, dense_perturbations: bool | None = None) -> dict:
    """Randomized check of the counting inequality with the explicit constant.

    Pairs are a μ_p sample and a perturbation of it (entry flips, block
    resampling or sparse resampling).  Trials whose distance exceeds p are
    outside the inequality's hypothesis; they are still evaluated but reported
    separately and never counted as violations.
    """
    from .norms import config_count, default_base_system, MAX_CONFIGS

    sys = default_base_system(H) if sys is None else sys
    if dense_perturbations is None:
        full = np.ones((n,) * H.r)
        dense_perturbations = all(config_count(full, wb) <= math.log2(MAX_CONFIGS) for wb in sys)
    seqs = np.random.SeedSequence(seed).spawn(trials)
    rows, violations, outside, outside_fail = [], 0, 0, 0
    worst = 0.0
    for ss in seqs:
        rng = np.random.default_rng(ss)
        A1 = sample(ErModel(n, H.r, p), rng)
        A2 = _perturb(A1, rng, max_flips, dense_perturbations)
        row = counting_lemma_instance(H, A1, A2, p, sys)
        rows.append(row)
        if not row["in_hypothesis"]:
            outside += 1
            outside_fail += not row["holds"]
            continue
        if not row["holds"]:
            violations += 1
        if row["bound"] > 0:
            worst = max(worst, row["lhs"] / row["bound"])
    return {"graph": H.edges, "n": n, "p": p, "trials": trials, "seed": seed,
            "violations": violations, "outside_hypothesis": outside,
            "outside_hypothesis_failures": outside_fail,
            "max_ratio_to_bound": worst, "rows": rows}


def localization_instance(H: RGraph, n: int, p: float, block: int, seed=0, sys=None) -> dict:
    """A μ_p sample emptied on a vertex block versus the same sample filled there.

    The two tensors differ only inside the block, so the pair is close in any
    norm blind to where the mass sits, yet the densities of H differ a lot.
    """
    from .tensors import subset_index

    if not 0 < block <= n:
        raise ValueError("block size must lie in [1, n]")
    A = sample(ErModel(n, H.r, p), seed)
    inside = (subset_index(n, H.r) < block).all(axis=1)
    A1 = SymTensor(n, H.r, np.where(inside, 0.0, A.values))
    A2 = SymTensor(n, H.r, np.where(inside, 1.0, A.values))
    row = counting_lemma_instance(H, A1, A2, p, sys)
    row["block"] = block
    return row
