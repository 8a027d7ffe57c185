"""Uniform hypergraphs, boundary statistics and the overlap parameter Δ′."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import networkx as nx
import numpy as np

Edge = tuple[int, ...]

QUOTIENT_CAP = 10


@dataclass(frozen=True)
class RGraph:
    """A finite simple r-uniform hypergraph on vertices ``0..num_vertices-1``.

    Edges are stored as sorted tuples in sorted order, so two graphs with the
    same edge set compare equal.
    """

    r: int
    num_vertices: int
    edges: tuple[Edge, ...] = field(default=())

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("uniformity r must be positive")
        if self.num_vertices < 0:
            raise ValueError("vertex count must be nonnegative")
        normed = set()
        for e in self.edges:
            t = tuple(sorted(int(v) for v in e))
            if len(t) != self.r or len(set(t)) != self.r:
                raise ValueError(f"edge {tuple(e)} does not have {self.r} distinct vertices")
            if t[0] < 0 or t[-1] >= self.num_vertices:
                raise ValueError(f"edge {t} uses a label outside 0..{self.num_vertices - 1}")
            if t in normed:
                raise ValueError(f"repeated edge {t}")
            normed.add(t)
        object.__setattr__(self, "edges", tuple(sorted(normed)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(self.num_vertices)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def edge_subgraph(self, edges: Iterable[Edge]) -> "RGraph":
        return RGraph(self.r, self.num_vertices, tuple(edges))

    def __repr__(self):
        return f"RGraph(r={self.r}, v={self.num_vertices}, edges={list(self.edges)})"


@dataclass(frozen=True)
class SignedRGraph:
    graph: RGraph
    sign: tuple[int, ...]

    def __post_init__(self):
        if len(self.sign) != self.graph.num_edges:
            raise ValueError("need exactly one sign per edge")
        if any(s not in (1, -1) for s in self.sign):
            raise ValueError("signs must be +1 or -1")

    @classmethod
    def from_map(cls, graph: RGraph, sign: dict) -> "SignedRGraph":
        keyed = {tuple(sorted(k)): v for k, v in sign.items()}
        if set(keyed) != set(graph.edges):
            raise ValueError("sign map must cover exactly the edge set")
        return cls(graph, tuple(keyed[e] for e in graph.edges))

    @property
    def positive(self) -> RGraph:
        return self.graph.edge_subgraph(e for e, s in zip(self.graph.edges, self.sign) if s > 0)

    @property
    def negative(self) -> RGraph:
        return self.graph.edge_subgraph(e for e, s in zip(self.graph.edges, self.sign) if s < 0)


@dataclass(frozen=True)
class DominatingBase:
    edge: Edge
    members: tuple[frozenset, ...]

    def nonempty(self) -> tuple[frozenset, ...]:
        return tuple(b for b in self.members if b)


@dataclass(frozen=True)
class DeltaPrimeCertificate:
    value: Fraction
    per_edge: dict  # edge -> (DominatingBase, Fraction)


# ---------------------------------------------------------------- statistics


def max_degree(g: RGraph) -> int:
    if not g.edges:
        return 0
    counts = np.bincount(np.asarray(g.edges).ravel(), minlength=g.num_vertices)
    return int(counts.max())


def s_degree(g: RGraph, s: int) -> int:
    if not g.edges:
        raise ValueError("no edges")
    if not 1 <= s <= g.r:
        raise ValueError(f"s must lie in [1, {g.r}]")
    best = 0
    for e in g.edges:
        for U in itertools.combinations(e, s):
            Us = set(U)
            best = max(best, sum(1 for f in g.edges if Us.intersection(f)))
    return best


def edge_boundary(g: RGraph, U: Iterable[int]) -> set[Edge]:
    U = frozenset(U)
    key = tuple(sorted(U))
    return {e for e in g.edges if e != key and U.intersection(e)}


def dominated_boundary(g: RGraph, U: Iterable[int], b: Iterable[int]) -> set[Edge]:
    U, b = frozenset(U), frozenset(b)
    if not b <= U:
        raise ValueError("b must be a subset of U")
    if not b:
        return set()
    key = tuple(sorted(U))
    return {e for e in g.edges if e != key and U.intersection(e) and U.intersection(e) <= b}


def boundary_degree(g: RGraph, U: Iterable[int]) -> int:
    return len(edge_boundary(g, U))


def dominated_degree(g: RGraph, U: Iterable[int], b: Iterable[int]) -> int:
    return len(dominated_boundary(g, U, b))


# ---------------------------------------------------------------- Δ′


def _member_cost(g: RGraph, e: Edge, b: frozenset) -> Fraction:
    if not b:
        return Fraction(boundary_degree(g, e) + 2, g.r)
    rest = frozenset(e) - b
    return Fraction(boundary_degree(g, rest) + 1, len(rest))


def edge_overlaps(g: RGraph, e: Edge) -> set[frozenset]:
    es = frozenset(e)
    return {es & frozenset(f) for f in g.edges if f != e and es & frozenset(f)}


def _proper_subsets(e: Edge) -> list[frozenset]:
    return [frozenset(c) for k in range(1, len(e)) for c in itertools.combinations(e, k)]


def _edge_delta_prime(g: RGraph, e: Edge) -> tuple[DominatingBase, Fraction]:
    cands = _proper_subsets(e)
    cost = {b: _member_cost(g, e, b) for b in cands}
    chosen = set()
    for O in edge_overlaps(g, e):
        # cheapest proper superset; ties go to the larger set, then lexicographic
        supers = [b for b in cands if O <= b]
        chosen.add(min(supers, key=lambda b: (cost[b], -len(b), sorted(b))))
    members = [b for b in chosen if not any(b < c for c in chosen)]
    members.sort(key=lambda b: (len(b), sorted(b)))
    value = max([_member_cost(g, e, frozenset())] + [cost[b] for b in members])
    return DominatingBase(e, (frozenset(),) + tuple(members)), value


def delta_prime(g: RGraph) -> DeltaPrimeCertificate:
    """Exact Δ′ with a per-edge optimal dominating base.

    For each overlap the cheapest proper superset is chosen independently,
    which is optimal since member costs do not interact, and members strictly
    inside another chosen member are dropped.
    """
    if not g.edges:
        raise ValueError("no edges")
    per_edge = {e: _edge_delta_prime(g, e) for e in g.edges}
    return DeltaPrimeCertificate(max(v for _, v in per_edge.values()), per_edge)


def delta_prime_exhaustive(g: RGraph) -> Fraction:
    """Δ′ by enumerating every dominating antichain (oracle for small r)."""
    if not g.edges:
        raise ValueError("no edges")
    best_overall = Fraction(0)
    for e in g.edges:
        cands = _proper_subsets(e)
        overlaps = edge_overlaps(g, e)
        empty_cost = _member_cost(g, e, frozenset())
        best = None
        for k in range(len(cands) + 1):
            for fam in itertools.combinations(cands, k):
                if any(a < b or b < a for a, b in itertools.combinations(fam, 2)):
                    continue
                if not all(any(O <= b for b in fam) for O in overlaps):
                    continue
                val = max([empty_cost] + [_member_cost(g, e, b) for b in fam])
                if best is None or val < best:
                    best = val
        best_overall = max(best_overall, best)
    return best_overall


def is_dominating(g: RGraph, base: DominatingBase) -> bool:
    return all(any(O <= b for b in base.members) for O in edge_overlaps(g, base.edge))


# ---------------------------------------------------------------- quotients


def set_partitions(n: int) -> Iterator[list[int]]:
    """Restricted growth strings of length n (one per set partition of range(n))."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield list(a)
            return
        for k in range(m + 2):
            a[i] = k
            yield from rec(i + 1, max(m, k))

    a[0] = 0
    yield from rec(1, 0)


def image_graph(g: RGraph, labels: list[int]) -> RGraph | None:
    """Image of g under the vertex map ``labels``; None if some edge collapses."""
    k = max(labels) + 1 if labels else 0
    imgs = set()
    for e in g.edges:
        img = tuple(sorted({labels[v] for v in e}))
        if len(img) < g.r:
            return None
        imgs.add(img)
    return RGraph(g.r, k, tuple(imgs))


def incidence_graph(g: RGraph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from((("v", v) for v in g.vertices), kind="v")
    for i, e in enumerate(g.edges):
        G.add_node(("e", i), kind="e")
        G.add_edges_from((("e", i), ("v", v)) for v in e)
    return G


def invariant_key(g: RGraph) -> tuple:
    """Cheap isomorphism invariant used to bucket candidates."""
    wl = nx.weisfeiler_lehman_graph_hash(incidence_graph(g), node_attr="kind", iterations=3)
    return (g.r, g.num_vertices, g.num_edges, wl)


def isomorphic(g1: RGraph, g2: RGraph) -> bool:
    if (g1.r, g1.num_vertices, g1.num_edges) != (g2.r, g2.num_vertices, g2.num_edges):
        return False
    if sorted(map(g1.degree, g1.vertices)) != sorted(map(g2.degree, g2.vertices)):
        return False
    match = nx.algorithms.isomorphism.categorical_node_match("kind", None)
    return nx.is_isomorphic(incidence_graph(g1), incidence_graph(g2), node_match=match)


def quotient_family(g: RGraph, cap: int = QUOTIENT_CAP) -> list[tuple[RGraph, tuple[int, ...]]]:
    """Non-isomorphic images of g under surjections that keep every edge intact."""
    if g.num_vertices > cap:
        raise ValueError(f"quotient family needs cap >= {g.num_vertices} (got {cap})")
    buckets: dict[tuple, list[tuple[RGraph, tuple[int, ...]]]] = {}
    out = []
    for labels in set_partitions(g.num_vertices):
        h = image_graph(g, labels)
        if h is None:
            continue
        bucket = buckets.setdefault(invariant_key(h), [])
        if any(isomorphic(h, other) for other, _ in bucket):
            continue
        bucket.append((h, tuple(labels)))
        out.append((h, tuple(labels)))
    out.sort(key=lambda t: (-t[0].num_vertices, -t[0].num_edges))
    return out


# ---------------------------------------------------------------- builtins


def clique(k: int, r: int) -> RGraph:
    return RGraph(r, k, tuple(itertools.combinations(range(k), r)))


def star(arms: int, r: int) -> RGraph:
    """Sunflower with a single-vertex kernel."""
    return sunflower(arms, 1, r)


def sunflower(petals: int, kernel: int, r: int) -> RGraph:
    if not 0 <= kernel < r:
        raise ValueError("kernel size must lie in [0, r)")
    k = r - kernel
    edges = [tuple(range(kernel)) + tuple(range(kernel + i * k, kernel + (i + 1) * k)) for i in range(petals)]
    return RGraph(r, kernel + petals * k, tuple(edges))


def cycle(length: int) -> RGraph:
    if length < 3:
        raise ValueError("cycle length must be at least 3")
    return RGraph(2, length, tuple((i, (i + 1) % length) for i in range(length)))


def path(num_edges: int) -> RGraph:
    return RGraph(2, num_edges + 1, tuple((i, i + 1) for i in range(num_edges)))


def matching(num_edges: int, r: int = 2) -> RGraph:
    return RGraph(r, num_edges * r, tuple(tuple(range(i * r, (i + 1) * r)) for i in range(num_edges)))


def single_edge(r: int) -> RGraph:
    return RGraph(r, r, (tuple(range(r)),))


def fano() -> RGraph:
    lines = [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)]
    return RGraph(3, 7, tuple(lines))


def fig1() -> RGraph:
    # transpose of the incidence of K_4: vertices are the 6 pairs, edges the 4 vertex stars
    pairs = list(itertools.combinations(range(4), 2))
    edges = [tuple(i for i, pr in enumerate(pairs) if v in pr) for v in range(4)]
    return RGraph(3, 6, tuple(edges))


def disjoint_union(g1: RGraph, g2: RGraph) -> RGraph:
    if g1.r != g2.r:
        raise ValueError("uniformities differ")
    shift = g1.num_vertices
    edges = list(g1.edges) + [tuple(v + shift for v in e) for e in g2.edges]
    return RGraph(g1.r, g1.num_vertices + g2.num_vertices, tuple(edges))


_BUILTINS = {
    "clique": (clique, 2),
    "star": (star, 2),
    "sunflower": (sunflower, 3),
    "cycle": (cycle, 1),
    "path": (path, 1),
    "matching": (matching, 2),
    "edge": (single_edge, 1),
    "fano": (fano, 0),
    "fig1": (fig1, 0),
}


def builtin(text: str) -> RGraph:
    """Parse names such as ``clique:4:3``, ``cycle:5`` or ``fano``."""
    name, *args = text.strip().split(":")
    if name not in _BUILTINS:
        raise ValueError(f"unknown builtin {name!r}; known: {', '.join(sorted(_BUILTINS))}")
    fn, arity = _BUILTINS[name]
    if len(args) != arity:
        raise ValueError(f"builtin {name!r} takes {arity} integer argument(s)")
    try:
        ints = [int(a) for a in args]
    except ValueError:
        raise ValueError(f"bad integer argument in {text!r}") from None
    return fn(*ints)


# ---------------------------------------------------------------- randomized


def random_rgraph(r: int, num_vertices: int, num_edges: int, rng: np.random.Generator) -> RGraph:
    pool = list(itertools.combinations(range(num_vertices), r))
    if num_edges > len(pool):
        raise ValueError("too many edges requested")
    idx = rng.choice(len(pool), size=num_edges, replace=False)
    return RGraph(r, num_vertices, tuple(pool[i] for i in idx))


def is_connected(g: RGraph) -> bool:
    used = sorted({v for e in g.edges for v in e})
    if len(used) != g.num_vertices:
        return g.num_vertices <= 1 and not g.edges
    G = nx.Graph()
    G.add_nodes_from(used)
    for e in g.edges:
        G.add_edges_from(zip(e, e[1:]))
    return nx.is_connected(G)


def connected_graphs(r: int, max_edges: int) -> Iterator[RGraph]:
    """All connected r-graphs with 1..max_edges edges, up to isomorphism.

    Built edge by edge: each new edge must meet the current vertex set, which
    reaches every connected graph.
    """
    start = single_edge(r)
    layer = [start]
    yield start
    for _ in range(max_edges - 1):
        nxt: dict[tuple, list[RGraph]] = {}
        found = []
        for g in layer:
            v = g.num_vertices
            for k in range(1, r + 1):  # k old vertices, r-k new ones
                for old in itertools.combinations(range(v), k):
                    e = old + tuple(range(v, v + r - k))
                    if e in g.edges:
                        continue
                    h = RGraph(r, v + r - k, g.edges + (e,))
                    bucket = nxt.setdefault(invariant_key(h), [])
                    if any(isomorphic(h, o) for o in bucket):
                        continue
                    bucket.append(h)
                    found.append(h)
        yield from found
        layer = found


def is_sidorenko_candidate(g: RGraph, n: int, samples: int = 200, seed=0) -> dict:
    """Randomized search for Q with t(g, Q) < t(edge, Q)^e(g).

    Trials alternate between uniform random weights and weights supported on
    the r-sets meeting every class of a random r-partition, the latter being
    where non-Sidorenko graphs such as odd cycles fail.  A clean run is
    evidence only.
    """
    from .homomorphism import t_density
    from .tensors import SymTensor, subset_index

    if n < g.r:
        raise ValueError("need n >= r")
    rng = np.random.default_rng(seed)
    edge = single_edge(g.r)
    subs = subset_index(n, g.r)
    worst = None
    for k in range(samples):
        vals = rng.random(len(subs))
        if k % 2:
            parts = rng.integers(g.r, size=n)
            crossing = np.array([len(set(parts[s])) == g.r for s in subs])
            vals = np.where(crossing, vals, 0.0)
        Q = SymTensor(n, g.r, vals)
        lhs, rhs = t_density(g, Q), t_density(edge, Q) ** g.num_edges
        gap = lhs - rhs
        if worst is None or gap < worst[0]:
            worst = (gap, Q)
        if gap < -1e-12 * max(rhs, 1e-300):
            return {"violation": True, "trials": k + 1, "lhs": lhs, "rhs": rhs,
                    "counterexample": {"n": n, "r": g.r, "values": Q.values.tolist()}}
    return {"violation": False, "trials": samples, "min_gap": float(worst[0]) if worst else 0.0,
            "message": f"no violation found in {samples} trials"}
