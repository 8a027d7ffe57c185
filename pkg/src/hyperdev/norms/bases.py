"""Weighted bases, base systems and product test tensors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..hypergraph import (RGraph, SignedRGraph, boundary_degree, delta_prime,
                          dominated_degree)


@dataclass(frozen=True)
class WeightedBase:
    """A base over an r-set ``edge`` with integer weights.

    ``members`` always starts with the empty set; ``d_b[k]`` is the weight of
    ``members[k]``. ``iota[k]`` is the vertex sitting at coordinate k.
    """

    edge: tuple[int, ...]
    members: tuple[frozenset, ...]
    d_star: int
    d_b: tuple[int, ...]
    iota: tuple[int, ...] | None = None

    def __post_init__(self):
        edge = tuple(self.edge)
        object.__setattr__(self, "edge", edge)
        members = [frozenset(b) for b in self.members]
        if frozenset() not in members:
            raise ValueError("a base must contain the empty set")
        if len(self.d_b) != len(members):
            raise ValueError("one weight per member is required")
        weights = dict(zip(members, (int(d) for d in self.d_b)))
        if len(weights) != len(members):
            raise ValueError("repeated base member")
        es = frozenset(edge)
        for b in members:
            if not b < es:
                raise ValueError(f"member {sorted(b)} is not a proper subset of the edge")
        nonempty = [b for b in members if b]
        for a, b in itertools.combinations(nonempty, 2):
            if a < b or b < a:
                raise ValueError("nonempty members must form an antichain")
        if weights[frozenset()] != 0:
            raise ValueError("the empty member has weight 0")
        if any(d > self.d_star or d < 0 for d in weights.values()):
            raise ValueError("weights must satisfy 0 <= d_b <= d_star")
        order = [frozenset()] + sorted(nonempty, key=lambda b: (len(b), sorted(b)))
        object.__setattr__(self, "members", tuple(order))
        object.__setattr__(self, "d_b", tuple(weights[b] for b in order))
        iota = tuple(self.iota) if self.iota is not None else tuple(sorted(edge))
        if sorted(iota) != sorted(edge):
            raise ValueError("iota must be a bijection onto the edge")
        object.__setattr__(self, "iota", iota)

    @property
    def r(self) -> int:
        return len(self.edge)

    def weight(self, b) -> int:
        b = frozenset(b)
        try:
            return self.d_b[self.members.index(b)]
        except ValueError:
            raise KeyError(f"{sorted(b)} is not a member of the base") from None

    def positions(self, b) -> tuple[int, ...]:
        b = frozenset(b)
        return tuple(k for k, v in enumerate(self.iota) if v in b)

    def nonempty(self) -> list[tuple[frozenset, tuple[int, ...], int]]:
        return [(b, self.positions(b), d) for b, d in zip(self.members, self.d_b) if b]

    def coefficient(self, b, n: int, p: float) -> float:
        """n^{r-|b|} p^{d*-d_b}: the size contributed by one support point of θ_b."""
        b = frozenset(b)
        return float(n) ** (self.r - len(b)) * float(p) ** (self.d_star - self.weight(b))

    def shape_key(self) -> tuple:
        """Everything the dual norm depends on besides Z and p."""
        return (self.r, self.d_star,
                tuple((self.positions(b), d) for b, d in zip(self.members, self.d_b) if b))


@dataclass(frozen=True)
class BaseSystem:
    bases: tuple[WeightedBase, ...]

    def __iter__(self):
        return iter(self.bases)

    def __len__(self):
        return len(self.bases)


def matrix_base(delta: int) -> WeightedBase:
    """Maximal base over {0,1} with the cutoff n p^{Δ-1} weights."""
    return WeightedBase((0, 1), (frozenset(), {0}, {1}), 2 * delta - 2, (0, delta - 1, delta - 1))


def star_base(delta: int) -> WeightedBase:
    """Base {∅,{0}} over {0,1}: test tensors 1_I ⊗ 1."""
    return WeightedBase((0, 1), (frozenset(), {0}), delta - 1, (0, delta - 1))


def uniform_base(r: int, size: int, d_star: int, d: int) -> WeightedBase:
    """Base of all size-``size`` subsets of range(r), each with weight d."""
    members = [frozenset()] + [frozenset(c) for c in itertools.combinations(range(r), size)]
    return WeightedBase(tuple(range(r)), tuple(members), d_star, (0,) + (d,) * (len(members) - 1))


def weighted_base_for_edge(g: RGraph, e, members, weight_graph: RGraph | None = None) -> WeightedBase:
    w = g if weight_graph is None else weight_graph
    e = tuple(sorted(e))
    members = [frozenset(b) for b in members]
    if frozenset() not in members:
        members.insert(0, frozenset())
    d_b = tuple(dominated_degree(w, e, b) for b in members)
    return WeightedBase(e, tuple(members), boundary_degree(w, e), d_b)


def default_base_system(g: RGraph, signed: SignedRGraph | None = None) -> BaseSystem:
    """Δ′-optimal dominating bases with degree weights from g (or from H_+)."""
    cert = delta_prime(g)
    weight_graph = signed.positive if signed is not None else g
    bases = [weighted_base_for_edge(g, e, cert.per_edge[e][0].members, weight_graph)
             for e in g.edges]
    return BaseSystem(tuple(bases))


def growing(wb: WeightedBase, n: int, p: float) -> float:
    if not 0 < p < 1:
        raise ValueError("p must lie in (0,1)")
    return min(float(n) ** (wb.r - len(b)) * p ** (wb.d_star - d + 2)
               for b, d in zip(wb.members, wb.d_b))


def _expand(factor: np.ndarray, positions: tuple[int, ...], r: int, batch: int = 0) -> np.ndarray:
    """Reshape a factor on [n]^b so it broadcasts over [n]^r (after ``batch`` leading axes)."""
    lead = factor.shape[:batch]
    n = factor.shape[-1] if factor.ndim > batch else 1
    shape = [1] * r
    for pos in positions:
        shape[pos] = n
    return factor.reshape(lead + tuple(shape))


@dataclass
class TestTensor:
    """T(i) = Π_b θ_b(π_b i) for Boolean factors θ_b on [n]^b."""

    __test__ = False  # not a pytest class

    base: WeightedBase
    n: int
    factors: dict = field(default_factory=dict)

    def __post_init__(self):
        given = {frozenset(k): v for k, v in self.factors.items()}
        fixed = {}
        for b, _, _ in self.base.nonempty():
            theta = given.get(b)
            if theta is None:
                theta = np.ones((self.n,) * len(b), dtype=bool)
            theta = np.asarray(theta, dtype=bool)
            if theta.shape != (self.n,) * len(b):
                raise ValueError(f"factor for {sorted(b)} has shape {theta.shape}")
            fixed[b] = theta
        extra = set(given) - set(fixed)
        if extra:
            raise ValueError("factor given for a non-member")
        self.factors = fixed

    def dense(self) -> np.ndarray:
        r = self.base.r
        out = np.ones((self.n,) * r)
        for b, pos, _ in self.base.nonempty():
            out = out * _expand(self.factors[b], pos, r)
        return out

    def support_sizes(self) -> dict:
        return {b: int(t.sum()) for b, t in self.factors.items()}

    def l1(self) -> float:
        return float(self.dense().sum())

    def is_zero(self) -> bool:
        return any(not t.any() for t in self.factors.values())

    def to_json(self) -> dict:
        return {
            "edge": list(self.base.edge),
            "n": self.n,
            "factors": [
                {"member": sorted(b), "support": [list(map(int, ix)) for ix in np.argwhere(t)]}
                for b, t in self.factors.items()
            ],
        }


def factor_size(T: TestTensor, b, p: float) -> float:
    b = frozenset(b)
    if b not in T.base.members:
        raise KeyError(f"{sorted(b)} is not a member of the base")
    if not b:
        return float(T.n) ** T.base.r * float(p) ** T.base.d_star
    return T.base.coefficient(b, T.n, p) * float(T.factors[b].sum())


def test_size(T: TestTensor, p: float) -> float:
    return max([T.l1()] + [factor_size(T, b, p) for b in T.base.members])


test_size.__test__ = False
