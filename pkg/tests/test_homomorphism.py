import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperdev.homomorphism import (EdgeTensorAssignment, complement_signing, counting_constant,
                                   counting_lemma_check, counting_lemma_instance, crude_bound,
                                   finner_bound_check, hom_batch, hom_count, hom_gradient,
                                   hom_multilinear, hom_signed, induced_hom, induced_hom_batch,
                                   induced_hom_gradient, injective_hom, localization_instance,
                                   quotient_hom_expectation, t_density, tp_density)
from hyperdev.hypergraph import (RGraph, SignedRGraph, clique, cycle, fig1, matching, path,
                                 single_edge)
from hyperdev.tensors import ErModel, SymTensor, jay, sample, sample_many

from oracles import hom_loop

SMALL = [single_edge(2), path(2), clique(3, 2), cycle(4), matching(2), single_edge(3),
         RGraph(3, 4, ((0, 1, 2), (1, 2, 3)))]


def rand_tensor(rng, n, r, boolean=False):
    vals = rng.random(math.comb(n, r))
    return SymTensor(n, r, (vals < 0.5).astype(float) if boolean else vals)


def test_examples():
    tri = jay(3, 2)
    assert hom_count(single_edge(2), tri) == 6
    assert hom_count(clique(3, 2), tri) == 6
    assert t_density(single_edge(2), tri) == pytest.approx(2 / 3)
    assert tp_density(single_edge(2), tri, 0.5) == pytest.approx(4 / 3)
    assert hom_count(RGraph(2, 3, ((0, 1),)), tri) == 18  # isolated vertex
    assert hom_count(clique(3, 2), SymTensor(4, 2, [1, 1, 1, 0, 0, 0])) == 0  # a star
    with pytest.raises(ValueError):
        hom_count(single_edge(3), tri)


@given(st.integers(0, 10 ** 6))
def test_hom_against_loop(seed):
    rng = np.random.default_rng(seed)
    H = SMALL[seed % len(SMALL)]
    S = rand_tensor(rng, 4, H.r)
    assert hom_count(H, S) == pytest.approx(hom_loop(H, S.dense()), rel=1e-10)
    assert induced_hom(H, S) == pytest.approx(_induced_loop(H, S.dense()), rel=1e-9, abs=1e-9)


def _induced_loop(H, arr):
    n = arr.shape[0]
    present = set(H.edges)
    total = 0.0
    for phi in itertools.product(range(n), repeat=H.num_vertices):
        term = 1.0
        for e in itertools.combinations(range(H.num_vertices), H.r):
            img = tuple(phi[v] for v in e)
            if len(set(img)) < H.r:
                term = 0.0
                break
            term *= arr[img] if e in present else 1 - arr[img]
        total += term
    return total


def test_batch_matches_single():
    rng = np.random.default_rng(1)
    bits = sample_many(ErModel(5, 2, 0.5), 7, seed=2)
    dense = np.stack([SymTensor(5, 2, b).dense() for b in bits])
    for H in (clique(3, 2), cycle(4), path(3)):
        assert np.allclose(hom_batch(H, dense), [hom_count(H, d) for d in dense])
        assert np.allclose(induced_hom_batch(H, dense), [induced_hom(H, d) for d in dense])


def test_multilinear_and_signed():
    rng = np.random.default_rng(3)
    H = path(2)
    S = {e: rand_tensor(rng, 4, 2) for e in H.edges}
    assign = EdgeTensorAssignment(H, S)
    e0, e1 = H.edges
    a0, a1 = S[e0].dense(), S[e1].dense()
    expect = sum(a0[tuple(phi[v] for v in e0)] * a1[tuple(phi[v] for v in e1)]
                 for phi in itertools.product(range(4), repeat=3))
    assert hom_multilinear(assign) == pytest.approx(expect)
    sH = SignedRGraph(H, (1, -1))
    J = jay(4, 2).dense()
    expect = sum(a0[tuple(phi[v] for v in e0)] * (J - a1)[tuple(phi[v] for v in e1)]
                 for phi in itertools.product(range(4), repeat=3))
    assert hom_signed(sH, assign) == pytest.approx(expect)
    with pytest.raises(ValueError):
        EdgeTensorAssignment(H, {e0: S[e0]})


def test_induced_equals_signed_complete():
    rng = np.random.default_rng(4)
    for H in (path(2), clique(3, 2), cycle(4)):
        S = rand_tensor(rng, 5, 2)
        sK = complement_signing(H)
        assert induced_hom(H, S) == pytest.approx(
            hom_signed(sK, EdgeTensorAssignment.constant(sK.graph, S)))


def test_induced_counts_labelled_copies():
    # induced C4 in K_{2,2} plus isolated vertices: 8 labelled embeddings
    A = SymTensor.from_entries(5, 2, {(0, 2): 1, (0, 3): 1, (1, 2): 1, (1, 3): 1})
    assert induced_hom(cycle(4), A) == 8
    assert induced_hom(cycle(4), jay(5, 2)) == 0


def test_counting_constant():
    assert [counting_constant(m, 2) for m in range(3)] == [0, 4, 40]
    assert counting_constant(1, 3) == 8
    with pytest.raises(ValueError):
        counting_constant(-1, 2)


def test_finner():
    rng = np.random.default_rng(5)
    for H in (clique(3, 2), cycle(4), fig1(), path(3)):
        n = 5
        for _ in range(10):
            Z = SymTensor(n, H.r, rng.random(math.comb(n, H.r)) * 3)
            assert finner_bound_check(H, Z)["holds"]
    with pytest.raises(ValueError):
        finner_bound_check(clique(3, 2), -jay(3, 2).dense())


def test_injective_hom():
    assert injective_hom(single_edge(2), jay(4, 2)) == 12
    assert injective_hom(clique(3, 2), jay(4, 2)) == 24
    assert injective_hom(matching(2), jay(4, 2)) == 24
    assert injective_hom(matching(3), jay(4, 2)) == 0


def test_quotient_expectation_matches_enumeration():
    rng = np.random.default_rng(6)
    n = 4
    pos = list(itertools.combinations(range(n), 2))
    for H in (path(2), clique(3, 2), cycle(4)):
        q = rng.random(len(pos))
        Q = SymTensor(n, 2, q)
        exact = 0.0
        for bits in itertools.product([0, 1], repeat=len(pos)):
            b = np.array(bits)
            w = np.prod(np.where(b == 1, q, 1 - q))
            exact += w * hom_count(H, SymTensor(n, 2, b.astype(float)))
        assert quotient_hom_expectation(H, Q) == pytest.approx(exact, rel=1e-10)
        assert quotient_hom_expectation(H, Q) >= hom_count(H, Q) * (1 - 1e-12)
    with pytest.raises(ValueError):
        quotient_hom_expectation(matching(6), Q, cap=10)


def test_hom_multiplicative_and_monotone():
    rng = np.random.default_rng(7)
    S = rand_tensor(rng, 5, 2)
    G = RGraph(2, 5, ((0, 1), (1, 2), (3, 4)))
    assert hom_count(G, S) == pytest.approx(hom_count(path(2), S) * hom_count(single_edge(2), S))
    T = SymTensor(5, 2, np.minimum(1, S.values + rng.random(10) * 0.3))
    for H in (clique(3, 2), cycle(4)):
        assert hom_count(H, T) >= hom_count(H, S)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(8)
    for H, grad in ((cycle(4), hom_gradient), (clique(3, 2), induced_hom_gradient),
                    (RGraph(3, 4, ((0, 1, 2), (1, 2, 3))), hom_gradient)):
        f = hom_count if grad is hom_gradient else induced_hom
        S = rand_tensor(rng, 5, H.r)
        g = grad(H, S)
        h = 1e-6
        for i in rng.choice(S.values.size, 4, replace=False):
            up, dn = S.values.copy(), S.values.copy()
            up[i] += h
            dn[i] -= h
            fd = (f(H, SymTensor(5, H.r, up)) - f(H, SymTensor(5, H.r, dn))) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_crude_bound():
    A = jay(5, 2)
    assert crude_bound(clique(3, 2), A, 0.5) == pytest.approx((0.8 / 0.5) ** 2)
    assert crude_bound(single_edge(2), A, 0.5) == 1.0


def test_counting_instance_identical_pair():
    A = sample(ErModel(6, 2, 0.5), 0)
    row = counting_lemma_instance(clique(3, 2), A, A, 0.5)
    assert row["distance"] == 0 and row["lhs"] == 0 and row["holds"]


def test_counting_check_small():
    rep = counting_lemma_check(clique(3, 2), 7, 0.5, 20, seed=1)
    assert rep["violations"] == 0
    assert len(rep["rows"]) == 20
    assert rep == {**rep, **counting_lemma_check(clique(3, 2), 7, 0.5, 20, seed=1)}


def test_localization_instance():
    for block in (3, 4, 5):
        row = localization_instance(clique(3, 2), 10, 0.3, block)
        assert row["lhs"] > 0 and row["holds"] and row["block"] == block
    with pytest.raises(ValueError):
        localization_instance(clique(3, 2), 10, 0.3, 0)
