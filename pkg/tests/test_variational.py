import math

import numpy as np
import pytest

from hyperdev.hypergraph import clique, cycle, path, single_edge, star
from hyperdev.tensors import SymTensor, relent
from hyperdev.variational import (TailProblem, clique_tensor, constant_solution, half_density_hub,
                                  hub_tensor, phi_induced, phi_lower_bound_reference, planted_clique,
                                  planted_hub, psi_properties_check, solve)


def test_problem_validation():
    K3 = clique(3, 2)
    with pytest.raises(ValueError):
        TailProblem([K3], [1.0], 6, 1.0)
    with pytest.raises(ValueError):
        TailProblem([K3], [1.5], 6, 0.3, ["lower"])
    with pytest.raises(ValueError):
        TailProblem([K3], [-1.0], 6, 0.3)
    with pytest.raises(ValueError):
        TailProblem([K3, clique(3, 3)], [1, 1], 6, 0.3)
    with pytest.raises(ValueError):
        TailProblem([K3], [100.0], 6, 0.3)  # target above 1
    with pytest.raises(ValueError):
        TailProblem([K3], [1.0], 6, 0.3, ["sideways"])


def test_edge_problem_constant_is_optimal():
    n, p, d = 10, 0.3, 0.5
    prob = TailProblem([single_edge(2)], [d], n, p)
    q = (1 + d) * p * n / (n - 1)
    expect = math.comb(n, 2) * (q * math.log(q / p) + (1 - q) * math.log((1 - q) / (1 - p)))
    sol = solve(prob)
    assert sol.value == pytest.approx(expect, rel=1e-6)
    assert prob.feasible(sol.Q)


def test_constructions():
    H = clique(3, 2)
    n, p = 12, 0.2
    hub = planted_hub(H, n, p, 1.0)
    m = hub.info["m"]
    prob = TailProblem([H], [1.0], n, p)
    assert prob.feasible(hub_tensor(n, 2, m, p)) and not prob.feasible(hub_tensor(n, 2, m - 1, p))
    cl = planted_clique(H, n, p, 1.0)
    m = cl.info["m"]
    assert prob.feasible(clique_tensor(n, 2, m, p)) and not prob.feasible(clique_tensor(n, 2, m - 1, p))
    assert hub_tensor(4, 2, 0, 0.3) == SymTensor.full(4, 2, 0.3)
    assert clique_tensor(4, 2, 4, 0.3) == SymTensor.full(4, 2, 1.0)


def test_best_of_not_worse_than_any_construction():
    H = cycle(4)
    n, p = 10, 0.25
    prob = TailProblem([H], [1.0], n, p)
    sol = solve(prob)
    assert prob.feasible(sol.Q)
    for c in (planted_hub(H, n, p, 1.0), planted_clique(H, n, p, 1.0), constant_solution(prob)):
        assert sol.value <= c.value * (1 + 1e-12)
    assert sol.value == pytest.approx(relent(p, sol.Q))
    assert sol.method.startswith("best-of:")


def test_monotone_in_delta():
    H = clique(3, 2)
    vals = [solve(TailProblem([H], [d], 8, 0.3)).value for d in (0.5, 1.0, 2.0)]
    assert vals == sorted(vals)


def test_joint_at_least_single():
    n, p = 8, 0.3
    K3, P2 = clique(3, 2), path(2)
    single = solve(TailProblem([K3], [1.0], n, p)).value
    joint = solve(TailProblem([K3, P2], [1.0, 0.5], n, p))
    assert joint.value >= single * (1 - 1e-9)
    assert all(s >= -1e-8 for s in joint.residuals)


def test_lower_tail():
    prob = TailProblem([cycle(4)], [0.5], 10, 0.3, ["lower"])
    sol = solve(prob)
    assert prob.feasible(sol.Q)
    assert np.all(sol.Q.values <= 0.3 + 1e-9)  # lowering edges is what helps
    assert sol.value > 0


def test_constant_solution_mixed_directions():
    prob = TailProblem([single_edge(2), single_edge(2)], [0.5, 0.5], 6, 0.3, ["upper", "lower"])
    with pytest.raises(ValueError):
        constant_solution(prob)


def test_hypergraph_problem():
    prob = TailProblem([clique(4, 3)], [1.0], 7, 0.3)
    sol = solve(prob, restarts=1)
    assert prob.feasible(sol.Q) and sol.value > 0


def test_induced():
    sol = phi_induced(cycle(4), 8, 0.2, 0.5)
    prob = TailProblem([cycle(4)], [0.5], 8, 0.2, ["upper"], induced=True)
    assert prob.feasible(sol.Q)
    assert sol.value <= half_density_hub(cycle(4), 8, 0.2, 0.5).value * (1 + 1e-12)
    with pytest.raises(ValueError):
        phi_induced(cycle(4), 8, 0.7, 0.5)


def test_reference_scale():
    assert phi_lower_bound_reference(clique(3, 2), 10, 0.1) == pytest.approx(100 * 0.01 * math.log(10))
    with pytest.raises(ValueError):
        phi_lower_bound_reference(single_edge(2), 10, 0.1)


def test_psi_properties():
    rep = psi_properties_check(single_edge(2), [10, 14, 18], 0.3, 0.3)
    assert rep["holds"]
    rep = psi_properties_check(star(2, 2), [8, 10], 0.3, 0.5)
    assert rep["holds"] and len(rep["rows"]) == 2


def test_solution_json():
    sol = solve(TailProblem([single_edge(2)], [0.5], 5, 0.3))
    js = sol.to_json()
    assert js["n"] == 5 and len(js["Q"]["entries"]) == 10
