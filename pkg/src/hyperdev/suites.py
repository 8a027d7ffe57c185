"""Named property suites run by ``hyperdev verify``.

Each suite returns a report dict with a list of checks; a check carries a
``violations`` count and the suite passes when every count is zero.
"""

from __future__ import annotations

import math

import numpy as np

from .decomposition import decompose, verify_result
from .homomorphism import counting_lemma_check, finner_bound_check, hom_count, quotient_hom_expectation
from .hypergraph import clique, cycle, fig1, matching, path, single_edge
from .norms import dual_norm_exact, dual_norm_heuristic, matrix_base, star_base
from .tails import (convex_entropy_bound_check, fkg_restriction_check,
                    ipbelow_scan, product_tilt_lower_bound_check, sidorenko_lower_tail_check,
                    tail_event)
from .tensors import ErModel, SymTensor, sample
from .variational import TailProblem, solve


def _check(name, violations, **extra):
    return {"name": name, "violations": int(violations), **extra}


def counting(seed=0, trials=20) -> list:
    out = []
    for H, n in ((clique(3, 2), 8), (cycle(4), 8), (fig1(), 6)):
        rep = counting_lemma_check(H, n, 0.5, trials, seed=seed)
        out.append(_check(f"counting {H!r} n={n}", rep["violations"],
                          outside_hypothesis=rep["outside_hypothesis"],
                          max_ratio_to_bound=rep["max_ratio_to_bound"]))
    return out


def norms(seed=0, trials=40) -> list:
    rng = np.random.default_rng(seed)
    above = unequal = homog = tri = 0
    for k in range(trials):
        n = int(rng.integers(3, 7))
        wb = matrix_base(2) if k % 2 else star_base(2)
        p = float(rng.choice([0.3, 0.5, 1.0]))
        Z1, Z2 = (np.triu(rng.normal(size=(n, n)), 1) for _ in range(2))
        Z1, Z2 = Z1 + Z1.T, Z2 + Z2.T
        e1 = dual_norm_exact(Z1, wb, p).value
        h1 = dual_norm_heuristic(Z1, wb, p, seed=k).value
        above += h1 > e1 * (1 + 1e-9)
        unequal += h1 < e1 * (1 - 1e-9)
        c = float(rng.normal())
        homog += not math.isclose(dual_norm_exact(c * Z1, wb, p).value, abs(c) * e1,
                                  rel_tol=1e-9, abs_tol=1e-12)
        e2 = dual_norm_exact(Z2, wb, p).value
        tri += dual_norm_exact(Z1 + Z2, wb, p).value > (e1 + e2) * (1 + 1e-9)
    return [_check("heuristic <= exact", above, heuristic_below_exact=int(unequal), trials=trials),
            _check("absolute homogeneity", homog), _check("triangle inequality", tri)]


def decomposition(seed=0, trials=5) -> list:
    bad = 0
    wb = matrix_base(2)
    for s in np.random.SeedSequence(seed).spawn(trials):
        A = sample(ErModel(10, 2, 0.4), np.random.default_rng(s))
        res = decompose(A, wb, 0.4, 0.5, 1e6)
        bad += not verify_result(A, res, wb, 0.4, 0.5, 1e6)["all_pass"]
    return [_check("decomposition clauses", bad, trials=trials)]


def sidorenko(seed=0) -> list:
    bad = checked = skipped = 0
    for H in (single_edge(2), matching(2), path(2), path(3), cycle(4)):
        for n in (4, 5, 6):
            for p in (0.3, 0.5, 0.7):
                for d in (0.2, 0.5):
                    rep = sidorenko_lower_tail_check(H, n, p, d)
                    if not rep.get("in_range"):
                        skipped += 1
                        continue
                    checked += 1
                    bad += not rep["holds"]
    return [_check("sidorenko lower tail", bad, checked=checked, outside_range=skipped)]


def ldp_bounds(seed=0, trials=10) -> list:
    rng = np.random.default_rng(seed)
    n, r, N = 5, 2, 10
    convex_bad = 0
    for m in range(N + 1):
        convex_bad += not convex_entropy_bound_check([(np.ones(N), m)], n, r, 0.3)["holds"]
    for _ in range(trials):
        hs = [(rng.choice([-1.0, 1.0], N), float(rng.integers(-2, 3)))
              for _ in range(int(rng.integers(1, 4)))]
        convex_bad += not convex_entropy_bound_check(hs, n, r, 0.3)["holds"]
    K3 = clique(3, 2)
    fkg_bad = 0
    for p in (0.3, 0.5):
        for cap in (None, 1.5, 3.0):
            rep = fkg_restriction_check(TailProblem([K3], [0.5], 5, p, ["lower"]), cap)
            fkg_bad += not rep["harris_holds"]
            fkg_bad += cap is None and not rep["restriction_holds"]
    prob = TailProblem([K3], [1.0], 5, 0.3)
    nu = solve(prob).Q
    tilt = product_tilt_lower_bound_check(tail_event(prob), nu, n, r, 0.3)
    finner_bad = 0
    for k in range(trials * 5):
        H = (K3, cycle(4), path(3), fig1())[k % 4]
        Z = SymTensor(5 if H.r == 2 else 6, H.r,
                      rng.random(math.comb(5 if H.r == 2 else 6, H.r)) * rng.integers(1, 4))
        finner_bad += not finner_bound_check(H, Z)["holds"]
    quot_bad = 0
    for k in range(trials):
        Q = SymTensor(5, 2, rng.random(10))
        H = (K3, cycle(4), path(2))[k % 3]
        quot_bad += quotient_hom_expectation(H, Q) < hom_count(H, Q) * (1 - 1e-12)
    scan = ipbelow_scan()
    return [_check("convex entropy bound", convex_bad),
            _check("fkg restriction", fkg_bad),
            _check("product tilt constant <= 10", 0 if tilt["C_min"] <= 10 else 1, C_min=tilt["C_min"]),
            _check("finner", finner_bad),
            _check("quotient expectation >= hom", quot_bad),
            _check("relent quadratic lower bound", 0 if scan["holds"] else 1,
                   min_ratio=scan["min_ratio"])]


SUITES = {"counting": counting, "norms": norms, "decomposition": decomposition,
          "sidorenko": sidorenko, "ldp-bounds": ldp_bounds}


def run_suite(name: str, seed=0) -> dict:
    if name not in SUITES:
        raise KeyError(name)
    checks = SUITES[name](seed=seed)
    return {"suite": name, "seed": seed, "checks": checks,
            "passed": all(c["violations"] == 0 for c in checks)}
