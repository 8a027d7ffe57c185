import json
import math
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from hyperdev import io
from hyperdev.cli import EXIT_INPUT, EXIT_OK, main
from hyperdev.hypergraph import clique, fano
from hyperdev.norms import matrix_base, star_base, uniform_base
from hyperdev.tensors import ErModel, SymTensor, sample


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_graph_roundtrip():
    for g in (clique(4, 3), fano()):
        assert io.graph_from_json(json.loads(io.dumps(io.graph_to_json(g)))) == g
    assert io.read_graph("clique:4:2") == clique(4, 2)
    with pytest.raises(io.InputError):
        io.graph_from_json({"r": 2, "edges": []})
    with pytest.raises(io.InputError):
        io.read_graph("not-a-graph")


def test_tensor_roundtrip(tmp_path):
    S = SymTensor(5, 3, np.random.default_rng(0).random(10))
    assert io.tensor_from_json(json.loads(io.dumps(io.tensor_to_json(S)))) == S
    path = tmp_path / "g.json"
    path.write_text(io.dumps(io.graph_to_json(clique(3, 2))))
    assert io.read_tensor(str(path)) == SymTensor(3, 2, [1, 1, 1])
    with pytest.raises(io.InputError):
        io.tensor_from_json({"n": 3, "r": 2, "entries": [[0, 1]]})
    with pytest.raises(io.InputError):
        io.read_tensor("{broken")


def test_base_roundtrip():
    for wb in (matrix_base(2), star_base(3), uniform_base(3, 2, 3, 1)):
        assert io.base_from_json(json.loads(io.dumps(io.base_to_json(wb)))) == wb
    listed = {"edge": [0, 1], "members": [[0], [1]], "d_star": 2, "d_b": [1, 1]}
    assert io.base_from_json(listed) == matrix_base(2)
    with pytest.raises(io.InputError):
        io.base_from_json({"edge": [0, 1]})


def test_dumps_special_values():
    text = io.dumps({"a": math.inf, "b": Fraction(3, 2), "c": np.int64(4), "d": np.arange(2)})
    back = json.loads(text)
    assert back == {"a": math.inf, "b": "3/2", "c": 4, "d": [0, 1]}


def test_delta_prime(capsys):
    code, out, _ = run(capsys, "delta-prime", "clique:4:2")
    assert code == EXIT_OK and out["value"] == "4" and len(out["per_edge"]) == 6
    code, out, _ = run(capsys, "delta-prime", "star:3:3")
    assert out["value"] == "4/3"


def test_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert run(capsys, "hom", "--graph", "clique:3:2", "--tensor", str(bad))[0] == EXIT_INPUT
    code, _, err = run(capsys, "verify", "everything")
    assert code == EXIT_INPUT and "counting" in err
    assert run(capsys, "frobnicate")[0] == EXIT_INPUT
    assert run(capsys, "phi", "--graph", "clique:3:2", "--n", "5", "--p", "1.5",
               "--delta", "1")[0] == EXIT_INPUT


def test_hom(capsys, tmp_path):
    path = tmp_path / "t.json"
    path.write_text(io.dumps(io.graph_to_json(clique(3, 2))))
    code, out, _ = run(capsys, "hom", "--graph", "clique:3:2", "--tensor", str(path), "--p", "0.5")
    assert code == EXIT_OK and out["hom"] == 6 and out["tp"] == pytest.approx(6 / 27 / 0.125)


def test_norm_and_decompose(capsys, tmp_path):
    A = sample(ErModel(7, 2, 0.5), 0)
    t, b = tmp_path / "a.json", tmp_path / "b.json"
    t.write_text(io.dumps(io.tensor_to_json(A)))
    b.write_text(io.dumps(io.base_to_json(matrix_base(2))))
    code, out, _ = run(capsys, "norm", "--tensor", str(t), "--base", str(b), "--p", "0.5",
                       "--center", "--mode", "exact")
    assert code == EXIT_OK and out["certificate"]["mode"] == "exact"
    code, out, _ = run(capsys, "decompose", "--tensor", str(t), "--base", str(b), "--p", "0.5",
                       "--eps", "0.3", "--kappa", "1e6")
    assert code == EXIT_OK and out["status"] == "converged" and out["verification"]["all_pass"]
    code, out, _ = run(capsys, "decompose", "--sample", "7", "--base", str(b), "--p", "0.5",
                       "--eps", "0.3", "--kappa", "0")
    assert out["status"] == "budget-exhausted" and out["verification"]["residual"] == "not claimed"


def test_infeasible_exact_norm_guides_user(capsys, tmp_path):
    t, b = tmp_path / "a.json", tmp_path / "b.json"
    t.write_text(io.dumps(io.tensor_to_json(SymTensor.full(7, 3, 0.5))))
    b.write_text(io.dumps(io.base_to_json(uniform_base(3, 2, 3, 1))))
    code, _, err = run(capsys, "norm", "--tensor", str(t), "--base", str(b), "--p", "0.5",
                       "--mode", "exact")
    assert code == EXIT_INPUT and "heuristic" in err


def test_phi_edge(capsys):
    code, out, _ = run(capsys, "phi", "--graph", "edge:2", "--n", "8", "--p", "0.3",
                       "--delta", "0.5")
    n, p = 8, 0.3
    q = 1.5 * p * n / (n - 1)
    expect = math.comb(n, 2) * (q * math.log(q / p) + (1 - q) * math.log((1 - q) / (1 - p)))
    assert code == EXIT_OK and out["value"] == pytest.approx(expect, rel=1e-6)


def test_tail_and_output_file(capsys, tmp_path):
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "--output", str(dest), "tail", "--graph", "clique:3:2", "--n", "5",
                       "--p", "0.3", "--delta", "1", "--method", "exact")
    assert code == EXIT_OK and out is None
    rep = json.loads(dest.read_text())
    assert rep["exact"] and rep["prob"] == pytest.approx(0.047349, abs=1e-6)


def test_psi(capsys):
    code, out, _ = run(capsys, "psi", "--graph", "edge:2", "--ns", "8,10", "--p", "0.3",
                       "--delta", "0.3")
    assert code == EXIT_OK and out["holds"]


def test_verify_suite(capsys):
    code, out, _ = run(capsys, "verify", "sidorenko")
    assert code == EXIT_OK and out["passed"] and out["suite"] == "sidorenko"


def test_console_script_and_threads():
    env = dict(os.environ, HYPERDEV_THREADS="3")
    proc = subprocess.run([sys.executable, "-m", "hyperdev", "delta-prime", "fano"],
                          capture_output=True, text=True, env=env, check=True)
    out = json.loads(proc.stdout)
    assert out["value"] == "3" and out["threads"] == 3
    proc = subprocess.run([sys.executable, "-m", "hyperdev", "--threads", "2", "delta-prime", "fano"],
                          capture_output=True, text=True, env=env, check=True)
    assert json.loads(proc.stdout)["threads"] == 2
