"""JSON formats for graphs, tensors, bases and reports."""

from __future__ import annotations

import json
import os
from fractions import Fraction

import numpy as np

from .hypergraph import RGraph, builtin
from .norms.bases import WeightedBase
from .tensors import SymTensor


class InputError(ValueError):
    """Malformed or inconsistent user input."""


def load_json(source):
    """Parse a path, a JSON string or an already-parsed object."""
    if isinstance(source, (dict, list)):
        return source
    text = source
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except (TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"invalid JSON: {exc}") from None


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, tuple):
        return list(obj)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    # non-finite floats are written as Infinity/NaN, which json.loads reads back
    return json.dumps(obj, default=_default, indent=indent, ensure_ascii=False)


# ---------------------------------------------------------------- graphs


def graph_to_json(g: RGraph) -> dict:
    return {"r": g.r, "vertices": g.num_vertices, "edges": [list(e) for e in g.edges]}


def graph_from_json(obj) -> RGraph:
    try:
        return RGraph(int(obj["r"]), int(obj["vertices"]), tuple(tuple(e) for e in obj["edges"]))
    except (KeyError, TypeError) as exc:
        raise InputError(f"hypergraph JSON needs r, vertices and edges ({exc})") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def read_graph(source) -> RGraph:
    """A builtin name such as ``clique:4:3``, a JSON file, or JSON text."""
    if isinstance(source, str) and not os.path.exists(source) and not source.lstrip().startswith("{"):
        try:
            return builtin(source)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    return graph_from_json(load_json(source))


# ---------------------------------------------------------------- tensors


def tensor_to_json(S: SymTensor) -> dict:
    return {"n": S.n, "r": S.r,
            "entries": [list(k) + [float(v)] for k, v in S.entries().items() if v != 0]}


def tensor_from_json(obj) -> SymTensor:
    """Tensor JSON, or hypergraph JSON read as a Boolean tensor."""
    try:
        if "entries" in obj:
            n, r = int(obj["n"]), int(obj["r"])
            entries = {}
            for row in obj["entries"]:
                if len(row) != r + 1:
                    raise InputError(f"entry {row} needs {r} indices and a value")
                entries[tuple(int(i) for i in row[:r])] = float(row[r])
            return SymTensor.from_entries(n, r, entries)
        g = graph_from_json(obj)
        return SymTensor.from_entries(g.num_vertices, g.r, {e: 1.0 for e in g.edges})
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad tensor JSON ({exc})") from None
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from None


def read_tensor(source) -> SymTensor:
    return tensor_from_json(load_json(source))


# ---------------------------------------------------------------- bases


def _member_key(b) -> str:
    return ",".join(str(v) for v in sorted(b))


def base_to_json(wb: WeightedBase) -> dict:
    return {"edge": list(wb.edge), "members": [sorted(b) for b in wb.members],
            "d_star": wb.d_star, "d_b": {_member_key(b): d for b, d in zip(wb.members, wb.d_b)},
            "iota": list(wb.iota)}


def base_from_json(obj) -> WeightedBase:
    try:
        members = [frozenset(int(v) for v in m) for m in obj["members"]]
        if frozenset() not in members:
            members.insert(0, frozenset())
        raw = obj.get("d_b", {})
        if isinstance(raw, dict):
            d_b = [0 if not b else int(raw[_member_key(b)]) for b in members]
        else:
            d_b = [int(d) for d in raw]
            if len(d_b) == len(members) - 1:
                d_b = [0] + d_b
        return WeightedBase(tuple(obj["edge"]), tuple(members), int(obj["d_star"]), tuple(d_b),
                            tuple(obj["iota"]) if obj.get("iota") is not None else None)
    except (KeyError, TypeError) as exc:
        raise InputError(f"base JSON needs edge, members, d_star and d_b ({exc})") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def read_base(source) -> WeightedBase:
    return base_from_json(load_json(source))

