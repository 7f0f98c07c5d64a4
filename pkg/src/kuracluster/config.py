"""JSON network configurations.

Node ids in files are 1-based and converted to 0-based on load. Numeric
fields accept either JSON numbers or short arithmetic expressions such as
``"pi/2 + 0.15"`` or ``"sqrt(2)/3"``. A single literal per cluster is
guaranteed by the ``{"cluster": s, "value": v}`` shorthand for ``omega``.

Example::

    {
      "n": 3,
      "adjacency": [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
      "omega": [{"cluster": 1, "value": 0.5}, {"cluster": 2, "value": "sqrt(2)/3"}],
      "gamma": 1.0, "mu_inter": 0.01, "mu_intra": 0.01,
      "rule": {"type": "hebbian-cos"},
      "partition": [[1, 2], [3]],
      "initial": {"theta": [0, 0.1, 2], "k": "random(7, -0.01, 0.01)"},
      "sim": {"dt": 0.01, "t_end": 100, "sample_every": 10}
    }
"""

from __future__ import annotations

import ast
import json
import math
import operator
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from kuracluster.graph import GraphError, build_digraph, make_partition
from kuracluster.model import NetworkSpec, SimState
from kuracluster.rules import KINDS, rule_from_dict

_number = {"oneOf": [{"type": "number"}, {"type": "string"}]}
_random_spec = {"type": "string", "pattern": r"^\s*random\s*\("}

SCHEMA = {
    "type": "object",
    "required": ["n", "adjacency", "omega", "gamma", "mu_inter", "mu_intra", "rule", "partition"],
    "properties": {
        "name": {"type": "string"},
        "notes": {},
        "n": {"type": "integer", "minimum": 1},
        "adjacency": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "omega": {
            "type": "array",
            "items": {"oneOf": [
                _number,
                {"type": "object", "required": ["cluster", "value"],
                 "properties": {"cluster": {"type": "integer", "minimum": 1}, "value": _number},
                 "additionalProperties": False},
            ]},
        },
        "gamma": _number,
        "mu_inter": _number,
        "mu_intra": _number,
        "rule": {
            "type": "object", "required": ["type"],
            "properties": {"type": {"enum": list(KINDS)}, "alpha": _number,
                           "a": {"type": "array", "items": _number},
                           "b": {"type": "array", "items": _number}},
            "additionalProperties": False,
        },
        "partition": {"type": "array", "minItems": 1,
                      "items": {"type": "array", "minItems": 1, "items": {"type": "integer"}}},
        "representatives": {"type": "array", "items": {"type": "integer"}},
        "a1_mode": {"enum": ["exact", "relaxed"]},
        "initial": {
            "type": "object",
            "properties": {
                "theta": {"oneOf": [{"type": "array", "items": _number}, _random_spec]},
                "k": {"oneOf": [{"type": "array", "items": _number}, _random_spec,
                                {"type": "object", "additionalProperties": _number}]},
            },
            "additionalProperties": False,
        },
        "sim": {
            "type": "object",
            "properties": {"dt": {"type": "number", "exclusiveMinimum": 0},
                           "t_end": {"type": "number", "minimum": 0},
                           "sample_every": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

DEFAULT_SIM = {"dt": 1e-2, "t_end": 100.0, "sample_every": 10}
BUNDLED = ("example1.json", "example2.json")


class ConfigError(Exception):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "exp": math.exp, "log": math.log}


def eval_number(value) -> float:
    """Evaluate a JSON number or a restricted arithmetic expression string."""
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"not a number: {value!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported expression {value!r}")

    try:
        out = ev(ast.parse(value, mode="eval"))
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {value!r}") from exc
    except (ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"expression {value!r}: {exc}") from exc
    if not math.isfinite(out):
        raise ValueError(f"expression {value!r} is not finite")
    return out


_RANDOM_RE = re.compile(r"^\s*random\s*\(\s*([^,]+?)\s*,\s*([^,]+?)\s*,\s*([^,]+?)\s*\)\s*$")


def parse_random(text: str) -> tuple[int, float, float]:
    m = _RANDOM_RE.match(text)
    if not m:
        raise ValueError(f"expected 'random(seed, lo, hi)', got {text!r}")
    seed = int(m.group(1))
    lo, hi = eval_number(m.group(2)), eval_number(m.group(3))
    if seed < 0 or hi < lo:
        raise ValueError(f"invalid random spec {text!r}")
    return seed, lo, hi


def seeded_uniform(seed: int, lo: float, hi: float, count: int) -> np.ndarray:
    """One uniform draw per item from independent child streams of ``seed``.

    Child ``i`` is always the ``i``-th spawn of the seed sequence, so the
    value for an edge does not depend on how many edges follow it.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return np.array([lo + (hi - lo) * np.random.Generator(np.random.PCG64(c)).random()
                     for c in children], dtype=float)


@dataclass
class RunConfig:
    spec: NetworkSpec
    initial: SimState | None
    sim: dict
    a1_mode: str = "exact"
    name: str = ""
    source: str = "<config>"
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def partition(self):
        return self.spec.partition

    @property
    def graph(self):
        return self.spec.graph


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def resolve_path(path: str | Path) -> Path:
    """``path`` itself, or the bundled config of the same file name."""
    p = Path(path)
    if p.exists():
        return p
    name = p.name if p.suffix else p.name + ".json"
    if name in BUNDLED:
        return Path(str(resources.files("kuracluster") / "data" / name))
    return p


def load_config(path: str | Path) -> RunConfig:
    p = resolve_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}", source=str(path)) from exc
    return parse_config(text, source=str(path))


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno, source) from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object", 1, source)

    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        key = str(path[0]) if path else None
        line = _line_of(text, key) if key else None
        loc = ".".join(str(x) for x in path) or "<root>"
        raise ConfigError(f"{loc}: {err.message}", line, source)

    def fail(key: str, msg: str):
        raise ConfigError(f"{key}: {msg}", _line_of(text, key.split(".")[0]), source)

    n = raw["n"]
    adj = np.array(raw["adjacency"], dtype=object)
    if adj.shape != (n, n):
        fail("adjacency", f"expected {n}x{n} matrix, got shape {adj.shape}")
    try:
        graph = build_digraph(adj.astype(np.int64))
    except GraphError as exc:
        fail("adjacency", str(exc))

    clusters1 = raw["partition"]
    try:
        clusters = [[i - 1 for i in c] for c in clusters1]
        reps = raw.get("representatives")
        reps = None if reps is None else [r - 1 for r in reps]
        partition = make_partition(clusters, reps, n=n)
    except GraphError as exc:
        key = "representatives" if "representative" in str(exc) else "partition"
        fail(key, str(exc) + " (ids are 1-based)")

    omega = _parse_omega(raw["omega"], n, partition, fail)

    params = {}
    for key in ("gamma", "mu_inter", "mu_intra"):
        try:
            params[key] = eval_number(raw[key])
        except ValueError as exc:
            fail(key, str(exc))
    if params["gamma"] <= 0:
        fail("gamma", "must be positive")
    if params["mu_inter"] < 0:
        fail("mu_inter", "must be non-negative")
    if params["mu_intra"] <= 0:
        fail("mu_intra", "must be positive")

    try:
        rd = dict(raw["rule"])
        if "alpha" in rd:
            rd["alpha"] = eval_number(rd["alpha"])
        for c in ("a", "b"):
            if c in rd:
                rd[c] = [eval_number(v) for v in rd[c]]
        rule = rule_from_dict(rd)
    except ValueError as exc:
        fail("rule", str(exc))

    spec = NetworkSpec(graph, omega, params["gamma"], params["mu_inter"], params["mu_intra"],
                       rule, partition)

    initial = None
    if "initial" in raw:
        initial = _parse_initial(raw["initial"], graph, fail)

    sim = dict(DEFAULT_SIM)
    sim.update(raw.get("sim", {}))
    return RunConfig(spec, initial, sim, raw.get("a1_mode", "exact"), raw.get("name", ""),
                     source, raw)


def _parse_omega(items, n, partition, fail) -> np.ndarray:
    omega = np.full(n, np.nan)
    if items and all(isinstance(x, dict) for x in items):
        for x in items:
            s = x["cluster"] - 1
            if s >= partition.m:
                fail("omega", f"cluster {x['cluster']} does not exist")
            try:
                omega[list(partition.clusters[s])] = eval_number(x["value"])
            except ValueError as exc:
                fail("omega", str(exc))
        if np.isnan(omega).any():
            fail("omega", "every cluster needs a frequency")
        return omega
    if any(isinstance(x, dict) for x in items):
        fail("omega", "mix of per-node and per-cluster entries")
    if len(items) != n:
        fail("omega", f"expected {n} entries, got {len(items)}")
    try:
        return np.array([eval_number(x) for x in items])
    except ValueError as exc:
        fail("omega", str(exc))


def _parse_initial(block, graph, fail) -> SimState:
    n, ne = graph.n, graph.n_edges
    th = block.get("theta", [0.0] * n)
    try:
        if isinstance(th, str):
            theta = seeded_uniform(*parse_random(th), n)
        else:
            if len(th) != n:
                fail("initial", f"theta: expected {n} entries, got {len(th)}")
            theta = np.array([eval_number(x) for x in th])
    except ValueError as exc:
        fail("initial", f"theta: {exc}")

    kk = block.get("k", [0.0] * ne)
    try:
        if isinstance(kk, str):
            k = seeded_uniform(*parse_random(kk), ne)
        elif isinstance(kk, dict):
            k = np.zeros(ne)
            seen = set()
            for key, val in kk.items():
                m = re.fullmatch(r"\s*(\d+)\s*[_,]\s*(\d+)\s*", key)
                if not m:
                    fail("initial", f"k: bad edge key {key!r}; use 'i_j'")
                edge = (int(m.group(1)) - 1, int(m.group(2)) - 1)
                if edge not in graph.edge_index:
                    fail("initial", f"k: {key!r} is not an edge of the graph")
                k[graph.edge_index[edge]] = eval_number(val)
                seen.add(edge)
            if len(seen) != ne:
                fail("initial", f"k: {ne - len(seen)} edge(s) without a value")
        else:
            if len(kk) != ne:
                fail("initial", f"k: expected {ne} per-edge entries, got {len(kk)}")
            k = np.array([eval_number(x) for x in kk])
    except ValueError as exc:
        fail("initial", f"k: {exc}")
    return SimState(theta, k)
