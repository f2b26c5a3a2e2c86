"""Case files: a MATPOWER ``.m`` subset and the native JSON format.

MATPOWER input is read by scanning the bracketed ``mpc.<name> = [ ... ];``
matrices; no MATLAB is evaluated. Only the columns the DC model needs are
used: bus PD, gen PMAX/PMIN, branch BR_X/RATE_A/BR_STATUS and polynomial
gencost rows. Susceptance is ``1 / BR_X`` in per-unit; demand, generation
and ratings stay in MW and ``base_mva`` is recorded but never applied.

The native JSON format adds what MATPOWER cannot express: the set of
flexible lines and the cardinality bound ``r``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import jsonschema
import numpy as np

from .errors import (InvalidArgument, IslandingError, MissingRating, ParseError,
                     UnsupportedCost, UnsupportedLine)
from .network import Bus, CostFunction, CostKind, Generator, Line, Network, validate


class SourceFormat(str, Enum):
    MATPOWER = "matpower"
    NATIVE = "native"


@dataclass(frozen=True)
class CaseDocument:
    network: Network
    name: str
    source_format: SourceFormat = field(default=SourceFormat.NATIVE, compare=False)
    base_mva: float = 100.0
    # internal bus id -> external (MATPOWER) bus number
    bus_id_map: dict[int, int] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class FlexibleSpec:
    """Which lines are switchable, plus the cardinality bound ``r``.

    Either ``line_ids`` (explicit list) or ``seed`` and ``fixed_count`` (a
    random connected spanning fixed set) must be given.
    """

    r: int = 0
    line_ids: tuple[int, ...] | None = None
    seed: int | None = None
    fixed_count: int | None = None

    @classmethod
    def explicit(cls, line_ids, r: int = 0) -> FlexibleSpec:
        return cls(r=r, line_ids=tuple(line_ids))

    @classmethod
    def random_spanning(cls, seed: int, fixed_count: int, r: int = 0) -> FlexibleSpec:
        return cls(r=r, seed=seed, fixed_count=fixed_count)

    @classmethod
    def parse(cls, text: str, r: int = 0) -> FlexibleSpec:
        """``"3,5,7"`` (explicit ids, may be empty) or ``"random:SEED:FIXED_COUNT"``."""
        text = text.strip()
        try:
            if text.startswith("random:"):
                _, seed, count = text.split(":")
                return cls.random_spanning(int(seed), int(count), r)
            ids = [int(tok) for tok in text.split(",") if tok.strip()]
        except ValueError:
            raise InvalidArgument(f"malformed flexible-line spec {text!r}") from None
        return cls.explicit(ids, r)


# ---------------------------------------------------------------- MATPOWER

_MATRIX = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\]\s*;?", re.S)
_SCALAR = re.compile(r"mpc\.baseMVA\s*=\s*([-+0-9.eE]+)")


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _matrix(body: str, name: str) -> list[list[float]]:
    rows = []
    for chunk in re.split(r"[;\n]", body.replace("...", " ")):
        toks = chunk.replace(",", " ").split()
        if toks:
            try:
                rows.append([float(t) for t in toks])
            except ValueError:
                raise ParseError(f"non-numeric entry in row {chunk.strip()!r}", f"mpc.{name}") from None
    widths = {len(r) for r in rows}
    if len(widths) > 1 and name != "gencost":
        raise ParseError("rows have different lengths", f"mpc.{name}")
    return rows


def parse_matpower(text: str, flexible_spec: FlexibleSpec | None = None,
                   name: str | None = None) -> CaseDocument:
    text = _strip_comments(text)
    matrices = {m.group(1): _matrix(m.group(2), m.group(1)) for m in _MATRIX.finditer(text)}
    for key in ("bus", "gen", "branch"):
        if key not in matrices:
            raise ParseError("matrix is missing", f"mpc.{key}")
    base = _SCALAR.search(text)
    if not base:
        raise ParseError("baseMVA is missing", "mpc.baseMVA")
    base_mva = float(base.group(1))
    if name is None:
        fn = re.search(r"function\s+\w+\s*=\s*(\w+)", text)
        name = fn.group(1) if fn else "case"

    bus_rows = matrices["bus"]
    id_map = {}
    buses = []
    for k, row in enumerate(bus_rows, start=1):
        if len(row) < 3:
            raise ParseError("bus rows need at least 3 columns", "mpc.bus")
        id_map[int(row[0])] = k
        buses.append(Bus(k, row[2]))

    gencost = matrices.get("gencost")
    generators = []
    for k, row in enumerate(matrices["gen"]):
        if len(row) < 10:
            raise ParseError("gen rows need at least 10 columns", "mpc.gen")
        if row[7] <= 0:
            continue
        if int(row[0]) not in id_map:
            raise ParseError(f"generator at unknown bus {int(row[0])}", "mpc.gen")
        cost = _gencost(gencost[k]) if gencost is not None and k < len(gencost) else CostFunction()
        generators.append(Generator(len(generators) + 1, id_map[int(row[0])], row[9], row[8], cost))

    lines = []
    for row in matrices["branch"]:
        if len(row) < 11:
            raise ParseError("branch rows need at least 11 columns", "mpc.branch")
        f, t, x, rate, status = int(row[0]), int(row[1]), row[3], row[5], row[10]
        if status == 0:
            continue
        if f not in id_map or t not in id_map:
            raise ParseError(f"branch {f}-{t} references an unknown bus", "mpc.branch")
        if x <= 0:
            raise UnsupportedLine(f"branch {f}-{t} has BR_X = {x}; only positive reactance is supported",
                                  "mpc.branch")
        if rate == 0:
            raise MissingRating(f"branch {f}-{t} has RATE_A = 0 (unlimited)", "mpc.branch")
        lines.append(Line(len(lines) + 1, id_map[f], id_map[t], 1.0 / x, rate))

    network = Network(tuple(buses), tuple(generators), tuple(lines), 0)
    if flexible_spec is not None:
        network = apply_flexible_spec(network, flexible_spec)
    _require_valid(network)
    return CaseDocument(network, name, SourceFormat.MATPOWER, base_mva,
                        {v: k for k, v in id_map.items()})


def _gencost(row) -> CostFunction:
    model = int(row[0])
    if model == 1:
        raise UnsupportedCost("piecewise-linear gencost (model 1) is not supported", "mpc.gencost")
    if model != 2:
        raise UnsupportedCost(f"unknown gencost model {model}", "mpc.gencost")
    n = int(row[3])
    coeffs = list(row[4:4 + n])
    if n > 3 or len(coeffs) != n:
        raise UnsupportedCost(f"polynomial gencost with {n} coefficients", "mpc.gencost")
    coeffs = [0.0] * (3 - n) + coeffs
    a, b, c = coeffs
    if a != 0:
        return CostFunction.quadratic(a, b, c)
    return CostFunction.linear(b, c)


def _require_valid(network: Network) -> None:
    problems = validate(network)
    if problems:
        raise ParseError("; ".join(v.message for v in problems))


# ------------------------------------------------------------------ native

NATIVE_SCHEMA = {
    "type": "object",
    "required": ["name", "base_mva", "r", "buses", "generators", "lines", "flexible_lines"],
    "properties": {
        "name": {"type": "string"},
        "base_mva": {"type": "number", "exclusiveMinimum": 0},
        "r": {"type": "integer", "minimum": 0},
        "buses": {"type": "array", "items": {
            "type": "object", "required": ["id", "demand"],
            "properties": {"id": {"type": "integer"}, "demand": {"type": "number"}}}},
        "generators": {"type": "array", "items": {
            "type": "object", "required": ["id", "bus", "pmin", "pmax", "cost"],
            "properties": {
                "id": {"type": "integer"}, "bus": {"type": "integer"},
                "pmin": {"type": "number"}, "pmax": {"type": "number"},
                "cost": {"type": "object", "required": ["kind", "a", "b", "c"],
                         "properties": {"kind": {"enum": ["linear", "quadratic"]},
                                        "a": {"type": "number"}, "b": {"type": "number"},
                                        "c": {"type": "number"}}}}}},
        "lines": {"type": "array", "items": {
            "type": "object", "required": ["id", "from", "to", "susceptance", "capacity"],
            "properties": {"id": {"type": "integer"}, "from": {"type": "integer"},
                           "to": {"type": "integer"}, "susceptance": {"type": "number"},
                           "capacity": {"type": "number"}}}},
        "flexible_lines": {"type": "array", "items": {"type": "integer"}},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(NATIVE_SCHEMA)


def parse_native(text: str) -> CaseDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", "$") from exc
    error = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(doc))
    if error is not None:
        path = error.json_path
        if error.validator == "required":
            missing = next((k for k in error.validator_value if k not in error.instance), None)
            if missing is not None:
                path = f"{path}.{missing}"
        raise ParseError(error.message, path)
    flexible = set(doc["flexible_lines"])
    known = {ln["id"] for ln in doc["lines"]}
    if not flexible <= known:
        raise ParseError(f"unknown line ids {sorted(flexible - known)}", "$.flexible_lines")
    buses = tuple(Bus(b["id"], float(b["demand"])) for b in doc["buses"])
    gens = tuple(Generator(g["id"], g["bus"], float(g["pmin"]), float(g["pmax"]),
                           CostFunction(CostKind(g["cost"]["kind"]), float(g["cost"]["a"]),
                                        float(g["cost"]["b"]), float(g["cost"]["c"])))
                 for g in doc["generators"])
    lines = tuple(Line(ln["id"], ln["from"], ln["to"], float(ln["susceptance"]),
                       float(ln["capacity"]), ln["id"] in flexible) for ln in doc["lines"])
    network = Network(buses, gens, lines, doc["r"])
    _require_valid(network)
    return CaseDocument(network, doc["name"], SourceFormat.NATIVE, float(doc["base_mva"]))


def write_native(case: CaseDocument) -> str:
    net = case.network
    doc = {
        "name": case.name,
        "base_mva": case.base_mva,
        "r": net.r,
        "buses": [{"id": b.id, "demand": b.demand} for b in net.buses],
        "generators": [{"id": g.id, "bus": g.bus, "pmin": g.p_min, "pmax": g.p_max,
                        "cost": {"kind": g.cost.kind.value, "a": g.cost.a, "b": g.cost.b,
                                 "c": g.cost.c}} for g in net.generators],
        "lines": [{"id": ln.id, "from": ln.from_bus, "to": ln.to_bus,
                   "susceptance": ln.susceptance, "capacity": ln.capacity} for ln in net.lines],
        "flexible_lines": [ln.id for ln in net.lines if ln.flexible],
    }
    return json.dumps(doc, indent=2) + "\n"


# --------------------------------------------------------- flexible lines

def apply_flexible_spec(network: Network, spec: FlexibleSpec) -> Network:
    """Mark lines flexible per ``spec`` and set ``r``.

    The random mode draws a uniform weight per line, fixes the minimum
    spanning tree under those weights, then fixes further randomly chosen
    lines until ``fixed_count`` lines are fixed. The result depends only on
    the seed and the line list.
    """
    n_l = len(network.lines)
    if spec.line_ids is not None:
        known = {ln.id for ln in network.lines}
        unknown = sorted(set(spec.line_ids) - known)
        if unknown:
            raise InvalidArgument(f"unknown line ids {unknown}")
        flexible = set(spec.line_ids)
    else:
        if spec.seed is None or spec.fixed_count is None:
            raise InvalidArgument("flexible spec needs line ids or a seed and fixed count")
        if spec.fixed_count > n_l:
            raise InvalidArgument(f"fixed_count {spec.fixed_count} exceeds {n_l} lines")
        if spec.fixed_count < network.n_buses - 1:
            raise InvalidArgument(f"fixed_count must be at least n_b - 1 = {network.n_buses - 1}")
        rng = np.random.default_rng(spec.seed)
        weights = rng.random(n_l)
        tree = _kruskal(network, weights)
        if len(tree) != network.n_buses - 1:
            raise IslandingError("the line graph is not connected; no spanning fixed set exists")
        rest = [k for k in rng.permutation(n_l) if k not in tree]
        fixed = set(tree) | set(rest[:spec.fixed_count - len(tree)])
        flexible = {network.lines[k].id for k in range(n_l) if k not in fixed}
    if spec.r > len(flexible):
        raise InvalidArgument(f"r = {spec.r} exceeds the {len(flexible)} flexible lines")
    return network.with_flexible(flexible, spec.r)


def _kruskal(network: Network, weights) -> list[int]:
    parent = list(range(network.n_buses + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree = []
    for k in sorted(range(len(network.lines)), key=lambda k: (weights[k], k)):
        ln = network.lines[k]
        ra, rb = find(ln.from_bus), find(ln.to_bus)
        if ra != rb:
            parent[ra] = rb
            tree.append(k)
    return tree


def load_bundled(name: str) -> CaseDocument:
    """Load a case shipped in ``otsbound/data`` (``six_bus``, ``example1``, ``tightness``)."""
    ref = resources.files("otsbound") / "data" / f"{name}.json"
    try:
        text = ref.read_text()
    except FileNotFoundError:
        raise InvalidArgument(f"no bundled case named {name!r}") from None
    return parse_native(text)


def read_case(path: str) -> CaseDocument:
    with open(path) as fh:
        return parse_native(fh.read())
