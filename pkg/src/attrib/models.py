"""Named models, value snapshots, and the graph-to-function compiler.

Model file grammar (line oriented; ``#`` starts a comment; sections in any
order, ``[variables]`` required)::

    [variables]
    a p c                  # names, whitespace separated, one or more per line
    [segments]             # optional variable -> label map
    a : department
    [multilinear]          # names ':' coefficient; empty name list = constant
    a p c : 1
    [separable]            # name ':' kind param...
    a : poly 0 2 1         # 0 + 2x + x^2
    p : log 1 0 1          # 1 * ln(1*x + 0)

Graph file grammar::

    [nodes]
    a b t
    [sink]
    t
    [starts]               # node ':' start-count variable name
    a : s_a
    [edges]                # from to ':' traversal-probability variable name
    a b : p_ab

Snapshots are CSV rows ``entity,variable,initial,final`` (header optional).
Numbers are parsed as decimal doubles; ``format_model`` writes coefficients
with repr so a round trip is bit exact.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .core import CharacteristicFunction, SeparableTerm, ValuePair, from_terms

__all__ = [
    "ModelError",
    "ModelSpec",
    "DagModel",
    "ValueSnapshot",
    "parse_model",
    "format_model",
    "compile_model",
    "parse_dag",
    "compile_dag",
    "parse_snapshots",
    "snapshot_pair",
    "procurement_model",
    "payperclick_model",
    "portfolio_model",
    "basketball_model",
    "ecommerce_dag_example",
]


class ModelError(ValueError):
    """Malformed model, graph, or snapshot input."""


@dataclass
class ModelSpec:
    """Named description of a characteristic function."""

    variables: tuple[str, ...]
    ml_terms: tuple[tuple[tuple[str, ...], float], ...] = ()
    sep_terms: tuple[tuple[str, str, tuple[float, ...]], ...] = ()
    segments: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ModelError("variable names must be unique")
        declared = set(self.variables)
        for names, _ in self.ml_terms:
            for name in names:
                if name not in declared:
                    raise ModelError(f"term references undeclared variable {name!r}")
        for name, _, _ in self.sep_terms:
            if name not in declared:
                raise ModelError(f"separable term references undeclared variable {name!r}")
        for name in self.segments:
            if name not in declared:
                raise ModelError(f"segment entry references undeclared variable {name!r}")

    @property
    def n(self) -> int:
        return len(self.variables)

    def index_of(self, name: str) -> int:
        return self.variables.index(name) + 1


def compile_model(ms: ModelSpec) -> CharacteristicFunction:
    terms: dict[tuple[int, ...], float] = {}
    for names, coeff in ms.ml_terms:
        key = tuple(sorted(ms.index_of(v) for v in names))
        if len(set(key)) != len(key):
            raise ModelError(f"variable repeated within one term: {names}")
        terms[key] = terms.get(key, 0.0) + coeff
    sep = tuple(SeparableTerm(ms.index_of(name), kind, params) for name, kind, params in ms.sep_terms)
    return from_terms(ms.n, terms, sep)


# ---------------------------------------------------------------------------
# text format


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _sections(text: str, path: str = "<model>") -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    current: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = out.setdefault(line[1:-1].strip().lower(), [])
        elif current is None:
            raise ModelError(f"{path}:{lineno}: content before any [section] header")
        else:
            current.append(line)
    return out


def _parse_float(token: str, context: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ModelError(f"{context}: expected a number, got {token!r}") from None


def parse_model(text: str, path: str = "<model>") -> ModelSpec:
    sections = _sections(text, path)
    if "variables" not in sections:
        raise ModelError(f"{path}: missing [variables] section")
    variables = tuple(name for line in sections["variables"] for name in line.split())
    segments = {}
    for line in sections.get("segments", []):
        if ":" not in line:
            raise ModelError(f"{path}: segment line needs 'name : label', got {line!r}")
        name, label = (part.strip() for part in line.split(":", 1))
        segments[name] = label
    ml_terms = []
    for line in sections.get("multilinear", []):
        if ":" not in line:
            raise ModelError(f"{path}: term line needs 'names : coefficient', got {line!r}")
        lhs, rhs = line.rsplit(":", 1)
        ml_terms.append((tuple(lhs.split()), _parse_float(rhs.strip(), path)))
    sep_terms = []
    for line in sections.get("separable", []):
        if ":" not in line:
            raise ModelError(f"{path}: separable line needs 'name : kind params', got {line!r}")
        name, rhs = line.split(":", 1)
        fields = rhs.split()
        if len(fields) < 2:
            raise ModelError(f"{path}: separable line needs a kind and parameters, got {line!r}")
        params = tuple(_parse_float(tok, path) for tok in fields[1:])
        sep_terms.append((name.strip(), fields[0], params))
    try:
        return ModelSpec(variables, tuple(ml_terms), tuple(sep_terms), segments)
    except ValueError as exc:
        raise ModelError(f"{path}: {exc}") from None


def format_model(ms: ModelSpec) -> str:
    out = io.StringIO()
    out.write("[variables]\n")
    for name in ms.variables:
        out.write(f"{name}\n")
    if ms.segments:
        out.write("[segments]\n")
        for name in ms.variables:
            if name in ms.segments:
                out.write(f"{name} : {ms.segments[name]}\n")
    if ms.ml_terms:
        out.write("[multilinear]\n")
        for names, coeff in ms.ml_terms:
            out.write(f"{' '.join(names)} : {coeff!r}\n")
    if ms.sep_terms:
        out.write("[separable]\n")
        for name, kind, params in ms.sep_terms:
            out.write(f"{name} : {kind} {' '.join(repr(p) for p in params)}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# directed acyclic graph models


@dataclass
class DagModel:
    """Flow graph whose expected arrivals at the sink form the model.

    Every (node with a start count, route to the sink) pair becomes one term:
    coefficient 1 over the start variable and the traversal variables of the
    route.  Routes repeat no edge, so the result is multilinear.
    """

    nodes: tuple[str, ...]
    sink: str
    starts: dict[str, str]
    edges: tuple[tuple[str, str, str], ...]

    def __post_init__(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ModelError("node names must be unique")
        if self.sink not in known:
            raise ModelError(f"sink {self.sink!r} is not a node")
        for node in self.starts:
            if node not in known:
                raise ModelError(f"start entry for unknown node {node!r}")
        seen_vars = set(self.starts.values())
        if len(seen_vars) != len(self.starts):
            raise ModelError("start variables must be distinct")
        for u, v, name in self.edges:
            if u not in known or v not in known:
                raise ModelError(f"edge {u!r} -> {v!r} uses an unknown node")
            if name in seen_vars:
                raise ModelError(f"variable {name!r} assigned twice")
            seen_vars.add(name)


def parse_dag(text: str, path: str = "<dag>") -> DagModel:
    sections = _sections(text, path)
    for required in ("nodes", "sink"):
        if required not in sections:
            raise ModelError(f"{path}: missing [{required}] section")
    nodes = tuple(name for line in sections["nodes"] for name in line.split())
    sink_tokens = [tok for line in sections["sink"] for tok in line.split()]
    if len(sink_tokens) != 1:
        raise ModelError(f"{path}: exactly one sink expected")
    starts = {}
    for line in sections.get("starts", []):
        if ":" not in line:
            raise ModelError(f"{path}: start line needs 'node : variable', got {line!r}")
        node, var = (part.strip() for part in line.split(":", 1))
        starts[node] = var
    edges = []
    for line in sections.get("edges", []):
        if ":" not in line:
            raise ModelError(f"{path}: edge line needs 'from to : variable', got {line!r}")
        lhs, var = line.split(":", 1)
        ends = lhs.split()
        if len(ends) != 2:
            raise ModelError(f"{path}: edge line needs two node names, got {line!r}")
        edges.append((ends[0], ends[1], var.strip()))
    return DagModel(nodes, sink_tokens[0], starts, tuple(edges))


def _toposort(d: DagModel) -> list[str]:
    out: dict[str, list[str]] = {n: [] for n in d.nodes}
    indeg = {n: 0 for n in d.nodes}
    for u, v, _ in d.edges:
        out[u].append(v)
        indeg[v] += 1
    ready = [n for n in d.nodes if indeg[n] == 0]
    order = []
    while ready:
        n = ready.pop()
        order.append(n)
        for v in out[n]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if len(order) != len(d.nodes):
        raise ModelError("graph has a cycle")
    return order


def compile_dag(d: DagModel, path_cap: int = 10**6) -> ModelSpec:
    """Expand a graph into one term per (start node, route to sink).

    Raises on cycles, on unreachable starts, and when the route count exceeds
    path_cap (counted up front by dynamic programming, before enumeration).
    """
    order = _toposort(d)
    out_edges: dict[str, list[tuple[str, str]]] = {n: [] for n in d.nodes}
    for u, v, name in d.edges:
        out_edges[u].append((v, name))
    # route counts to the sink, in reverse topological order
    count = {n: 0 for n in d.nodes}
    count[d.sink] = 1
    for n in reversed(order):
        if n != d.sink:
            count[n] = sum(count[v] for v, _ in out_edges[n])
    total = sum(count[node] for node in d.starts)
    if total > path_cap:
        raise ModelError(f"{total} start/route pairs exceed the cap of {path_cap}")
    for node in d.starts:
        if count[node] == 0:
            raise ModelError(f"sink is unreachable from start node {node!r}")

    variables = [d.starts[node] for node in d.nodes if node in d.starts]
    variables += [name for _, _, name in d.edges]
    terms: list[tuple[tuple[str, ...], float]] = []

    def walk(node: str, used: list[str], start_var: str):
        if node == d.sink:
            terms.append(((start_var, *used), 1.0))
            return
        for v, name in out_edges[node]:
            if count[v] > 0 or v == d.sink:
                walk(v, used + [name], start_var)

    for node in d.nodes:
        if node in d.starts:
            walk(node, [], d.starts[node])
    return ModelSpec(tuple(variables), tuple(terms))


# ---------------------------------------------------------------------------
# snapshots


@dataclass
class ValueSnapshot:
    entity: str
    values: dict[str, tuple[float, float]]

    def pair_for(self, ms: ModelSpec) -> ValuePair:
        missing = [v for v in ms.variables if v not in self.values]
        extra = [v for v in self.values if v not in ms.variables]
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing {', '.join(missing)}")
            if extra:
                parts.append(f"unknown {', '.join(extra)}")
            raise ModelError(f"snapshot {self.entity!r} does not match the model: {'; '.join(parts)}")
        r = tuple(self.values[v][0] for v in ms.variables)
        s = tuple(self.values[v][1] for v in ms.variables)
        return ValuePair(r, s)


def snapshot_pair(snap: ValueSnapshot, ms: ModelSpec) -> ValuePair:
    return snap.pair_for(ms)


def parse_snapshots(text: str, path: str = "<values>") -> list[ValueSnapshot]:
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(cell.strip() for cell in row)]
    if rows and [cell.strip().lower() for cell in rows[0]] == ["entity", "variable", "initial", "final"]:
        rows = rows[1:]
    snaps: dict[str, ValueSnapshot] = {}
    ordered: list[ValueSnapshot] = []
    for lineno, row in enumerate(rows, 1):
        if len(row) != 4:
            raise ModelError(f"{path}:{lineno}: expected entity,variable,initial,final")
        entity, var = row[0].strip(), row[1].strip()
        initial = _parse_float(row[2].strip(), f"{path}:{lineno}")
        final = _parse_float(row[3].strip(), f"{path}:{lineno}")
        if entity not in snaps:
            snaps[entity] = ValueSnapshot(entity, {})
            ordered.append(snaps[entity])
        if var in snaps[entity].values:
            raise ModelError(f"{path}:{lineno}: variable {var!r} listed twice for entity {entity!r}")
        snaps[entity].values[var] = (initial, final)
    return ordered


# ---------------------------------------------------------------------------
# presets


def procurement_model() -> ModelSpec:
    """Expenditure = amount * unit price * currency conversion."""
    return ModelSpec(("a", "p", "c"), ((("a", "p", "c"), 1.0),))


def payperclick_model(positions: int = 4) -> ModelSpec:
    """Spend = eligible queries * budget availability * sum over positions of p * CTR * CPC."""
    if positions < 1:
        raise ModelError("need at least one position")
    names: list[str] = ["q", "b"]
    terms = []
    for i in range(1, positions + 1):
        names += [f"p{i}", f"ctr{i}", f"cpc{i}"]
        terms.append((("q", "b", f"p{i}", f"ctr{i}", f"cpc{i}"), 1.0))
    return ModelSpec(tuple(names), tuple(terms))


def portfolio_model(assets) -> ModelSpec:
    """Performance = sum over asset classes of return * invested weight."""
    assets = tuple(assets)
    names = []
    terms = []
    segments = {}
    for a in assets:
        w, r = f"w_{a}", f"r_{a}"
        names += [w, r]
        terms.append(((w, r), 1.0))
        segments[w] = "allocation"
        segments[r] = "selection"
    return ModelSpec(tuple(names), tuple(terms), (), segments)


def basketball_model(players) -> ModelSpec:
    """Points = sum over players of games * minutes * attempts * accuracy, accuracy in 0..100.

    The 1/100 rescaling sits in the coefficient so the accuracy variable
    keeps its conventional percent units.
    """
    players = tuple(players)
    names = []
    terms = []
    for p in players:
        g, m, a, pct = f"games_{p}", f"minutes_{p}", f"attempts_{p}", f"accuracy_{p}"
        names += [g, m, a, pct]
        terms.append(((g, m, a, pct), 0.01))
    return ModelSpec(tuple(names), tuple(terms))


def ecommerce_dag_example() -> DagModel:
    """Small storefront graph: landing and catalog pages funneling into checkout."""
    return DagModel(
        nodes=("home", "catalog", "item", "checkout"),
        sink="checkout",
        starts={"home": "s_home", "catalog": "s_catalog"},
        edges=(
            ("home", "catalog", "p_home_catalog"),
            ("home", "item", "p_home_item"),
            ("catalog", "item", "p_catalog_item"),
            ("item", "checkout", "p_item_checkout"),
            ("catalog", "checkout", "p_catalog_checkout"),
        ),
    )
