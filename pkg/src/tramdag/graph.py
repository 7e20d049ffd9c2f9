"""DAG specifications: node kinds, per-edge effect kinds, parsing, ordering.

A spec is a line-oriented text format:

    node X1 continuous
    node X3 ordinal 4
    edge X1 -> X2 : ls
    set X1 bernstein_order 30

Effect kinds per directed edge: ``ls`` (linear shift), ``cs`` (complex
shift network) and ``ci`` (complex intercept network).  A node column may
combine any number of ls/cs parents or use ci parents exclusively; mixing
ci with shift parents is rejected because a parent-dependent intercept
already absorbs any shift.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum

from .errors import (
    CycleError,
    DagSyntaxError,
    DuplicateNodeError,
    MixedInterceptColumnError,
    UnknownNodeError,
)

__all__ = [
    "NodeKind",
    "EffectKind",
    "NodeDecl",
    "DagSpec",
    "parse_dag_spec",
    "serialize_dag_spec",
    "topological_order",
    "post_intervention_graph",
    "strict_descendants",
    "DEFAULT_BERNSTEIN_ORDER",
]

DEFAULT_BERNSTEIN_ORDER = 20

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class NodeKind(str, Enum):
    CONTINUOUS = "continuous"
    ORDINAL = "ordinal"
    BINARY = "binary"


class EffectKind(str, Enum):
    NONE = "none"
    LINEAR_SHIFT = "ls"
    COMPLEX_SHIFT = "cs"
    COMPLEX_INTERCEPT = "ci"


@dataclass(frozen=True)
class NodeDecl:
    name: str
    kind: NodeKind
    levels: int | None = None
    bernstein_order: int = DEFAULT_BERNSTEIN_ORDER

    @property
    def is_discrete(self) -> bool:
        return self.kind is not NodeKind.CONTINUOUS

    @property
    def n_levels(self) -> int:
        if self.kind is NodeKind.BINARY:
            return 2
        if self.kind is NodeKind.ORDINAL:
            assert self.levels is not None
            return self.levels
        raise ValueError(f"{self.name} is continuous")


@dataclass(frozen=True)
class DagSpec:
    """Immutable DAG with one effect kind per directed node pair."""

    nodes: tuple[NodeDecl, ...]
    meta_adjacency: tuple[tuple[EffectKind, ...], ...]

    def __post_init__(self):
        _validate(self.nodes, self.meta_adjacency)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    def index_of(self, name: str) -> int:
        for i, n in enumerate(self.nodes):
            if n.name == name:
                return i
        raise UnknownNodeError(f"node {name!r} is not declared")

    def parents_of(self, j: int) -> list[tuple[int, EffectKind]]:
        """Parent indices of column j with their effect kinds, in node order."""
        return [
            (i, row[j])
            for i, row in enumerate(self.meta_adjacency)
            if row[j] is not EffectKind.NONE
        ]

    def children_of(self, i: int) -> list[int]:
        return [
            j for j, kind in enumerate(self.meta_adjacency[i])
            if kind is not EffectKind.NONE
        ]


def _validate(nodes: tuple[NodeDecl, ...], adj) -> None:
    d = len(nodes)
    seen: set[str] = set()
    for n in nodes:
        if not _NAME_RE.match(n.name):
            raise DagSyntaxError(0, f"invalid node name {n.name!r}")
        if n.name in seen:
            raise DuplicateNodeError(f"node {n.name!r} declared twice")
        seen.add(n.name)
        if n.kind is NodeKind.ORDINAL and (n.levels is None or n.levels < 2):
            raise DagSyntaxError(0, f"ordinal node {n.name} needs at least 2 levels")
        if n.bernstein_order < 1:
            raise DagSyntaxError(0, f"bernstein_order of {n.name} must be positive")
    if len(adj) != d or any(len(row) != d for row in adj):
        raise ValueError("meta adjacency must be square in the number of nodes")
    for i in range(d):
        if adj[i][i] is not EffectKind.NONE:
            raise CycleError(f"self edge on {nodes[i].name}")
    for j in range(d):
        kinds = {adj[i][j] for i in range(d)} - {EffectKind.NONE}
        if EffectKind.COMPLEX_INTERCEPT in kinds and len(kinds) > 1:
            raise MixedInterceptColumnError(
                f"node {nodes[j].name} mixes complex-intercept parents with shifts"
            )
    _kahn(nodes, adj)  # raises CycleError on a cycle


def _kahn(nodes, adj) -> list[int]:
    d = len(nodes)
    indeg = [0] * d
    for i in range(d):
        for j in range(d):
            if adj[i][j] is not EffectKind.NONE:
                indeg[j] += 1
    order: list[int] = []
    placed = [False] * d
    for _ in range(d):
        nxt = next(
            (j for j in range(d) if not placed[j] and indeg[j] == 0), None
        )
        if nxt is None:
            stuck = [nodes[j].name for j in range(d) if not placed[j]]
            raise CycleError(f"cycle through {', '.join(stuck)}")
        placed[nxt] = True
        order.append(nxt)
        for j in range(d):
            if adj[nxt][j] is not EffectKind.NONE:
                indeg[j] -= 1
    return order


def topological_order(spec: DagSpec) -> tuple[int, ...]:
    """Node indices, every parent before its children; ties by declaration."""
    return tuple(_kahn(spec.nodes, spec.meta_adjacency))


def post_intervention_graph(spec: DagSpec, node: str) -> DagSpec:
    """The spec with every edge into `node` removed (do-intervention graph)."""
    j = spec.index_of(node)
    adj = [list(row) for row in spec.meta_adjacency]
    for i in range(len(spec.nodes)):
        adj[i][j] = EffectKind.NONE
    return replace(spec, meta_adjacency=tuple(tuple(row) for row in adj))


def strict_descendants(spec: DagSpec, index: int) -> set[int]:
    """Indices reachable from `index` through at least one edge."""
    out: set[int] = set()
    frontier = [index]
    while frontier:
        i = frontier.pop()
        for j in spec.children_of(i):
            if j not in out:
                out.add(j)
                frontier.append(j)
    return out


# -- text format -------------------------------------------------------------


def parse_dag_spec(text: str) -> DagSpec:
    """Parse the line-oriented spec format; errors carry 1-based line numbers."""
    decls: list[NodeDecl] = []
    index: dict[str, int] = {}
    edges: list[tuple[int, int, EffectKind, int]] = []
    orders: dict[str, tuple[int, int]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "node":
            decl = _parse_node(tokens, lineno)
            if decl.name in index:
                raise DuplicateNodeError(
                    f"line {lineno}: node {decl.name!r} declared twice"
                )
            index[decl.name] = len(decls)
            decls.append(decl)
        elif head == "edge":
            edges.append(_parse_edge(tokens, lineno, index))
        elif head == "set":
            name, order = _parse_set(tokens, lineno, index, decls)
            if name in orders:
                raise DagSyntaxError(lineno, f"bernstein_order of {name} set twice")
            orders[name] = (order, lineno)
        else:
            raise DagSyntaxError(lineno, f"unknown directive {head!r}")

    for name, (order, lineno) in orders.items():
        i = index[name]
        if decls[i].kind is not NodeKind.CONTINUOUS:
            raise DagSyntaxError(
                lineno, f"bernstein_order only applies to continuous nodes ({name})"
            )
        decls[i] = replace(decls[i], bernstein_order=order)

    d = len(decls)
    adj = [[EffectKind.NONE] * d for _ in range(d)]
    for a, b, kind, lineno in edges:
        if adj[a][b] is not EffectKind.NONE:
            raise DagSyntaxError(
                lineno, f"duplicate edge {decls[a].name} -> {decls[b].name}"
            )
        adj[a][b] = kind
    return DagSpec(nodes=tuple(decls), meta_adjacency=tuple(tuple(r) for r in adj))


def _parse_node(tokens: list[str], lineno: int) -> NodeDecl:
    if len(tokens) < 3:
        raise DagSyntaxError(lineno, "expected: node NAME KIND")
    name = tokens[1]
    if not _NAME_RE.match(name):
        raise DagSyntaxError(lineno, f"invalid node name {name!r}")
    kind = tokens[2]
    if kind == "continuous":
        if len(tokens) != 3:
            raise DagSyntaxError(lineno, "continuous takes no level count")
        return NodeDecl(name, NodeKind.CONTINUOUS)
    if kind == "binary":
        if len(tokens) != 3:
            raise DagSyntaxError(lineno, "binary takes no level count")
        return NodeDecl(name, NodeKind.BINARY, levels=2)
    if kind == "ordinal":
        if len(tokens) != 4 or not tokens[3].isdigit():
            raise DagSyntaxError(lineno, "expected: node NAME ordinal K")
        levels = int(tokens[3])
        if levels < 2:
            raise DagSyntaxError(lineno, "ordinal needs at least 2 levels")
        return NodeDecl(name, NodeKind.ORDINAL, levels=levels)
    raise DagSyntaxError(lineno, f"unknown node kind {kind!r}")


def _parse_edge(tokens, lineno: int, index: dict[str, int]):
    # edge A -> B : kind
    if len(tokens) != 6 or tokens[2] != "->" or tokens[4] != ":":
        raise DagSyntaxError(lineno, "expected: edge A -> B : ls|cs|ci")
    a, b, kind = tokens[1], tokens[3], tokens[5]
    for name in (a, b):
        if name not in index:
            raise UnknownNodeError(f"line {lineno}: edge references unknown node {name!r}")
    try:
        effect = EffectKind(kind)
    except ValueError:
        raise DagSyntaxError(lineno, f"unknown effect kind {kind!r}") from None
    if effect is EffectKind.NONE:
        raise DagSyntaxError(lineno, "edges must declare ls, cs or ci")
    if a == b:
        raise CycleError(f"line {lineno}: self edge on {a}")
    return index[a], index[b], effect, lineno


def _parse_set(tokens, lineno: int, index: dict[str, int], decls):
    if len(tokens) != 4 or tokens[2] != "bernstein_order":
        raise DagSyntaxError(lineno, "expected: set NAME bernstein_order M")
    name = tokens[1]
    if name not in index:
        raise UnknownNodeError(f"line {lineno}: set references unknown node {name!r}")
    if not tokens[3].isdigit() or int(tokens[3]) < 1:
        raise DagSyntaxError(lineno, "bernstein_order must be a positive integer")
    return name, int(tokens[3])


def serialize_dag_spec(spec: DagSpec) -> str:
    """Canonical text for a spec; parse(serialize(s)) == s, byte-stable."""
    lines: list[str] = []
    for n in spec.nodes:
        if n.kind is NodeKind.ORDINAL:
            lines.append(f"node {n.name} ordinal {n.levels}")
        else:
            lines.append(f"node {n.name} {n.kind.value}")
    for n in spec.nodes:
        if n.kind is NodeKind.CONTINUOUS and n.bernstein_order != DEFAULT_BERNSTEIN_ORDER:
            lines.append(f"set {n.name} bernstein_order {n.bernstein_order}")
    for i, row in enumerate(spec.meta_adjacency):
        for j, kind in enumerate(row):
            if kind is not EffectKind.NONE:
                lines.append(
                    f"edge {spec.nodes[i].name} -> {spec.nodes[j].name} : {kind.value}"
                )
    return "\n".join(lines) + "\n"
