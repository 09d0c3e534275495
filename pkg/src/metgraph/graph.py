"""Metric graphs, divisors, and piecewise linear functions with integer slopes.

A metric graph is a connected multigraph (loops and parallel edges allowed)
with a positive rational length on every edge.  Points of the graph are the
vertices plus the interior points of edges; an interior point is addressed
by (edge id, distance from the edge's tail).

A divisor assigns integer multiplicities to finitely many points.  A
rational function is continuous and piecewise linear on every edge with
integer slopes; its principal divisor records the sum of outgoing slopes at
every point (nonzero only at vertices and kinks).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .rationals import Rat, RatLike, rat, rat_str

TAIL = 0
HEAD = 1


@dataclass(frozen=True)
class Edge:
    """One edge of a metric graph, oriented tail -> head for bookkeeping.

    The orientation fixes which endpoint slope is listed first and where
    interior positions are measured from; it carries no mathematical
    content.
    """

    id: str
    tail: str
    head: str
    length: Rat

    def other_end(self, vertex: str) -> str:
        if vertex == self.tail:
            return self.head
        if vertex == self.head:
            return self.tail
        raise ValueError(f"vertex {vertex!r} is not an endpoint of edge {self.id!r}")

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head


class MetricGraph:
    """A connected multigraph with positive rational edge lengths."""

    def __init__(self, vertices: Iterable[str], edges: Iterable[Edge | tuple]):
        vs = tuple(sorted(vertices))
        if not vs:
            raise ValueError("a metric graph needs at least one vertex")
        if len(set(vs)) != len(vs):
            raise ValueError("duplicate vertex ids")
        built = []
        for e in edges:
            if not isinstance(e, Edge):
                eid, tail, head, length = e
                e = Edge(str(eid), str(tail), str(head), rat(length))
            if e.length <= 0:
                raise ValueError(f"edge {e.id!r} has non-positive length {e.length}")
            if e.tail not in vs or e.head not in vs:
                raise ValueError(f"edge {e.id!r} has an unknown endpoint")
            built.append(e)
        built.sort(key=lambda e: e.id)
        ids = [e.id for e in built]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate edge ids")
        self._vertices = vs
        self._edges = tuple(built)
        self._by_id = {e.id: e for e in self._edges}
        ends: dict[str, list[tuple[Edge, int]]] = {v: [] for v in vs}
        for e in self._edges:
            ends[e.tail].append((e, TAIL))
            ends[e.head].append((e, HEAD))
        self._ends = {v: tuple(es) for v, es in ends.items()}
        if not self._connected():
            raise ValueError("metric graph must be connected")

    def _connected(self) -> bool:
        seen = {self._vertices[0]}
        stack = [self._vertices[0]]
        while stack:
            v = stack.pop()
            for e, _ in self._ends[v]:
                w = e.other_end(v)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self._vertices)

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    def edge(self, edge_id: str) -> Edge:
        return self._by_id[edge_id]

    def ends_at(self, vertex: str) -> tuple[tuple[Edge, int], ...]:
        """All edge-ends incident to a vertex; a loop contributes both ends."""
        return self._ends[vertex]

    def degree(self, vertex: str) -> int:
        return len(self._ends[vertex])

    def genus(self) -> int:
        return len(self._edges) - len(self._vertices) + 1

    def is_two_connected(self) -> bool:
        """No cut point in the metric-graph sense.

        Tested on the simple graph obtained by subdividing every edge at a
        midpoint node, so bridges (cut through an interior point) and
        multi-edges are handled uniformly.
        """
        nodes = list(self._vertices) + [("mid", e.id) for e in self._edges]
        adj: dict[object, list[object]] = {u: [] for u in nodes}
        for e in self._edges:
            m = ("mid", e.id)
            adj[e.tail].append(m)
            adj[m].append(e.tail)
            adj[e.head].append(m)
            adj[m].append(e.head)
        if len(nodes) < 2:
            return False

        def connected_without(removed: object) -> bool:
            rest = [u for u in nodes if u != removed]
            if not rest:
                return True
            seen = {rest[0]}
            stack = [rest[0]]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w != removed and w not in seen:
                        seen.add(w)
                        stack.append(w)
            return len(seen) == len(rest)

        return all(connected_without(u) for u in nodes)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MetricGraph)
            and self._vertices == other._vertices
            and self._edges == other._edges
        )

    def __hash__(self) -> int:
        return hash((self._vertices, self._edges))

    def __repr__(self) -> str:
        return f"MetricGraph({len(self._vertices)} vertices, {len(self._edges)} edges)"


@dataclass(frozen=True, order=True)
class InteriorChip:
    """A divisor entry at an interior edge point (position measured from tail)."""

    edge: str
    position: Rat
    value: int


class Divisor:
    """An integer-valued divisor on a metric graph.

    Vertex multiplicities are stored as a total map (zeros included);
    interior entries must be nonzero so supports stay canonical.
    """

    def __init__(
        self,
        graph: MetricGraph,
        vertex_values: Mapping[str, int] | None = None,
        interior: Iterable[InteriorChip | tuple] | None = None,
    ):
        vertex_values = dict(vertex_values or {})
        for v in vertex_values:
            if v not in graph.vertices:
                raise ValueError(f"divisor value at unknown vertex {v!r}")
        chips = []
        seen = set()
        for c in interior or ():
            if not isinstance(c, InteriorChip):
                eid, pos, val = c
                c = InteriorChip(str(eid), rat(pos), int(val))
            edge = graph.edge(c.edge)
            if not 0 < c.position < edge.length:
                raise ValueError(
                    f"chip position {c.position} not interior to edge {c.edge!r}"
                )
            if c.value == 0:
                raise ValueError(f"zero multiplicity at ({c.edge!r}, {c.position})")
            key = (c.edge, c.position)
            if key in seen:
                raise ValueError(f"duplicate chip at ({c.edge!r}, {c.position})")
            seen.add(key)
            chips.append(c)
        chips.sort(key=lambda c: (c.edge, c.position))
        self._graph = graph
        self._values = tuple((v, int(vertex_values.get(v, 0))) for v in graph.vertices)
        self._chips = tuple(chips)
        self._vmap = dict(self._values)

    @property
    def graph(self) -> MetricGraph:
        return self._graph

    @property
    def interior_chips(self) -> tuple[InteriorChip, ...]:
        return self._chips

    def vertex_value(self, vertex: str) -> int:
        return self._vmap[vertex]

    def vertex_values(self) -> dict[str, int]:
        return dict(self._values)

    def degree(self) -> int:
        return sum(v for _, v in self._values) + sum(c.value for c in self._chips)

    def is_effective(self) -> bool:
        return all(v >= 0 for _, v in self._values) and all(
            c.value > 0 for c in self._chips
        )

    def is_vertex_supported(self) -> bool:
        return not self._chips

    def support(self) -> list[tuple]:
        """Support points: vertex ids and (edge, position) pairs."""
        pts: list[tuple] = [("vertex", v) for v, val in self._values if val != 0]
        pts += [("interior", c.edge, c.position) for c in self._chips]
        return pts

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Divisor)
            and self._graph == other._graph
            and self._values == other._values
            and self._chips == other._chips
        )

    def __hash__(self) -> int:
        return hash((self._graph, self._values, self._chips))

    def __repr__(self) -> str:
        parts = [f"{val}*{v}" for v, val in self._values if val != 0]
        parts += [f"{c.value}*({c.edge}@{rat_str(c.position)})" for c in self._chips]
        return "Divisor(" + (" + ".join(parts) or "0") + ")"


def add_divisors(a: Divisor, b: Divisor) -> Divisor:
    """Pointwise sum; entries that cancel to zero leave the support."""
    if a.graph != b.graph:
        raise ValueError("divisors live on different graphs")
    values = a.vertex_values()
    for v, val in b.vertex_values().items():
        values[v] = values.get(v, 0) + val
    merged: dict[tuple, int] = {}
    for c in a.interior_chips + b.interior_chips:
        key = (c.edge, c.position)
        merged[key] = merged.get(key, 0) + c.value
    chips = [
        InteriorChip(e, p, val) for (e, p), val in merged.items() if val != 0
    ]
    return Divisor(a.graph, values, chips)


def canonical_divisor(graph: MetricGraph) -> Divisor:
    """deg(v) - 2 at every vertex; loops add two to the degree."""
    return Divisor(graph, {v: graph.degree(v) - 2 for v in graph.vertices})


class RationalFunction:
    """A continuous piecewise linear function with integer slopes.

    Stored per edge as the full breakpoint list ((0, value at tail), ...,
    (length, value at head)) in canonical form: positions strictly
    increasing, every slope an integer, and consecutive slopes distinct so
    interior breakpoints are genuine kinks.
    """

    def __init__(
        self,
        graph: MetricGraph,
        vertex_values: Mapping[str, RatLike],
        interior_breaks: Mapping[str, Sequence[tuple[RatLike, RatLike]]] | None = None,
    ):
        interior_breaks = interior_breaks or {}
        vals = {}
        for v in graph.vertices:
            if v not in vertex_values:
                raise ValueError(f"missing function value at vertex {v!r}")
            vals[v] = rat(vertex_values[v])
        for v in vertex_values:
            if v not in vals:
                raise ValueError(f"function value at unknown vertex {v!r}")
        for eid in interior_breaks:
            graph.edge(eid)  # raises KeyError for unknown ids
        pieces = {}
        for e in graph.edges:
            bps = [(rat(p), rat(val)) for p, val in interior_breaks.get(e.id, ())]
            bps.sort(key=lambda t: t[0])
            full = [(rat(0), vals[e.tail])] + bps + [(e.length, vals[e.head])]
            for (p0, v0), (p1, v1) in zip(full, full[1:]):
                if not p0 < p1:
                    raise ValueError(
                        f"breakpoints on edge {e.id!r} not strictly increasing"
                    )
                slope = (v1 - v0) / (p1 - p0)
                if slope.denominator != 1:
                    raise ValueError(
                        f"non-integer slope {slope} on edge {e.id!r} at [{p0}, {p1}]"
                    )
            slopes = _piece_slopes(full)
            for s0, s1 in zip(slopes, slopes[1:]):
                if s0 == s1:
                    raise ValueError(
                        f"redundant breakpoint on edge {e.id!r}: equal slopes {s0}"
                    )
            pieces[e.id] = tuple(full)
        self._graph = graph
        self._vals = tuple((v, vals[v]) for v in graph.vertices)
        self._pieces = tuple((e.id, pieces[e.id]) for e in graph.edges)
        self._vmap = dict(self._vals)
        self._pmap = dict(self._pieces)

    @classmethod
    def constant(cls, graph: MetricGraph, value: RatLike) -> "RationalFunction":
        return cls(graph, {v: rat(value) for v in graph.vertices})

    @property
    def graph(self) -> MetricGraph:
        return self._graph

    def vertex_value(self, vertex: str) -> Rat:
        return self._vmap[vertex]

    def breakpoints(self, edge_id: str) -> tuple[tuple[Rat, Rat], ...]:
        """Full breakpoint list for an edge, endpoints included."""
        return self._pmap[edge_id]

    def interior_breakpoints(self, edge_id: str) -> tuple[tuple[Rat, Rat], ...]:
        return self.breakpoints(edge_id)[1:-1]

    def value(self, edge_id: str, position: RatLike) -> Rat:
        pos = rat(position)
        bps = self.breakpoints(edge_id)
        if not 0 <= pos <= self._graph.edge(edge_id).length:
            raise ValueError(f"position {pos} outside edge {edge_id!r}")
        for (p0, v0), (p1, v1) in zip(bps, bps[1:]):
            if p0 <= pos <= p1:
                return v0 + (v1 - v0) / (p1 - p0) * (pos - p0)
        raise AssertionError("unreachable")

    def edge_slopes(self, edge_id: str) -> tuple[int, ...]:
        """Slopes of the linear pieces, in tail-to-head order."""
        return _piece_slopes(self.breakpoints(edge_id))

    def outgoing_slope(self, edge_id: str, end: int) -> int:
        """Slope seen leaving the given edge end into the edge."""
        slopes = self.edge_slopes(edge_id)
        return slopes[0] if end == TAIL else -slopes[-1]

    def order_at_vertex(self, vertex: str) -> int:
        return sum(
            self.outgoing_slope(e.id, end) for e, end in self._graph.ends_at(vertex)
        )

    def principal_divisor(self) -> Divisor:
        """Sum of outgoing slopes at every point, as a divisor of degree zero."""
        values = {v: self.order_at_vertex(v) for v in self._graph.vertices}
        chips = []
        for eid, bps in self._pieces:
            slopes = _piece_slopes(bps)
            for k in range(1, len(bps) - 1):
                order = slopes[k] - slopes[k - 1]
                chips.append(InteriorChip(eid, bps[k][0], order))
        div = Divisor(self._graph, values, chips)
        assert div.degree() == 0, "principal divisor must have degree zero"
        return div

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalFunction)
            and self._graph == other._graph
            and self._vals == other._vals
            and self._pieces == other._pieces
        )

    def __hash__(self) -> int:
        return hash((self._graph, self._vals, self._pieces))

    def __repr__(self) -> str:
        vals = ", ".join(f"{v}={rat_str(x)}" for v, x in self._vals)
        return f"RationalFunction({vals})"


def _piece_slopes(bps: Sequence[tuple[Rat, Rat]]) -> tuple[int, ...]:
    out = []
    for (p0, v0), (p1, v1) in zip(bps, bps[1:]):
        s = (v1 - v0) / (p1 - p0)
        out.append(int(s.numerator // s.denominator) if s.denominator == 1 else s)
    return tuple(out)


def tropical_shift(f: RationalFunction, c: RatLike) -> RationalFunction:
    """Tropical scalar action: add the constant c everywhere."""
    c = rat(c)
    return RationalFunction(
        f.graph,
        {v: f.vertex_value(v) + c for v in f.graph.vertices},
        {
            e.id: [(p, val + c) for p, val in f.interior_breakpoints(e.id)]
            for e in f.graph.edges
        },
    )


def tropical_max(f: RationalFunction, g: RationalFunction) -> RationalFunction:
    """Pointwise maximum, the tropical sum of two rational functions."""
    if f.graph != g.graph:
        raise ValueError("functions live on different graphs")
    graph = f.graph
    interior: dict[str, list[tuple[Rat, Rat]]] = {}
    for e in graph.edges:
        fb, gb = f.breakpoints(e.id), g.breakpoints(e.id)
        cuts = sorted({p for p, _ in fb} | {p for p, _ in gb})
        positions = list(cuts)
        for x0, x1 in zip(cuts, cuts[1:]):
            d0 = f.value(e.id, x0) - g.value(e.id, x0)
            d1 = f.value(e.id, x1) - g.value(e.id, x1)
            if (d0 < 0 < d1) or (d1 < 0 < d0):
                # affine pieces cross strictly inside (x0, x1)
                positions.append(x0 + (x1 - x0) * d0 / (d0 - d1))
        positions.sort()
        pts = [(p, max(f.value(e.id, p), g.value(e.id, p))) for p in positions]
        interior[e.id] = _drop_collinear(pts)[1:-1]
    return RationalFunction(
        graph,
        {
            v: max(f.vertex_value(v), g.vertex_value(v))
            for v in graph.vertices
        },
        interior,
    )


def _drop_collinear(pts: list[tuple[Rat, Rat]]) -> list[tuple[Rat, Rat]]:
    out = [pts[0]]
    for k in range(1, len(pts) - 1):
        p0, v0 = out[-1]
        p1, v1 = pts[k]
        p2, v2 = pts[k + 1]
        if (v1 - v0) * (p2 - p1) != (v2 - v1) * (p1 - p0):
            out.append(pts[k])
    out.append(pts[-1])
    return out


def refine_to_vertex_supported(
    graph: MetricGraph, divisor: Divisor
) -> tuple[MetricGraph, Divisor]:
    """Subdivide edges at interior chip positions until the divisor is
    vertex supported.

    New vertices are named '<edge>@<position>' and the segments of a split
    edge '<edge>#0', '<edge>#1', ... in tail-to-head order, so repeated
    refinement stays deterministic.
    """
    if divisor.graph != graph:
        raise ValueError("divisor lives on a different graph")
    if divisor.is_vertex_supported():
        return graph, divisor
    by_edge: dict[str, list[InteriorChip]] = {}
    for c in divisor.interior_chips:
        by_edge.setdefault(c.edge, []).append(c)
    vertices = list(graph.vertices)
    edges: list[Edge] = []
    values = divisor.vertex_values()
    for e in graph.edges:
        chips = sorted(by_edge.get(e.id, ()), key=lambda c: c.position)
        if not chips:
            edges.append(e)
            continue
        stops = [rat(0)] + [c.position for c in chips] + [e.length]
        names = [e.tail] + [f"{e.id}@{rat_str(c.position)}" for c in chips] + [e.head]
        for name, chip in zip(names[1:-1], chips):
            if name in vertices:
                raise ValueError(f"refinement vertex id {name!r} already in use")
            vertices.append(name)
            values[name] = chip.value
        for k in range(len(stops) - 1):
            seg = Edge(f"{e.id}#{k}", names[k], names[k + 1], stops[k + 1] - stops[k])
            edges.append(seg)
    refined = MetricGraph(vertices, edges)
    return refined, Divisor(refined, values)


def components_after_interior_removal(
    graph: MetricGraph, removal: Mapping[str, int]
) -> int:
    """Connected components after deleting the given number of distinct
    interior points from each edge.

    Deleting k >= 1 interior points of an edge detaches it as a connector
    and leaves k - 1 free middle segments; end segments stay attached to
    their endpoint components.
    """
    for eid, k in removal.items():
        graph.edge(eid)
        if k < 0:
            raise ValueError(f"negative removal count for edge {eid!r}")
    parent = {v: v for v in graph.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in graph.edges:
        if removal.get(e.id, 0) == 0:
            ra, rb = find(e.tail), find(e.head)
            if ra != rb:
                parent[ra] = rb
    vertex_components = len({find(v) for v in graph.vertices})
    middles = sum(max(k - 1, 0) for k in removal.values())
    return vertex_components + middles
