"""JSON encoding of graphs, divisors, cells, and functions.

Rational numbers serialize as plain integers when possible and as
"p/q" strings otherwise; both forms are accepted on input.  The graph
format is one object holding vertices, edges, and an optional divisor,
so a single file describes a complete problem instance.
"""
from __future__ import annotations

from typing import Mapping

from .anchor import AnchorCell
from .cells import CellDescriptor
from .errors import InputError
from .graph import Divisor, MetricGraph, RationalFunction
from .rationals import Rat, is_int, rat, rat_str


def rat_to_json(x: Rat) -> int | str:
    return int(x) if is_int(x) else rat_str(x)


def rat_from_json(value) -> Rat:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InputError(f"expected an integer or 'p/q' string, got {value!r}")
    try:
        return rat(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {value!r}: {exc}") from None


def graph_to_json(graph: MetricGraph, divisor: Divisor | None = None) -> dict:
    data: dict = {
        "vertices": list(graph.vertices),
        "edges": [
            {
                "id": e.id,
                "tail": e.tail,
                "head": e.head,
                "length": rat_to_json(e.length),
            }
            for e in graph.edges
        ],
    }
    if divisor is not None:
        data["divisor"] = {
            "vertices": {v: n for v, n in divisor.vertex_values().items()},
            "interior": [
                {
                    "edge": c.edge,
                    "position": rat_to_json(c.position),
                    "value": c.value,
                }
                for c in divisor.interior_chips
            ],
        }
    return data


def graph_from_json(
    data, require_lengths: bool = True
) -> tuple[MetricGraph, Divisor | None]:
    """Parse one problem instance.

    With `require_lengths=False` an edge may omit its length (it
    defaults to 1), which suits inputs meant for the parametric search
    where lengths are ignored anyway.
    """
    if not isinstance(data, Mapping):
        raise InputError("input must be a JSON object")
    try:
        vertices = [str(v) for v in data["vertices"]]
        raw_edges = list(data["edges"])
    except (KeyError, TypeError):
        raise InputError("input needs 'vertices' and 'edges' arrays") from None
    edges = []
    for item in raw_edges:
        if not isinstance(item, Mapping) or not {"id", "tail", "head"} <= set(item):
            raise InputError(f"bad edge entry {item!r}")
        if "length" in item:
            length = rat_from_json(item["length"])
        elif require_lengths:
            raise InputError(f"edge {item['id']!r} is missing its length")
        else:
            length = rat(1)
        edges.append((str(item["id"]), str(item["tail"]), str(item["head"]), length))
    try:
        graph = MetricGraph(vertices, edges)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    divisor = None
    if "divisor" in data and data["divisor"] is not None:
        spot = data["divisor"]
        if not isinstance(spot, Mapping):
            raise InputError("'divisor' must be an object")
        values = {}
        for v, n in dict(spot.get("vertices") or {}).items():
            if not isinstance(n, int) or isinstance(n, bool):
                raise InputError(f"divisor value at {v!r} must be an integer")
            values[str(v)] = n
        interior = []
        for item in spot.get("interior") or ():
            if not isinstance(item, Mapping) or not {
                "edge",
                "position",
                "value",
            } <= set(item):
                raise InputError(f"bad interior chip entry {item!r}")
            if not isinstance(item["value"], int) or isinstance(item["value"], bool):
                raise InputError("interior chip values must be integers")
            interior.append(
                (
                    str(item["edge"]),
                    rat_from_json(item["position"]),
                    item["value"],
                )
            )
        try:
            divisor = Divisor(graph, values, interior)
        except (ValueError, KeyError) as exc:
            raise InputError(str(exc)) from None
    return graph, divisor


def anchor_cell_to_json(cell: AnchorCell) -> dict:
    return {
        "slopes": {eid: list(pair) for eid, pair in cell.slopes},
        "config": {
            "c": dict(cell.config.edge_chips),
            "d_prime": dict(cell.config.vertex_chips),
        },
        "dim": cell.dim,
        "s": cell.split_count,
    }


def cell_descriptor_to_json(cell: CellDescriptor) -> dict:
    return {
        "d_v": dict(cell.vertex_chips),
        "partitions": {eid: list(parts) for eid, parts in cell.partitions},
        "m": dict(cell.tail_slopes),
        "dim": cell.dim,
    }


def function_to_json(fn: RationalFunction) -> dict:
    """Vertex values plus interior breakpoints, positions from the tail."""
    breaks = {}
    for e in fn.graph.edges:
        pts = fn.interior_breakpoints(e.id)
        if pts:
            breaks[e.id] = [[rat_to_json(pos), rat_to_json(val)] for pos, val in pts]
    return {
        "vertices": {
            v: rat_to_json(fn.vertex_value(v)) for v in fn.graph.vertices
        },
        "breaks": breaks,
    }
