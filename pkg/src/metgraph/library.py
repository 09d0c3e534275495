"""Built-in example graphs: the loop, a square, K4, (020), and K3,3.

The trivalent families take their metrics as flat tuples in a fixed
edge order, documented per function, so the published structure counts
for those graphs can be reproduced by name.
"""
from __future__ import annotations

from typing import Sequence

from .graph import Divisor, MetricGraph, canonical_divisor
from .rationals import RatLike


def loop3() -> tuple[MetricGraph, Divisor]:
    """A single vertex with a loop of length 3 and three chips on the vertex."""
    g = MetricGraph(["v"], [("e", "v", "v", 3)])
    return g, Divisor(g, {"v": 3})


def c4_square() -> tuple[MetricGraph, Divisor]:
    """A 4-cycle with side length 2 and two chips on every vertex."""
    g = MetricGraph(
        ["P", "Q", "R", "S"],
        [("pq", "P", "Q", 2), ("qr", "Q", "R", 2), ("rs", "R", "S", 2), ("sp", "S", "P", 2)],
    )
    return g, Divisor(g, {v: 2 for v in g.vertices})


K4_EDGE_ORDER = ("ab", "ac", "ad", "bc", "bd", "cd")


def k4(metric: Sequence[RatLike] = (1, 1, 1, 1, 1, 1)) -> MetricGraph:
    """The complete graph on vertices a, b, c, d.

    The metric lists the edge lengths in the order
    (ab, ac, ad, bc, bd, cd), i.e. pairs in lexicographic order.
    """
    if len(metric) != 6:
        raise ValueError("K4 takes six edge lengths")
    ends = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")]
    return MetricGraph(
        list("abcd"),
        [
            (eid, t, h, x)
            for (eid, (t, h), x) in zip(K4_EDGE_ORDER, ends, metric)
        ],
    )


G020_EDGE_ORDER = ("a1", "a2", "b", "c", "d1", "d2")


def g020(metric: Sequence[RatLike] = (1, 1, 1, 1, 1, 1)) -> MetricGraph:
    """The trivalent genus-3 graph (020): two parallel pairs joined by a path.

    Vertices v1..v4; edges a1, a2 both v1-v2, b = v1-v3, c = v2-v4,
    d1, d2 both v3-v4.  The metric is (a1, a2, b, c, d1, d2).
    """
    if len(metric) != 6:
        raise ValueError("(020) takes six edge lengths")
    ends = [
        ("v1", "v2"),
        ("v1", "v2"),
        ("v1", "v3"),
        ("v2", "v4"),
        ("v3", "v4"),
        ("v3", "v4"),
    ]
    return MetricGraph(
        ["v1", "v2", "v3", "v4"],
        [
            (eid, t, h, x)
            for (eid, (t, h), x) in zip(G020_EDGE_ORDER, ends, metric)
        ],
    )


def k33(matrix: Sequence[Sequence[RatLike]] | None = None) -> MetricGraph:
    """The complete bipartite graph on b1, b2, b3 against t1, t2, t3.

    matrix[i][j] is the length of edge e{i+1}{j+1} joining b{i+1} to
    t{j+1}; omitting it gives the all-equal metric.
    """
    if matrix is None:
        matrix = [[1] * 3 for _ in range(3)]
    if len(matrix) != 3 or any(len(row) != 3 for row in matrix):
        raise ValueError("K3,3 takes a 3x3 length matrix")
    edges = [
        (f"e{i + 1}{j + 1}", f"b{i + 1}", f"t{j + 1}", matrix[i][j])
        for i in range(3)
        for j in range(3)
    ]
    return MetricGraph([f"b{i}" for i in (1, 2, 3)] + [f"t{i}" for i in (1, 2, 3)], edges)


# the metrics whose linear-system structure counts are pinned by tests
K4_METRICS = (
    (1, 1, 1, 1, 1, 1),
    (1, 1, 2, 2, 1, 1),
    (2, 2, 2, 2, 2, 3),
    (2, 2, 2, 2, 2, 1),
    (4, 9, 7, 8, 6, 10),
)
G020_METRICS = (
    (1, 1, 1, 1, 1, 1),
    (1, 1, 1, 2, 1, 1),
    (1, 3, 2, 2, 1, 3),
)
K33_MATRICES = (
    ((1, 1, 1), (1, 1, 1), (1, 1, 1)),
    ((2, 1, 1), (1, 2, 1), (1, 1, 2)),
    ((3, 91, 96), (94, 4, 92), (93, 95, 5)),
)


def _metric_slug(metric: Sequence[RatLike]) -> str:
    return "-".join(str(x) for x in metric)


def builtin_inputs() -> dict[str, tuple[MetricGraph, Divisor]]:
    """All named instances available to the command line as @name."""
    out: dict[str, tuple[MetricGraph, Divisor]] = {
        "loop3": loop3(),
        "c4-deg8": c4_square(),
    }
    for label, metric in zip(("unit", None, None, None, None), K4_METRICS):
        g = k4(metric)
        out[f"k4-{label or _metric_slug(metric)}"] = (g, canonical_divisor(g))
    for label, metric in zip(("unit", None, None), G020_METRICS):
        g = g020(metric)
        out[f"g020-{label or _metric_slug(metric)}"] = (g, canonical_divisor(g))
    for label, matrix in zip(("unit", "diag2", "spread"), K33_MATRICES):
        g = k33(matrix)
        out[f"k33-{label}"] = (g, canonical_divisor(g))
    return out
