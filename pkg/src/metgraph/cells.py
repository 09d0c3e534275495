"""From anchor cells to the full cell complex of a linear system.

An anchor cell carries all chips of an edge at a single interior point.
The remaining cells of |D| arise by splitting that pile into an ordered
sequence of smaller piles along the edge; every such split of every
anchor cell appears exactly once, so the whole complex and its f-vector
are cheap by-products of the anchor enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb

from .anchor import AnchorCell, anchor_cells
from .errors import EulerViolation, InternalInvariantError
from .graph import Divisor, MetricGraph, components_after_interior_removal


@dataclass(frozen=True)
class CellDescriptor:
    """Combinatorial data of one cell of |D|.

    `vertex_chips` is the chip count at each vertex, `partitions` the
    ordered split of each chip-carrying edge's interior mass (tail to
    head), and `tail_slopes` the outgoing slope of a witness function at
    each edge's tail end; the slopes further along the edge follow by
    adding the passed chip masses, so the tail value determines them all.
    """

    vertex_chips: tuple[tuple[str, int], ...]
    partitions: tuple[tuple[str, tuple[int, ...]], ...]
    tail_slopes: tuple[tuple[str, int], ...]
    dim: int

    def __post_init__(self):
        for _, parts in self.partitions:
            if not parts or any(p <= 0 for p in parts):
                raise ValueError("partitions must consist of positive parts")

    def mass(self) -> int:
        return sum(c for _, c in self.vertex_chips) + sum(
            sum(parts) for _, parts in self.partitions
        )


@dataclass(frozen=True)
class FVector:
    """Cell counts by dimension, index 0 upward."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if not self.counts or any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative and nonempty")
        if self.counts[-1] == 0 and len(self.counts) > 1:
            raise ValueError("trailing count must be nonzero")

    def total(self) -> int:
        return sum(self.counts)


def compositions(total: int):
    """Ordered splits of a positive integer into positive parts,
    first part ascending; there are 2^(total-1) of them."""
    if total <= 0:
        raise ValueError("total must be positive")
    if total == 1:
        yield (1,)
        return
    for head in range(1, total + 1):
        if head == total:
            yield (total,)
        else:
            for rest in compositions(total - head):
                yield (head,) + rest


def expand_anchor(
    cell: AnchorCell, graph: MetricGraph | None = None
) -> list[CellDescriptor]:
    """All cells of |D| that collapse onto the given anchor cell.

    Each chip-carrying edge's pile of c_e chips splits into any ordered
    sequence of positive piles, independently across edges, for a total
    of 2^split_count descriptors.  A descriptor with j more piles than
    edges gains j dimensions over the anchor cell: each extra pile frees
    one more stretch of edge to slide along.

    When `graph` is given, every descriptor's dimension is re-derived
    from the component count of the graph minus its interior chip
    points, and a mismatch with the combinatorial formula raises
    InternalInvariantError.
    """
    chip_edges = [(eid, c) for eid, c in cell.config.edge_chips if c > 0]
    tail_slopes = tuple((eid, pair[0]) for eid, pair in cell.slopes)
    choices = [
        [(eid, parts) for parts in compositions(c)] for eid, c in chip_edges
    ]
    out = []
    for combo in product(*choices):
        extra = sum(len(parts) - 1 for _, parts in combo)
        dim = cell.dim + extra
        if graph is not None:
            removal = {eid: len(parts) for eid, parts in combo}
            derived = components_after_interior_removal(graph, removal) - 1
            if derived != dim:
                raise InternalInvariantError(
                    f"dimension mismatch on expansion: {derived} != {dim}"
                )
        out.append(
            CellDescriptor(
                vertex_chips=cell.config.vertex_chips,
                partitions=tuple(combo),
                tail_slopes=tail_slopes,
                dim=dim,
            )
        )
    if len(out) != 2 ** cell.split_count:
        raise InternalInvariantError(
            f"expansion size {len(out)} != 2^{cell.split_count}"
        )
    return out


def f_vector(anchors: list[AnchorCell]) -> FVector:
    """Cell counts by dimension, read off the anchor cells.

    An anchor cell of dimension d and split budget s contributes
    binomial(s, j) cells in dimension d + j, the coefficient pattern of
    x^d (1+x)^s; summing those polynomials over all anchor cells counts
    every cell of the complex once.  The alternating sum of any linear
    system's f-vector is one, and that is enforced here as a
    postcondition rather than trusted.
    """
    if not anchors:
        raise ValueError("anchor cell list is empty")
    top = max(a.dim + a.split_count for a in anchors)
    counts = [0] * (top + 1)
    for a in anchors:
        for j in range(a.split_count + 1):
            counts[a.dim + j] += comb(a.split_count, j)
    fv = FVector(tuple(counts))
    if euler_characteristic(fv) != 1:
        raise EulerViolation(
            f"alternating sum of {fv.counts} is {euler_characteristic(fv)}, not 1"
        )
    return fv


def euler_characteristic(fv: FVector) -> int:
    return sum((-1) ** k * c for k, c in enumerate(fv.counts))


def all_cells(
    graph: MetricGraph, divisor: Divisor, jobs: int = 1
) -> list[CellDescriptor]:
    """Every cell of |D|, each validated against the component-count
    dimension rule, with the per-dimension histogram checked against the
    f-vector."""
    anchors = anchor_cells(graph, divisor, jobs=jobs)
    cells: list[CellDescriptor] = []
    for a in anchors:
        cells.extend(expand_anchor(a, graph=graph))
    fv = f_vector(anchors)
    histogram = [0] * len(fv.counts)
    for c in cells:
        histogram[c.dim] += 1
    if tuple(histogram) != fv.counts:
        raise InternalInvariantError(
            f"cell histogram {histogram} disagrees with f-vector {fv.counts}"
        )
    return cells
