"""Enumeration of the anchor cells of a linear system.

An effective divisor equivalent to D is an anchor divisor when every edge
carries at most one chip-bearing interior point.  The cells of |D| whose
points are all anchor divisors (the anchor cells) determine the whole
complex, so they are what we enumerate.

A cell is determined by the pair of outgoing integer slopes its witness
functions take at the two ends of every edge; the configuration (the
split of deg(D) into per-edge interior masses c_e and per-vertex residues
d'_v) is itself a function of those slopes, via c_e = -(s_tail + s_head)
and the vertex balance rule.  Whether a slope assignment is realized by
an actual function is a linear feasibility question in the function's
vertex values, which the exact LP kernel decides.

Two enumeration strategies produce the same cell list:

  * "slopes" (default): depth-first over integer slope pairs edge by
    edge, pruning on the chip budget, on per-vertex residue bounds, and
    on strict feasibility of the partial system.  Work scales with the
    number of near-feasible prefixes rather than with the raw count of
    configurations, which is what makes the larger graphs tractable.

  * "configurations": the direct route.  For every split of deg(D) build
    the full constraint system, gate on integer feasibility, bound each
    edge's slope interval, and branch inside the box.  Slower, but its
    shape mirrors the defining equations one-to-one; it serves as the
    reference in cross-check tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import islice

from .errors import InternalInvariantError
from .graph import (
    HEAD,
    TAIL,
    Divisor,
    MetricGraph,
    RationalFunction,
    add_divisors,
    components_after_interior_removal,
)
from .lp import (
    ConstraintSystem,
    extremize,
    find_point,
    has_integer_point,
    is_strictly_feasible,
)
from .rationals import Rat, ZERO, ceil_rat, floor_rat, rat


@dataclass(frozen=True)
class Configuration:
    """A split of deg(D): interior mass per edge, remaining mass per vertex.

    Both maps are total (zero entries included) and stored as sorted
    tuples so configurations hash and compare by content.
    """

    edge_chips: tuple[tuple[str, int], ...]
    vertex_chips: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for name, pairs in (("edge", self.edge_chips), ("vertex", self.vertex_chips)):
            ids = [k for k, _ in pairs]
            if ids != sorted(ids) or len(set(ids)) != len(ids):
                raise ValueError(f"{name} entries must be sorted and unique")
            if any(c < 0 for _, c in pairs):
                raise ValueError(f"negative {name} mass in configuration")

    @classmethod
    def from_maps(cls, edge_chips, vertex_chips) -> "Configuration":
        return cls(
            tuple(sorted((str(k), int(v)) for k, v in dict(edge_chips).items())),
            tuple(sorted((str(k), int(v)) for k, v in dict(vertex_chips).items())),
        )

    def chips_on(self, edge_id: str) -> int:
        for k, c in self.edge_chips:
            if k == edge_id:
                return c
        raise KeyError(edge_id)

    def residue_at(self, vertex: str) -> int:
        for k, c in self.vertex_chips:
            if k == vertex:
                return c
        raise KeyError(vertex)

    @property
    def chip_edges(self) -> tuple[str, ...]:
        return tuple(k for k, c in self.edge_chips if c > 0)

    def total(self) -> int:
        return sum(c for _, c in self.edge_chips) + sum(c for _, c in self.vertex_chips)


@dataclass(frozen=True)
class AnchorCell:
    """One anchor cell: outgoing slope pair per edge plus its configuration.

    `slopes` maps each edge to (slope out of the tail, slope out of the
    head) of any witness function; the pair determines the cell.  `dim` is
    the cell dimension and `split_count` the total extra-kink budget
    sum(c_e - 1) over chip-carrying edges, which governs how many cells of
    the full complex the anchor cell expands into.
    """

    slopes: tuple[tuple[str, tuple[int, int]], ...]
    config: Configuration
    dim: int
    split_count: int

    def slope(self, edge_id: str) -> tuple[int, int]:
        for k, pair in self.slopes:
            if k == edge_id:
                return pair
        raise KeyError(edge_id)

    def slope_map(self) -> dict[str, tuple[int, int]]:
        return dict(self.slopes)

    @property
    def sort_key(self) -> tuple:
        return self.slopes


def value_var(vertex: str) -> str:
    """LP variable holding the witness function's value at a vertex."""
    return f"f({vertex})"


def slope_var(edge_id: str, end: int) -> str:
    """LP variable holding the outgoing slope at one end of an edge."""
    return f"s({edge_id},{'tail' if end == TAIL else 'head'})"


def weak_compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative integers summing to `total`,
    in ascending lexicographic order."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in weak_compositions(total - head, parts - 1):
            yield (head,) + rest


def enumerate_configurations(graph: MetricGraph, degree: int):
    """All configurations of the given total mass, edges varying slowest.

    Slot order is sorted edges then sorted vertices, matching the
    composition order, so the stream is deterministic.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    eids = [e.id for e in graph.edges]
    verts = list(graph.vertices)
    m = len(eids)
    for comp in weak_compositions(degree, m + len(verts)):
        yield Configuration(
            tuple(zip(eids, comp[:m])),
            tuple(zip(verts, comp[m:])),
        )


def _check_inputs(graph: MetricGraph, divisor: Divisor):
    if divisor.graph != graph:
        raise ValueError("divisor lives on a different graph")
    if not divisor.is_vertex_supported():
        raise ValueError("divisor must be vertex-supported; refine first")
    if not divisor.is_effective():
        raise ValueError("divisor must be effective")


def build_constraints(
    graph: MetricGraph, divisor: Divisor, config: Configuration
) -> ConstraintSystem:
    """The linear system whose strict solutions are the witness functions
    realizing `config`.

    Variables: one value per vertex (free) and two outgoing slopes per
    edge (integer-marked, tail before head, edges in sorted order).  Rows,
    per edge e with ends u, w and length M:

      * slope sum:        s_tail + s_head = -c_e   (no chips: the function
        is linear on e, so the outgoing slopes cancel; c_e chips: they all
        sit at one interior kink of total order c_e);
      * chipless tie:     f(u) - f(w) + s_tail * M = 0;
      * chip placement:   s_head * M < f(u) - f(w) < -s_tail * M, two
        strict rows forcing the kink strictly inside the edge.

    Per vertex v: the slopes out of v must absorb the mass change,
    sum of outgoing slopes = d'_v - D(v).  Finally the first vertex's
    value is pinned to zero to quotient out the additive constant.

    Literal duplicates (a loop's vertex row repeats its slope-sum row; a
    chipless slope-sum row repeats the zero-chip case of the same rule)
    are emitted once.
    """
    _check_inputs(graph, divisor)
    cfg_edges = dict(config.edge_chips)
    cfg_verts = dict(config.vertex_chips)
    if set(cfg_edges) != {e.id for e in graph.edges}:
        raise ValueError("configuration edge set does not match the graph")
    if set(cfg_verts) != set(graph.vertices):
        raise ValueError("configuration vertex set does not match the graph")
    if config.total() != divisor.degree():
        raise ValueError("configuration mass does not match deg(D)")

    variables = [value_var(v) for v in graph.vertices]
    int_vars = []
    for e in graph.edges:
        variables.append(slope_var(e.id, TAIL))
        variables.append(slope_var(e.id, HEAD))
        int_vars.append(slope_var(e.id, TAIL))
        int_vars.append(slope_var(e.id, HEAD))
    system = ConstraintSystem(variables, integer_vars=int_vars)

    def acc(coeffs: dict, var: str, q) -> None:
        coeffs[var] = coeffs.get(var, ZERO) + rat(q)

    rows = []
    seen = set()

    def emit(coeffs: dict, rel: str, rhs) -> None:
        row = system.row(coeffs, rel, rhs)
        key = (row.terms, row.rel, row.rhs)
        if key not in seen:
            seen.add(key)
            rows.append(row)

    for e in graph.edges:
        st, sh = slope_var(e.id, TAIL), slope_var(e.id, HEAD)
        c_e = cfg_edges[e.id]
        emit({st: 1, sh: 1}, "eq", -c_e)
        if c_e == 0:
            coeffs: dict = {}
            acc(coeffs, value_var(e.tail), 1)
            acc(coeffs, value_var(e.head), -1)
            acc(coeffs, st, e.length)
            emit(coeffs, "eq", 0)
        else:
            coeffs = {}
            acc(coeffs, value_var(e.tail), -1)
            acc(coeffs, value_var(e.head), 1)
            acc(coeffs, sh, e.length)
            emit(coeffs, "lt", 0)
            coeffs = {}
            acc(coeffs, value_var(e.tail), 1)
            acc(coeffs, value_var(e.head), -1)
            acc(coeffs, st, e.length)
            emit(coeffs, "lt", 0)
    for v in graph.vertices:
        coeffs = {}
        for e, end in graph.ends_at(v):
            acc(coeffs, slope_var(e.id, end), 1)
        emit(coeffs, "eq", cfg_verts[v] - divisor.vertex_value(v))
    emit({value_var(graph.vertices[0]): 1}, "eq", 0)
    return system.extended(rows)


def _dimension_of_chip_edges(graph: MetricGraph, chip_edges) -> int:
    removal = {eid: 1 for eid in chip_edges}
    return components_after_interior_removal(graph, removal) - 1


def cell_dimension(graph: MetricGraph, cell: AnchorCell) -> int:
    """Dimension: cutting one interior point out of each chip-carrying
    edge leaves k components, each contributing one translational degree
    of freedom; the global additive constant removes one."""
    return _dimension_of_chip_edges(graph, cell.config.chip_edges)


def _cell_from_slopes(
    graph: MetricGraph, divisor: Divisor, slopes: tuple[tuple[str, tuple[int, int]], ...]
) -> AnchorCell:
    """Package a feasible slope assignment, deriving its configuration."""
    edge_chips = tuple(
        (eid, -(s_t + s_h)) for eid, (s_t, s_h) in slopes
    )
    residues = {v: divisor.vertex_value(v) for v in graph.vertices}
    for eid, (s_t, s_h) in slopes:
        e = graph.edge(eid)
        residues[e.tail] += s_t
        residues[e.head] += s_h
    config = Configuration(edge_chips, tuple(sorted(residues.items())))
    dim = _dimension_of_chip_edges(graph, config.chip_edges)
    splits = sum(c - 1 for _, c in config.edge_chips if c > 0)
    return AnchorCell(slopes, config, dim, splits)


def _slope_walk(
    graph: MetricGraph,
    divisor: Divisor,
    first_edge_pairs: list[tuple[int, int]] | None = None,
) -> list[AnchorCell]:
    """Depth-first enumeration over integer slope pairs, edge by edge.

    Once slopes are fixed, every constraint on the witness function is a
    difference bound: a_u - a_w = -s_tail * M on a chipless edge, the
    strict pair a_u - a_w < -s_tail * M, a_w - a_u < -s_head * M on a
    chip-carrying one.  Feasibility of such a system is a shortest-path
    question, so instead of an LP per node the walk maintains the matrix
    of tightest difference bounds between vertex values and rejects a
    branch when some cycle forces a_v - a_v below zero (or to zero
    through a strict bound).  Rationals are dense, so consistency of the
    bounds is exactly strict realizability.

    Further lossless pruning:

      * the chip mass -(s_tail + s_head) of an edge may not overdraw
        deg(D), and slopes are bounded by deg(D) in absolute value;
      * a vertex with r unassigned edge ends and residue q must satisfy
        q + r * deg(D) >= 0 (its final residue is nonnegative) and
        q - r * deg(D) <= unspent budget (its final residue cannot
        exceed the total mass that stays on vertices);
      * a loop edge forces s_tail = s_head = 0 without chips, both
        slopes negative with chips (its difference is identically zero);
      * a candidate pair is tested in O(1) against the closed bound
        matrix before any copying: adding arcs u->w and w->u creates a
        bad cycle exactly when one arc plus the tightest existing path
        back is negative (or zero with strictness), because the matrix
        already holds all-pairs tightest paths and the two new arcs
        cancel to the nonnegative c_e * length when combined.

    Edges are walked in sorted order.  The table graphs name edges by
    their tail vertex, so sorted order exhausts one vertex's ends before
    moving on, which lets the residue prunes bite at shallow depth.
    `first_edge_pairs` restricts the top branching level, which is how
    parallel workers split the tree.
    """
    degree = divisor.degree()
    if not graph.edges:
        # single-vertex graph: the constant function is the only cell
        return [_cell_from_slopes(graph, divisor, ())]
    edges = list(graph.edges)
    vat = {v: i for i, v in enumerate(graph.vertices)}
    nv = len(graph.vertices)

    pairs_by_budget: list[list[tuple[int, int]]] = []
    for budget in range(degree + 1):
        pairs = [
            (s_t, -c - s_t)
            for c in range(budget + 1)
            for s_t in range(-degree, degree + 1)
            if -degree <= -c - s_t <= degree
        ]
        pairs.sort()
        pairs_by_budget.append(pairs)

    remaining_ends = {v: 0 for v in graph.vertices}
    for e in edges:
        remaining_ends[e.tail] += 1
        remaining_ends[e.head] += 1

    # dist[p][q] = tightest known bound on a_p - a_q as (value, strict);
    # None is "unbounded".  The diagonal starts at a non-strict zero.
    dist0: list[list[tuple[Rat, int] | None]] = [
        [None] * nv for _ in range(nv)
    ]
    for i in range(nv):
        dist0[i][i] = (ZERO, 0)

    def with_arcs(dist, arcs):
        """Relax a copy of the bound matrix through new arcs; None when
        some diagonal entry certifies inconsistency."""
        d = [row[:] for row in dist]
        for p, q, bound, strict in arcs:
            for x in range(nv):
                xp = d[x][p]
                if xp is None:
                    continue
                xb = xp[0] + bound
                xs = xp[1] | strict
                dq = d[q]
                dx = d[x]
                for y in range(nv):
                    qy = dq[y]
                    if qy is None:
                        continue
                    nb = xb + qy[0]
                    ns = xs | qy[1]
                    cur = dx[y]
                    if cur is None or nb < cur[0] or (nb == cur[0] and ns > cur[1]):
                        dx[y] = (nb, ns)
        for i in range(nv):
            b, s = d[i][i]
            if b < 0 or (b == 0 and s):
                return None
        return d

    residues = {v: divisor.vertex_value(v) for v in graph.vertices}
    chosen: dict[str, tuple[int, int]] = {}
    cells: list[AnchorCell] = []

    def vertex_ok(v: str, budget: int) -> bool:
        r = remaining_ends[v] * degree
        q = residues[v]
        return q + r >= 0 and q - r <= budget

    def walk(k: int, dist, budget: int) -> None:
        if k == len(edges):
            slopes = tuple((e.id, chosen[e.id]) for e in graph.edges)
            cells.append(_cell_from_slopes(graph, divisor, slopes))
            return
        e = edges[k]
        u, w = vat[e.tail], vat[e.head]
        length = e.length
        remaining_ends[e.tail] -= 1
        remaining_ends[e.head] -= 1
        if k == 0 and first_edge_pairs is not None:
            candidates = first_edge_pairs
        else:
            candidates = pairs_by_budget[budget]
        wu = dist[w][u]
        uw = dist[u][w]
        for s_t, s_h in candidates:
            c_e = -(s_t + s_h)
            if c_e > budget:
                continue
            arcs = None
            if e.is_loop:
                if c_e == 0 and s_t != 0:
                    continue
                if c_e > 0 and (s_t >= 0 or s_h >= 0):
                    continue
            elif c_e == 0:
                shift = -s_t * length
                # equality a_u - a_w = shift against the closed matrix
                if wu is not None:
                    t = shift + wu[0]
                    if t < 0 or (t == 0 and wu[1]):
                        continue
                if uw is not None:
                    t = uw[0] - shift
                    if t < 0 or (t == 0 and uw[1]):
                        continue
                arcs = ((u, w, shift, 0), (w, u, -shift, 0))
            else:
                b_t = -s_t * length
                b_h = -s_h * length
                # strict pair a_u - a_w < b_t, a_w - a_u < b_h
                if wu is not None and b_t + wu[0] <= 0:
                    continue
                if uw is not None and b_h + uw[0] <= 0:
                    continue
                arcs = ((u, w, b_t, 1), (w, u, b_h, 1))
            new_budget = budget - c_e
            residues[e.tail] += s_t
            residues[e.head] += s_h
            if vertex_ok(e.tail, new_budget) and vertex_ok(e.head, new_budget):
                trial = dist if arcs is None else with_arcs(dist, arcs)
                if trial is not None:
                    chosen[e.id] = (s_t, s_h)
                    walk(k + 1, trial, new_budget)
            residues[e.tail] -= s_t
            residues[e.head] -= s_h
        remaining_ends[e.tail] += 1
        remaining_ends[e.head] += 1

    walk(0, dist0, degree)
    return cells


def _slope_chunk(args) -> list[AnchorCell]:
    graph, divisor, pairs = args
    return _slope_walk(graph, divisor, first_edge_pairs=pairs)


def _cells_for_config(
    graph: MetricGraph, divisor: Divisor, config: Configuration
) -> list[AnchorCell]:
    """All anchor cells realizing one fixed configuration (reference path).

    Gates on integer feasibility of the full system, bounds each edge's
    tail slope over the closure, then branches the tail slopes in order;
    the head slopes are pinned by the slope-sum rows.  A prefix whose
    relaxation is infeasible cannot extend to a cell, so pruning is
    lossless and the accepted leaves are exactly the tuples the full
    product scan would accept.
    """
    system = build_constraints(graph, divisor, config)
    if not has_integer_point(system):
        return []
    edges = graph.edges
    ranges = []
    for e in edges:
        lo = extremize(system, slope_var(e.id, TAIL), "min", attainment=False)
        hi = extremize(system, slope_var(e.id, TAIL), "max", attainment=False)
        if lo.status != "bounded" or hi.status != "bounded":
            raise InternalInvariantError(
                f"slope interval of edge {e.id!r} is unbounded on a feasible system"
            )
        ranges.append((ceil_rat(lo.value), floor_rat(hi.value)))

    dim = _dimension_of_chip_edges(graph, config.chip_edges)
    splits = sum(c - 1 for _, c in config.edge_chips if c > 0)
    chips = dict(config.edge_chips)
    cells = []
    tails = [0] * len(edges)

    def descend(k: int, sys_k: ConstraintSystem) -> None:
        if k == len(edges):
            slopes = tuple(
                (e.id, (t, -chips[e.id] - t)) for e, t in zip(edges, tails)
            )
            cells.append(AnchorCell(slopes, config, dim, splits))
            return
        var = slope_var(edges[k].id, TAIL)
        for val in range(ranges[k][0], ranges[k][1] + 1):
            trial = sys_k.with_equality(var, val)
            if is_strictly_feasible(trial):
                tails[k] = val
                descend(k + 1, trial)

    descend(0, system)
    return cells


def _chunk_cells(args) -> list[AnchorCell]:
    graph, divisor, degree, start, stop = args
    out = []
    for config in islice(enumerate_configurations(graph, degree), start, stop):
        out.extend(_cells_for_config(graph, divisor, config))
    return out


def anchor_cells(
    graph: MetricGraph,
    divisor: Divisor,
    jobs: int = 1,
    strategy: str = "slopes",
) -> list[AnchorCell]:
    """Every anchor cell of |D|, sorted by slope assignment.

    `strategy` selects the enumeration route ("slopes" is the fast
    default, "configurations" the direct reference); both return the
    identical list.  Each cell must be found exactly once and its slope
    assignment must determine its configuration; violations raise
    InternalInvariantError since they would mean the enumeration itself
    is wrong.
    """
    _check_inputs(graph, divisor)
    if strategy not in ("slopes", "configurations"):
        raise ValueError(f"unknown strategy {strategy!r}")
    degree = divisor.degree()

    if strategy == "configurations":
        if jobs > 1:
            from concurrent.futures import ProcessPoolExecutor
            from math import comb

            slots = len(graph.edges) + len(graph.vertices)
            total = comb(degree + slots - 1, degree)
            chunks = max(1, min(total, jobs * 4))
            step = (total + chunks - 1) // chunks
            tasks = [
                (graph, divisor, degree, lo, min(lo + step, total))
                for lo in range(0, total, step)
            ]
            cells: list[AnchorCell] = []
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for part in pool.map(_chunk_cells, tasks):
                    cells.extend(part)
        else:
            cells = []
            for config in enumerate_configurations(graph, degree):
                cells.extend(_cells_for_config(graph, divisor, config))
    elif jobs > 1 and graph.edges:
        from concurrent.futures import ProcessPoolExecutor

        pairs = [
            (s_t, -c - s_t)
            for c in range(degree + 1)
            for s_t in range(-degree, degree + 1)
            if -degree <= -c - s_t <= degree
        ]
        pairs.sort()
        chunks = max(1, min(len(pairs), jobs * 4))
        step = (len(pairs) + chunks - 1) // chunks
        tasks = [
            (graph, divisor, pairs[lo : lo + step])
            for lo in range(0, len(pairs), step)
        ]
        cells = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_slope_chunk, tasks):
                cells.extend(part)
    else:
        cells = _slope_walk(graph, divisor)

    by_slopes: dict[tuple, Configuration] = {}
    for cell in cells:
        prev = by_slopes.setdefault(cell.slopes, cell.config)
        if prev != cell.config:
            raise InternalInvariantError(
                f"slope assignment {cell.slopes} realized by two configurations"
            )
    if len(by_slopes) != len(cells):
        raise InternalInvariantError("duplicate anchor cell emitted")
    cells.sort(key=lambda c: c.sort_key)
    return cells


def representative_function(
    graph: MetricGraph, divisor: Divisor, cell: AnchorCell
) -> RationalFunction:
    """A concrete witness function for a cell, normalized to value zero at
    the first vertex.

    Solves the cell's system with every slope pinned, reads the vertex
    values off the witness, and places each chip-carrying edge's kink at
    the position the slopes dictate.  The result is re-checked: D plus
    its principal divisor must be effective and must reproduce the cell's
    configuration exactly.
    """
    _check_inputs(graph, divisor)
    system = build_constraints(graph, divisor, cell.config)
    for eid, (s_tail, s_head) in cell.slopes:
        system = system.with_equality(slope_var(eid, TAIL), s_tail)
        system = system.with_equality(slope_var(eid, HEAD), s_head)
    witness = find_point(system)
    if witness is None:
        raise InternalInvariantError("cell system has no witness point")
    values = {
        v: witness[system.index_of(value_var(v))] for v in graph.vertices
    }
    breaks: dict[str, list[tuple[Rat, Rat]]] = {}
    for eid, (s_tail, s_head) in cell.slopes:
        c_e = cell.config.chips_on(eid)
        if c_e == 0:
            continue
        e = graph.edge(eid)
        fu, fw = values[e.tail], values[e.head]
        x = (fw - fu + s_head * e.length) / (s_tail + s_head)
        if not ZERO < x < e.length:
            raise InternalInvariantError(
                f"kink position {x} escapes edge {eid!r}"
            )
        breaks[eid] = [(x, fu + s_tail * x)]
    f = RationalFunction(graph, values, breaks)

    moved = add_divisors(divisor, f.principal_divisor())
    if not moved.is_effective():
        raise InternalInvariantError("representative moved D off the effective cone")
    chip_count: dict[str, int] = {}
    for chip in moved.interior_chips:
        if chip.edge in chip_count:
            raise InternalInvariantError(
                f"representative carries two interior chips on edge {chip.edge!r}"
            )
        chip_count[chip.edge] = chip.value
    for eid, c_e in cell.config.edge_chips:
        if chip_count.get(eid, 0) != c_e:
            raise InternalInvariantError(
                f"representative puts {chip_count.get(eid, 0)} chips on edge "
                f"{eid!r}, configuration says {c_e}"
            )
    for v, d_v in cell.config.vertex_chips:
        if moved.vertex_value(v) != d_v:
            raise InternalInvariantError(
                f"representative leaves {moved.vertex_value(v)} chips at "
                f"{v!r}, configuration says {d_v}"
            )
    return f
