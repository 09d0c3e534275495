"""Extremality of rational functions via the firing criterion.

A function f with L = D + (f) effective fails to be extremal in R(D)
exactly when two proper subgraphs that can each fire on L cover the
whole graph.  Every subgraph that can fire is a union of the closed
components obtained by cutting the graph at the support of L, so the
search space is the 2^k subsets of those components.
"""
from __future__ import annotations

from dataclasses import dataclass

from .anchor import AnchorCell, anchor_cells, representative_function
from .graph import (
    TAIL,
    Divisor,
    InteriorChip,
    MetricGraph,
    RationalFunction,
    add_divisors,
    refine_to_vertex_supported,
)


@dataclass(frozen=True)
class SupportComponent:
    """One closed component of the graph cut along supp(L).

    Edge ids and vertex names refer to the refinement of the original
    graph at the interior support points of L, so a component is always
    a union of whole refined edges.  `interior_vertices` are the
    non-support vertices swallowed by the component and `boundary` the
    support points on its closure.
    """

    id: int
    edges: tuple[str, ...]
    interior_vertices: tuple[str, ...]
    boundary: tuple[str, ...]


def _support_context(
    graph: MetricGraph, divisor: Divisor
) -> tuple[MetricGraph, Divisor, list[SupportComponent]]:
    """Refine at interior support points and cut at supp(L).

    Two refined edges share a component exactly when they meet at a
    vertex where L vanishes; a support vertex separates its germs.
    """
    if divisor.graph != graph:
        raise ValueError("divisor lives on a different graph")
    if not divisor.is_effective():
        raise ValueError("support components need an effective divisor")
    g2, l2 = refine_to_vertex_supported(graph, divisor)
    support = {v for v in g2.vertices if l2.vertex_value(v) > 0}

    parent = {e.id: e.id for e in g2.edges}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in g2.vertices:
        if v in support:
            continue
        ends = g2.ends_at(v)
        for (e, _), (e2, _) in zip(ends, ends[1:]):
            ra, rb = find(e.id), find(e2.id)
            if ra != rb:
                parent[ra] = rb

    groups: dict[str, list[str]] = {}
    for e in g2.edges:
        groups.setdefault(find(e.id), []).append(e.id)
    components = []
    for eids in sorted(sorted(g) for g in groups.values()):
        interior, boundary = set(), set()
        for eid in eids:
            e = g2.edge(eid)
            for v in (e.tail, e.head):
                (boundary if v in support else interior).add(v)
        components.append(
            SupportComponent(
                id=len(components),
                edges=tuple(eids),
                interior_vertices=tuple(sorted(interior)),
                boundary=tuple(sorted(boundary)),
            )
        )
    return g2, l2, components


def support_components(graph: MetricGraph, divisor: Divisor) -> list[SupportComponent]:
    """The closed components of the graph cut at supp(divisor)."""
    return _support_context(graph, divisor)[2]


def _boundary_profiles(
    g2: MetricGraph,
    l2: Divisor,
    components: list[SupportComponent],
) -> list[tuple[int, tuple[int, ...]]]:
    """Per support vertex: its chip count and the component id of each germ.

    A loop contributes two germs, so a component can appear twice at one
    vertex; out-degrees are counted over germs, not edges.
    """
    comp_of = {eid: c.id for c in components for eid in c.edges}
    profiles = []
    for v in g2.vertices:
        chips = l2.vertex_value(v)
        if chips <= 0:
            continue
        germs = tuple(comp_of[e.id] for e, _ in g2.ends_at(v))
        profiles.append((chips, germs))
    return profiles


def _mask_fires(mask: int, profiles: list[tuple[int, tuple[int, ...]]]) -> bool:
    for chips, germs in profiles:
        inside = outside = 0
        for c in germs:
            if (mask >> c) & 1:
                inside += 1
            else:
                outside += 1
        if inside and outside > chips:
            return False
    return True


def can_fire(graph: MetricGraph, divisor: Divisor, ids: set[int]) -> bool:
    """Whether the closed union of the given support components can fire.

    Firing moves one chip of L = `divisor` along every direction leaving
    the union; it is possible when each boundary point holds at least as
    many chips as there are outgoing germs.
    """
    g2, l2, components = _support_context(graph, divisor)
    if not ids:
        raise ValueError("need at least one component id")
    known = {c.id for c in components}
    if not set(ids) <= known:
        raise ValueError(f"unknown component ids {sorted(set(ids) - known)}")
    mask = sum(1 << i for i in set(ids))
    return _mask_fires(mask, _boundary_profiles(g2, l2, components))


def fire(
    graph: MetricGraph, divisor: Divisor, ids: set[int]
) -> tuple[MetricGraph, Divisor]:
    """Execute one firing of the closed union of the given components.

    Each boundary point sends one chip a short way along every outgoing
    germ; the step is a third of the shortest refined edge, so no two
    chips collide.  Returns the refined graph and the resulting divisor,
    which is effective and of the same degree whenever the union can
    fire (and raises ValueError when it cannot).
    """
    g2, l2, components = _support_context(graph, divisor)
    if not ids:
        raise ValueError("need at least one component id")
    mask = sum(1 << i for i in set(ids))
    comp_of = {eid: c.id for c in components for eid in c.edges}
    step = min(e.length for e in g2.edges) / 3
    values = l2.vertex_values()
    received: dict[tuple[str, object], int] = {}
    for v in g2.vertices:
        chips = l2.vertex_value(v)
        if chips <= 0:
            continue
        ends = g2.ends_at(v)
        inside = [end for end in ends if (mask >> comp_of[end[0].id]) & 1]
        if not inside:
            continue
        outgoing = [end for end in ends if not (mask >> comp_of[end[0].id]) & 1]
        if len(outgoing) > chips:
            raise ValueError("union cannot fire: boundary point short of chips")
        for e, endpoint in outgoing:
            pos = step if endpoint == TAIL else e.length - step
            key = (e.id, pos)
            received[key] = received.get(key, 0) + 1
            values[v] -= 1
    chips = [InteriorChip(eid, pos, n) for (eid, pos), n in sorted(received.items())]
    out = add_divisors(
        Divisor(g2, values), Divisor(g2, {}, chips)
    )
    assert out.is_effective() and out.degree() == l2.degree()
    return g2, out


def is_extremal(graph: MetricGraph, divisor: Divisor, fn: RationalFunction) -> bool:
    """Whether fn is an extremal generator of R(divisor).

    fn is non-extremal exactly when it is the pointwise max of two
    members of R(D) strictly below it somewhere, which happens exactly
    when two proper firable unions of support components of L = D + (fn)
    cover the graph.
    """
    ell = add_divisors(divisor, fn.principal_divisor())
    if not ell.is_effective():
        raise ValueError("D + (f) must be effective")
    g2, l2, components = _support_context(graph, ell)
    k = len(components)
    if k == 0:
        return True
    profiles = _boundary_profiles(g2, l2, components)
    full = (1 << k) - 1
    firable = [m for m in range(1, full) if _mask_fires(m, profiles)]
    for i, m1 in enumerate(firable):
        for m2 in firable[i:]:
            if m1 | m2 == full:
                return False
    return True


def extremal_generators(
    graph: MetricGraph,
    divisor: Divisor,
    jobs: int = 1,
    anchors: list[AnchorCell] | None = None,
) -> list[tuple[AnchorCell, RationalFunction]]:
    """The extremal generators of R(D) with their anchor cells.

    Every extremal sits at a vertex of |D| and every vertex is a
    dimension-0 anchor cell, so it suffices to test one representative
    per such cell.  Functions are gauged to vanish at the first vertex.
    Pass `anchors` to reuse an already computed enumeration.
    """
    if anchors is None:
        anchors = anchor_cells(graph, divisor, jobs=jobs)
    out = []
    for cell in anchors:
        if cell.dim != 0:
            continue
        fn = representative_function(graph, divisor, cell)
        if is_extremal(graph, divisor, fn):
            out.append((cell, fn))
    return out
