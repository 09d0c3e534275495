"""Tests for chip firing and extremality.

`oracle_is_extremal` re-decides extremality by brute force: enumerate
every subset of support components with `can_fire` and look for two
proper firable subsets covering everything.  The instances used here
have at most a handful of components, so the full subset lattice is
cheap and independent of the bitmask scan inside `is_extremal`.
"""
from __future__ import annotations

import itertools

import pytest

from metgraph.firing import (
    can_fire,
    extremal_generators,
    fire,
    is_extremal,
    support_components,
)
from metgraph.anchor import anchor_cells, representative_function
from metgraph.graph import (
    Divisor,
    MetricGraph,
    RationalFunction,
    add_divisors,
    canonical_divisor,
    tropical_shift,
)
from metgraph.library import k4, k33, loop3
from metgraph.rationals import rat


def moved_divisor(d, f):
    return add_divisors(d, f.principal_divisor())


def firable_subsets(g, L):
    comps = support_components(g, L)
    ids = [c.id for c in comps]
    out = []
    for r in range(1, len(ids) + 1):
        for sub in itertools.combinations(ids, r):
            if can_fire(g, L, set(sub)):
                out.append(frozenset(sub))
    return ids, out


def oracle_is_extremal(g, d, f):
    L = moved_divisor(d, f)
    ids, firable = firable_subsets(g, L)
    full = frozenset(ids)
    proper = [s for s in firable if s != full]
    return not any(a | b == full for a, b in itertools.combinations_with_replacement(proper, 2))


class TestSupportComponents:
    def test_loop_cut_at_two_points_gives_two_arcs(self, loop_instance):
        g, d = loop_instance[:2]
        by_pair = {c.slope("e"): c for c in loop_instance[5]}
        f = representative_function(g, d, by_pair[(-1, -1)])
        L = moved_divisor(d, f)
        comps = support_components(g, L)
        assert len(comps) == 2
        assert all(len(c.boundary) == 2 for c in comps)

    def test_loop_cut_at_one_point_stays_connected(self, loop_instance):
        g, d = loop_instance[:2]
        by_pair = {c.slope("e"): c for c in loop_instance[5]}
        f = representative_function(g, d, by_pair[(-1, -2)])
        comps = support_components(g, moved_divisor(d, f))
        assert len(comps) == 1

    def test_zero_divisor_has_one_component_without_boundary(self):
        g, _ = loop3()
        comps = support_components(g, Divisor(g, {"v": 0}))
        assert len(comps) == 1
        assert comps[0].boundary == ()

    def test_component_ids_are_dense(self):
        g = k4()
        comps = support_components(g, canonical_divisor(g))
        assert [c.id for c in comps] == list(range(len(comps)))


class TestCanFire:
    def test_loop_arcs_fire_individually_and_jointly(self, loop_instance):
        g, d = loop_instance[:2]
        by_pair = {c.slope("e"): c for c in loop_instance[5]}
        L = moved_divisor(d, representative_function(g, d, by_pair[(-1, -1)]))
        assert can_fire(g, L, {0})
        assert can_fire(g, L, {1})
        assert can_fire(g, L, {0, 1})

    def test_rejects_empty_and_unknown_ids(self, loop_instance):
        g, d = loop_instance[:2]
        with pytest.raises(ValueError):
            can_fire(g, d, set())
        with pytest.raises(ValueError):
            can_fire(g, d, {99})

    def test_full_support_always_fires_off_vertices(self):
        # all chips at the single vertex: firing everything is a no-op
        # on the boundary (there is none), so it trivially fires
        g, d = loop3()
        assert can_fire(g, d, {0})


class TestFire:
    def test_firing_preserves_degree_and_effectivity(self, loop_instance):
        g, d = loop_instance[:2]
        by_pair = {c.slope("e"): c for c in loop_instance[5]}
        L = moved_divisor(d, representative_function(g, d, by_pair[(-1, -1)]))
        _, firable = firable_subsets(g, L)
        assert firable
        for sub in firable:
            g2, after = fire(g, L, set(sub))
            assert after.is_effective()
            assert after.degree() == L.degree()

    def test_firing_an_arc_moves_boundary_chips_inward(self, loop_instance):
        g, d = loop_instance[:2]
        by_pair = {c.slope("e"): c for c in loop_instance[5]}
        L = moved_divisor(d, representative_function(g, d, by_pair[(-1, -1)]))
        g2, after = fire(g, L, {0})
        # one chip left each boundary point of the fired arc
        assert after.degree() == 3
        assert len(after.interior_chips) + sum(
            1 for v in g2.vertices if after.vertex_value(v)
        ) >= 2

    def test_unfirable_subset_raises(self):
        # chips at a and b pinch off the edge between them; firing that
        # lone segment needs two chips at each end, and there is only one
        g = k4()
        d = Divisor(g, {"a": 1, "b": 1, "c": 0, "d": 0})
        comps = support_components(g, d)
        segment = next(c.id for c in comps if c.edges == ("ab",))
        assert not can_fire(g, d, {segment})
        with pytest.raises(ValueError):
            fire(g, d, {segment})


class TestIsExtremal:
    def test_loop_generators(self, loop_instance):
        gens = loop_instance[6]
        assert {cell.slope("e") for cell, _ in gens} == {
            (0, 0),
            (-1, -2),
            (-2, -1),
        }
        for _, f in gens:
            slopes = f.edge_slopes("e")
            pair = (slopes[0], -slopes[-1])
            assert pair in {(0, 0), (-1, -2), (-2, -1)}

    def test_loop_agrees_with_subset_oracle(self, loop_instance):
        g, d = loop_instance[:2]
        for cell in loop_instance[5]:
            f = representative_function(g, d, cell)
            assert is_extremal(g, d, f) == oracle_is_extremal(g, d, f)

    def test_k4_unit_agrees_with_subset_oracle(self, k4_rows):
        g, _, _, _, anchors, gens = k4_rows[(1, 1, 1, 1, 1, 1)]
        d = canonical_divisor(g)
        points = [c for c in anchors if c.dim == 0]
        flags = []
        for cell in points:
            f = representative_function(g, d, cell)
            verdict = is_extremal(g, d, f)
            assert verdict == oracle_is_extremal(g, d, f)
            flags.append(verdict)
        assert sum(flags) == len(gens) == 7

    def test_shift_invariance(self, loop_instance):
        g, d = loop_instance[:2]
        for cell in loop_instance[5]:
            f = representative_function(g, d, cell)
            assert is_extremal(g, d, f) == is_extremal(g, d, tropical_shift(f, 7))

    def test_constant_on_zero_divisor_is_extremal(self):
        g, _ = loop3()
        d = Divisor(g, {"v": 0})
        assert is_extremal(g, d, RationalFunction.constant(g, 0))

    def test_rejects_function_moving_divisor_negative(self):
        g, _ = loop3()
        d = Divisor(g, {"v": 0})
        f = RationalFunction(g, {"v": 0}, {"e": [(rat(3, 2), rat(-3, 2))]})
        with pytest.raises(ValueError):
            is_extremal(g, d, f)


class TestMidEdgeValleys:
    """A function with two symmetric valleys on a trivalent bipartite
    graph: both halves of the graph fire, so it cannot be extremal."""

    def build(self):
        g = k33()
        d = canonical_divisor(g)
        half = rat(1, 2)
        f = RationalFunction(
            g,
            {v: 0 for v in g.vertices},
            {"e11": [(half, -half)], "e33": [(half, -half)]},
        )
        return g, d, f

    def test_moved_divisor(self):
        g, d, f = self.build()
        L = moved_divisor(d, f)
        assert L.is_effective()
        assert L.vertex_value("b2") == 1 and L.vertex_value("t2") == 1
        assert {(c.edge, c.position, c.value) for c in L.interior_chips} == {
            ("e11", rat(1, 2), 2),
            ("e33", rat(1, 2), 2),
        }

    def test_two_halves_fire(self):
        g, d, f = self.build()
        L = moved_divisor(d, f)
        ids, firable = firable_subsets(g, L)
        full = frozenset(ids)
        proper = [s for s in firable if s != full]
        assert any(a | b == full for a, b in itertools.combinations(proper, 2))

    def test_not_extremal(self):
        g, d, f = self.build()
        assert not is_extremal(g, d, f)
        assert not oracle_is_extremal(g, d, f)


class TestExtremalGenerators:
    def test_loop_count(self, loop_instance):
        assert loop_instance[3] == 3

    def test_generators_are_reused_anchor_representatives(self, loop_instance):
        g, d = loop_instance[:2]
        gens = extremal_generators(g, d)
        assert gens == loop_instance[6]

    def test_parallel_matches_serial(self):
        g = k4()
        d = canonical_divisor(g)
        assert extremal_generators(g, d) == extremal_generators(g, d, jobs=2)
