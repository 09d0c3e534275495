"""Acceptance suite.

Each test prints one PASS/FAIL line (T1 through T8f) on the real
stdout, bypassing capture, so a full run always shows the verdict per
criterion.  The expected counts for the three graph families are the
published reference values; everything else is checked against
independently coded oracles.
"""
from __future__ import annotations

import itertools
import random

import pytest

from metgraph.anchor import anchor_cells, representative_function
from metgraph.cells import euler_characteristic, f_vector
from metgraph.firing import is_extremal
from metgraph.graph import (
    Divisor,
    MetricGraph,
    RationalFunction,
    add_divisors,
    canonical_divisor,
    tropical_max,
)
from metgraph.library import (
    G020_METRICS,
    K4_METRICS,
    K33_MATRICES,
    builtin_inputs,
    g020,
    k4,
    k33,
    loop3,
)
from metgraph.lp import LE, LT, EQ, ConstraintSystem, has_integer_point, satisfies
from metgraph.parametric import instantiate, parametric_candidates
from metgraph.rationals import rat

K4_EXPECTED = {
    (1, 1, 1, 1, 1, 1): (30, 7, (14, 28, 15)),
    (1, 1, 2, 2, 1, 1): (42, 11, (26, 52, 31, 4)),
    (2, 2, 2, 2, 2, 3): (36, 9, (20, 40, 23, 2)),
    (2, 2, 2, 2, 2, 1): (40, 11, (24, 44, 21)),
    (4, 9, 7, 8, 6, 10): (50, 15, (34, 60, 27)),
}

G020_EXPECTED = {
    (1, 1, 1, 1, 1, 1): (42, 20, (31, 61, 36, 5)),
    (1, 1, 1, 2, 1, 1): (44, 12, (25, 47, 24, 1)),
    (1, 3, 2, 2, 1, 3): (42, 20, (31, 61, 36, 5)),
}

K33_EXPECTED = {
    ((1, 1, 1), (1, 1, 1), (1, 1, 1)): (370, 33, (130, 483, 630, 348, 81, 9)),
    ((2, 1, 1), (1, 2, 1), (1, 1, 2)): (460, 63, (196, 615, 666, 276, 33, 3)),
    ((3, 91, 96), (94, 4, 92), (93, 95, 5)): (730, 84, (337, 936, 873, 273)),
}


_CONSOLE = None


@pytest.fixture(autouse=True)
def _console(capsys):
    """Let report() write through pytest's capture from any test."""
    global _CONSOLE
    _CONSOLE = capsys
    yield
    _CONSOLE = None


def report(tag: str, ok: bool, detail: str) -> None:
    with _CONSOLE.disabled():
        print(f"{tag} {'PASS' if ok else 'FAIL'} {detail}", flush=True)
    assert ok, f"{tag} {detail}"


def row_matches(rows, key, expected):
    got = rows[key][1:4]
    return got == expected, f"{key}: got {got[0]}/{got[1]}/{got[2]}"


def random_rational_metric(rng):
    return rat(rng.randint(1, 60), rng.randint(1, 6))


def test_t1_k4_reference_counts(k4_rows):
    details = []
    ok = True
    for metric, expected in K4_EXPECTED.items():
        good, detail = row_matches(k4_rows, metric, expected)
        ok = ok and good
        details.append(detail)
    report("T1", ok, "; ".join(details))


def test_t2_g020_reference_counts(g020_rows):
    details = []
    ok = True
    for metric, expected in G020_EXPECTED.items():
        good, detail = row_matches(g020_rows, metric, expected)
        ok = ok and good
        details.append(detail)
    report("T2", ok, "; ".join(details))


def test_t3_k33_reference_counts(k33_rows):
    details = []
    ok = True
    for matrix, expected in K33_EXPECTED.items():
        good, detail = row_matches(k33_rows, matrix, expected)
        ok = ok and good
        details.append(detail)
    report("T3", ok, "; ".join(details))


def test_t4_euler_characteristic_is_one(k33_rows):
    checked = 0
    worst = None
    for name, (g, d) in sorted(builtin_inputs().items()):
        if g.vertices == k33().vertices and len(g.edges) == 9:
            # expensive rows already computed by the session fixture
            matrix = next(
                m for m in K33_MATRICES if k33(m).edges == g.edges
            )
            fv = k33_rows[matrix][3]
            chi = sum((-1) ** k * c for k, c in enumerate(fv))
        else:
            chi = euler_characteristic(f_vector(anchor_cells(g, d)))
        checked += 1
        if chi != 1:
            worst = (name, chi)
    rng = random.Random(20260819)
    for factory, order in ((k4, 6), (g020, 6)):
        for _ in range(20):
            metric = tuple(random_rational_metric(rng) for _ in range(order))
            g = factory(metric)
            chi = euler_characteristic(f_vector(anchor_cells(g, canonical_divisor(g))))
            checked += 1
            if chi != 1:
                worst = (metric, chi)
    report("T4", worst is None, f"{checked} inputs, all Euler 1" if worst is None else f"{worst}")


def test_t5_parametric_matches_direct_search():
    rng = random.Random(55)
    checked = 0
    for skeleton, d in (
        (k4(), canonical_divisor(k4())),
        loop3(),
    ):
        cands = parametric_candidates(skeleton, d)
        for _ in range(10):
            lengths = {e.id: random_rational_metric(rng) for e in skeleton.edges}
            g = MetricGraph(
                skeleton.vertices,
                [(e.id, e.tail, e.head, lengths[e.id]) for e in skeleton.edges],
            )
            direct = anchor_cells(g, Divisor(g, d.vertex_values()))
            if instantiate(skeleton, d, cands, lengths) != direct:
                report("T5", False, f"mismatch at {lengths}")
            checked += 1
    report("T5", True, f"{checked} random metrics agree with the direct search")


def loop_function_for_pair(g, s, t):
    """Explicit construction of a loop function with outgoing slopes
    (s, t), or None: constant for (0, 0), otherwise a single interior
    valley, the only shapes an anchor divisor on a loop allows."""
    if (s, t) == (0, 0):
        return RationalFunction.constant(g, 0)
    if s + t >= 0 or s >= 0 or t >= 0:
        return None
    length = g.edge("e").length
    x = length * t / (s + t)
    if not 0 < x < length:
        return None
    return RationalFunction(g, {"v": 0}, {"e": [(x, s * x)]})


def test_t6_loop_brute_force():
    g, d = loop3()
    degree = d.degree()
    supported = set()
    for s, t in itertools.product(range(-degree, degree + 1), repeat=2):
        f = loop_function_for_pair(g, s, t)
        if f is None:
            continue
        moved = add_divisors(d, f.principal_divisor())
        if moved.is_effective():
            supported.add((s, t))
    cells = anchor_cells(g, d)
    got = {c.slope("e") for c in cells}
    want = {(0, 0), (-1, -1), (-1, -2), (-2, -1)}
    fv = f_vector(cells).counts
    ok = got == want == supported and fv == (4, 5, 2)
    report("T6", ok, f"slope pairs {sorted(got)}, f-vector {fv}")


def test_t7_anchor_count_minus_vertex_count(k4_rows):
    gaps = {}
    for metric in K4_METRICS:
        _, n_anchors, _, fv, _, _ = k4_rows[metric]
        gaps[metric] = n_anchors - fv[0]
    ok = all(gap == 16 for gap in gaps.values())
    extra = {}
    rng = random.Random(77)
    for _ in range(3):
        metric = tuple(rng.randint(1, 9) for _ in range(6))
        g = k4(metric)
        cells = anchor_cells(g, canonical_divisor(g))
        extra[metric] = len(cells) - f_vector(cells).counts[0]
    report(
        "T7",
        ok,
        f"table gaps {sorted(set(gaps.values()))}; random metrics (reported only) {extra}",
    )


def test_t8a_slopes_bounded_by_degree(k33_rows):
    checked = 0
    ok = True
    instances = [loop3()]
    for g in (k4(), g020()):
        instances.append((g, canonical_divisor(g)))
    pools = [anchor_cells(g, d) for g, d in instances]
    degrees = [d.degree() for _, d in instances]
    for matrix in K33_MATRICES:
        pools.append(k33_rows[matrix][4])
        degrees.append(6)
    for cells, degree in zip(pools, degrees):
        for cell in cells:
            for _, (s_t, s_h) in cell.slopes:
                checked += 1
                ok = ok and -degree <= s_t <= degree and -degree <= s_h <= degree
    report("T8a", ok, f"{checked} slope values within [-deg D, deg D]")


def test_t8b_dimension_bound_on_biconnected(k4_rows, k33_rows):
    ok = True
    details = []
    for rows, expected_degree in ((k4_rows, 4), (k33_rows, 6)):
        for key, row in rows.items():
            top = len(row[3]) - 1
            details.append(f"{key}: top dim {top}")
            ok = ok and top <= expected_degree - 1
    report("T8b", ok, f"max dim <= deg D - 1 on {len(details)} rows")


def test_t8c_representatives_reproduce_configurations():
    checked = 0
    instances = [loop3()]
    for g in (k4(), g020()):
        instances.append((g, canonical_divisor(g)))
    for g, d in instances:
        for cell in anchor_cells(g, d):
            f = representative_function(g, d, cell)
            moved = add_divisors(d, f.principal_divisor())
            assert moved.is_effective()
            chips = {c.edge: c.value for c in moved.interior_chips}
            for e in g.edges:
                assert chips.get(e.id, 0) == cell.config.chips_on(e.id)
            for v in g.vertices:
                assert moved.vertex_value(v) == cell.config.residue_at(v)
            checked += 1
    report("T8c", True, f"{checked} representatives rebuild their configurations")


def test_t8d_max_of_generators_stays_effective(k4_rows, g020_rows):
    rng = random.Random(8)
    checked = 0
    ok = True
    for rows, metric in ((k4_rows, (1, 1, 1, 1, 1, 1)), (g020_rows, (1, 1, 1, 1, 1, 1))):
        g = rows[metric][0]
        d = canonical_divisor(g)
        gens = [fn for _, fn in rows[metric][5]]
        for _ in range(25):
            f, h = rng.choice(gens), rng.choice(gens)
            moved = add_divisors(d, tropical_max(f, h).principal_divisor())
            checked += 1
            ok = ok and moved.is_effective() and moved.degree() == d.degree()
    report("T8d", ok, f"{checked} pairwise maxima keep D + (f) effective")


def test_t8e_two_valley_function_not_extremal():
    g = k33()
    d = canonical_divisor(g)
    half = rat(1, 2)
    f = RationalFunction(
        g,
        {v: 0 for v in g.vertices},
        {"e11": [(half, -half)], "e33": [(half, -half)]},
    )
    verdict = is_extremal(g, d, f)
    report("T8e", not verdict, "two-valley function on the bipartite graph is not extremal")


def test_t8f_integer_search_matches_exhaustive_enumeration():
    rng = random.Random(1234)
    box = 2
    checked = 0
    ok = True
    for _ in range(30):
        nvars = rng.randint(1, 4)
        names = [f"x{i}" for i in range(nvars)]
        sys_ = ConstraintSystem(names, integer_vars=names)
        rows = []
        for v in names:
            rows.append(sys_.row({v: 1}, LE, box))
            rows.append(sys_.row({v: -1}, LE, box))
        for _ in range(rng.randint(2, 4)):
            coeffs = {v: rng.randint(-2, 2) for v in names}
            rows.append(sys_.row(coeffs, rng.choice([LE, LE, LT, EQ]), rng.randint(-3, 3)))
        sys_ = sys_.extended(rows)
        grid = itertools.product(range(-box, box + 1), repeat=nvars)
        expected = any(satisfies(sys_, tuple(map(rat, p))) for p in grid)
        checked += 1
        ok = ok and has_integer_point(sys_) == expected
    report("T8f", ok, f"{checked} random systems agree with the integer-box oracle")
