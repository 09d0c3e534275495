"""Metric-independent anchor-cell candidates and their instantiation.

Whether a slope assignment supports an anchor cell depends on the edge
lengths only through a linear system, so treating the lengths as
additional variables yields the assignments feasible for at least one
metric.  That candidate list is a function of the combinatorial graph
and the divisor alone; specializing it to a concrete metric is a strict
feasibility check per candidate, far cheaper than a fresh search, and
the list can be cached on disk between runs.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping

from .anchor import (
    AnchorCell,
    Configuration,
    _cell_from_slopes,
    _check_inputs,
    value_var,
)
from .graph import Divisor, MetricGraph
from .lp import EQ, LT, ConstraintSystem, find_point, is_strictly_feasible
from .rationals import Rat, RatLike, rat, rat_str


@dataclass(frozen=True)
class ParametricCandidate:
    """A slope assignment feasible for at least one metric.

    `witness_metric` is a concrete choice of edge lengths realizing it,
    kept so the candidate's feasibility can be re-verified cheaply.
    """

    slopes: tuple[tuple[str, tuple[int, int]], ...]
    config: Configuration
    witness_metric: tuple[tuple[str, Rat], ...]

    def slope_map(self) -> dict[str, tuple[int, int]]:
        return dict(self.slopes)

    def witness_map(self) -> dict[str, Rat]:
        return dict(self.witness_metric)

    @property
    def sort_key(self) -> tuple:
        return self.slopes


def length_var(edge_id: str) -> str:
    """LP variable holding an edge's unknown length."""
    return f"M({edge_id})"


# path strengths in the sign-closure matrix
_NONE, _WEAK, _STRICT = 0, 1, 2


def _parametric_walk(
    skeleton: MetricGraph,
    divisor: Divisor,
    first_edge_pairs: list[tuple[int, int]] | None = None,
) -> list[ParametricCandidate]:
    """Depth-first search over slope pairs with edge lengths as unknowns.

    The chip-budget, vertex-residue, and loop prunes of the fixed-metric
    search apply unchanged (they never mention lengths).  Feasibility
    over some metric also reduces to a difference system: each length
    variable appears in the rows of its own edge only, so it can be
    eliminated edge by edge, leaving just a sign condition on
    delta = a_tail - a_head.  A chipless edge forces sign(delta) =
    -sign(s_tail); a chip-carrying edge forces delta < 0 when
    s_tail >= 0, delta > 0 when s_head >= 0, and nothing when both
    slopes are negative (a long enough edge absorbs any difference).
    The walk keeps the transitive closure of those zero-width bounds
    and rejects a branch exactly when a cycle of forced signs closes
    with at least one strict step.  The LP kernel is used once per
    surviving leaf to produce a concrete witness metric, which doubles
    as a check of the elimination.
    """
    edges = skeleton.edges
    vertices = skeleton.vertices
    degree = divisor.degree()
    nv = len(vertices)
    vat = {v: i for i, v in enumerate(vertices)}

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

    remaining_ends = {v: 0 for v in vertices}
    for e in edges:
        remaining_ends[e.tail] += 1
        remaining_ends[e.head] += 1
    residue = {v: divisor.vertex_value(v) for v in vertices}

    def sign_arcs(e, s_t: int, s_h: int) -> list[tuple[int, int, int]]:
        """Forced-sign arcs (from, to, strength) for one assigned edge;
        an arc p -> q of strength f means a_p - a_q <= 0, strictly if
        f is _STRICT."""
        if e.is_loop:
            return []
        u, w = vat[e.tail], vat[e.head]
        if s_t + s_h == 0:
            if s_t == 0:
                return [(u, w, _WEAK), (w, u, _WEAK)]
            return [(u, w, _STRICT)] if s_t > 0 else [(w, u, _STRICT)]
        if s_t >= 0:
            return [(u, w, _STRICT)]
        if s_h >= 0:
            return [(w, u, _STRICT)]
        return []

    def with_arcs(mat, arcs):
        out = [row[:] for row in mat]
        for p, q, f in arcs:
            if out[p][q] >= f:
                continue
            for x in range(nv):
                xp = out[x][p]
                if xp == _NONE:
                    continue
                row = out[x]
                for y in range(nv):
                    qy = out[q][y]
                    if qy == _NONE:
                        continue
                    if f == _STRICT or xp == _STRICT or qy == _STRICT:
                        s = _STRICT
                    else:
                        s = _WEAK
                    if s > row[y]:
                        row[y] = s
        assert all(out[x][x] != _STRICT for x in range(nv))
        return out

    variables = [value_var(v) for v in vertices] + [
        length_var(e.id) for e in edges
    ]
    base = ConstraintSystem(variables)

    def leaf_witness(chosen: dict[str, tuple[int, int]]):
        rows = [base.row({value_var(vertices[0]): 1}, EQ, 0)]
        for e in edges:
            rows.append(base.row({length_var(e.id): -1}, LT, 0))
            s_t, s_h = chosen[e.id]
            au, aw, m = value_var(e.tail), value_var(e.head), length_var(e.id)
            coeffs: dict[str, int] = {}
            for var, co in ((au, 1), (aw, -1), (m, s_t)):
                coeffs[var] = coeffs.get(var, 0) + co
            if s_t + s_h == 0:
                rows.append(base.row(coeffs, EQ, 0))
            else:
                rows.append(base.row(coeffs, LT, 0))
                coeffs = {}
                for var, co in ((aw, 1), (au, -1), (m, s_h)):
                    coeffs[var] = coeffs.get(var, 0) + co
                rows.append(base.row(coeffs, LT, 0))
        return ConstraintSystem(variables, rows)

    def vertex_ok(v: str, unspent: int) -> bool:
        q, r = residue[v], remaining_ends[v]
        return q + r * degree >= 0 and q - r * degree <= unspent

    out: list[ParametricCandidate] = []
    chosen: dict[str, tuple[int, int]] = {}
    identity = [[_WEAK if x == y else _NONE for y in range(nv)] for x in range(nv)]

    def walk(k: int, mat, budget: int) -> None:
        if k == len(edges):
            system = leaf_witness(chosen)
            witness = find_point(system)
            assert witness is not None, "sign closure admitted an infeasible leaf"
            metric = tuple(
                (e.id, witness[system.index_of(length_var(e.id))]) for e in edges
            )
            slopes = tuple((e.id, chosen[e.id]) for e in edges)
            cell = _cell_from_slopes(skeleton, divisor, slopes)
            out.append(ParametricCandidate(slopes, cell.config, metric))
            return
        e = edges[k]
        candidates = (
            first_edge_pairs
            if k == 0 and first_edge_pairs is not None
            else pairs_by_budget[budget]
        )
        u, w = vat[e.tail], vat[e.head]
        uw, wu = mat[u][w], mat[w][u]
        for s_t, s_h in candidates:
            c = -(s_t + s_h)
            if c < 0 or c > budget:
                continue
            if e.is_loop and not (s_t == s_h == 0 or (s_t < 0 and s_h < 0)):
                continue
            arcs = sign_arcs(e, s_t, s_h)
            if arcs:
                # a new arc is fatal exactly when a return path exists and
                # either step is strict; two weak arcs only meet strict paths
                bad = False
                for p, q, f in arcs:
                    back = wu if (p, q) == (u, w) else uw
                    if back != _NONE and (f == _STRICT or back == _STRICT):
                        bad = True
                        break
                if bad:
                    continue
            unspent = budget - c
            residue[e.tail] += s_t
            remaining_ends[e.tail] -= 1
            residue[e.head] += s_h
            remaining_ends[e.head] -= 1
            if vertex_ok(e.tail, unspent) and vertex_ok(e.head, unspent):
                chosen[e.id] = (s_t, s_h)
                walk(k + 1, with_arcs(mat, arcs) if arcs else mat, unspent)
                del chosen[e.id]
            residue[e.tail] -= s_t
            remaining_ends[e.tail] += 1
            residue[e.head] -= s_h
            remaining_ends[e.head] += 1

    walk(0, identity, degree)
    return out


def _parametric_chunk(args) -> list[ParametricCandidate]:
    skeleton, divisor, pairs = args
    return _parametric_walk(skeleton, divisor, first_edge_pairs=pairs)


def _cache_key(skeleton: MetricGraph, divisor: Divisor) -> tuple[dict, str]:
    """Canonical combinatorial content and its digest; lengths excluded."""
    content = {
        "vertices": list(skeleton.vertices),
        "edges": [[e.id, e.tail, e.head] for e in skeleton.edges],
        "divisor": {v: n for v, n in divisor.vertex_values().items() if n},
    }
    blob = json.dumps(content, sort_keys=True, separators=(",", ":"))
    return content, hashlib.sha256(blob.encode()).hexdigest()[:16]


def _candidate_to_json(cand: ParametricCandidate) -> dict:
    return {
        "slopes": {eid: list(pair) for eid, pair in cand.slopes},
        "config": {
            "c": dict(cand.config.edge_chips),
            "d_prime": dict(cand.config.vertex_chips),
        },
        "witness_metric": {eid: rat_str(x) for eid, x in cand.witness_metric},
    }


def _candidate_from_json(data: dict) -> ParametricCandidate:
    slopes = tuple(
        sorted((eid, (int(p[0]), int(p[1]))) for eid, p in data["slopes"].items())
    )
    config = Configuration.from_maps(
        data["config"]["c"], data["config"]["d_prime"]
    )
    metric = tuple(
        sorted((eid, rat(x)) for eid, x in data["witness_metric"].items())
    )
    return ParametricCandidate(slopes, config, metric)


def parametric_candidates(
    skeleton: MetricGraph,
    divisor: Divisor,
    cache_dir: str | None = None,
    jobs: int = 1,
) -> list[ParametricCandidate]:
    """All slope assignments feasible for some choice of edge lengths.

    The lengths of `skeleton` are ignored; only its combinatorics and the
    divisor matter.  With `cache_dir` set, a previously computed list for
    the same combinatorial input is reused, and fresh results are written
    back atomically.  An unreadable or stale cache file is recomputed
    rather than trusted.
    """
    _check_inputs(skeleton, divisor)
    content, digest = _cache_key(skeleton, divisor)
    path = (
        os.path.join(cache_dir, f"parametric-{digest}.json") if cache_dir else None
    )
    if path is not None and os.path.exists(path):
        try:
            with open(path) as fh:
                data = json.load(fh)
            if data.get("key") == content:
                return [_candidate_from_json(c) for c in data["candidates"]]
        except (OSError, ValueError, KeyError, TypeError):
            pass

    if jobs <= 1 or not skeleton.edges:
        found = _parametric_walk(skeleton, divisor)
    else:
        degree = divisor.degree()
        pairs = [
            (s_t, -c - s_t)
            for c in range(degree + 1)
            for s_t in range(-degree, degree + 1)
            if -degree <= -c - s_t <= degree
        ]
        pairs.sort()
        shards = [pairs[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(
                _parametric_chunk,
                [(skeleton, divisor, shard) for shard in shards if shard],
            )
            found = [cand for part in parts for cand in part]
    found.sort(key=lambda c: c.sort_key)

    if path is not None:
        os.makedirs(cache_dir, exist_ok=True)
        payload = {
            "key": content,
            "candidates": [_candidate_to_json(c) for c in found],
        }
        fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(payload, fh, indent=1)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return found


def instantiate(
    skeleton: MetricGraph,
    divisor: Divisor,
    candidates: list[ParametricCandidate],
    metric: Mapping[str, RatLike],
) -> list[AnchorCell]:
    """Specialize parametric candidates to a concrete metric.

    Plugs the given lengths into each candidate's system and keeps the
    strictly feasible ones, packaged as anchor cells of the resulting
    metric graph.  The output equals what a direct search on that graph
    finds, provided `candidates` is the full list for (skeleton, divisor).
    """
    lengths = {eid: rat(x) for eid, x in metric.items()}
    missing = [e.id for e in skeleton.edges if e.id not in lengths]
    if missing:
        raise ValueError(f"metric is missing edges {missing}")
    if any(x <= 0 for x in lengths.values()):
        raise ValueError("metric lengths must be positive")
    graph = MetricGraph(
        skeleton.vertices,
        [(e.id, e.tail, e.head, lengths[e.id]) for e in skeleton.edges],
    )
    moved = Divisor(graph, divisor.vertex_values())
    variables = [value_var(v) for v in graph.vertices]
    base = ConstraintSystem(variables)
    gauge = base.row({value_var(graph.vertices[0]): 1}, EQ, 0)

    def difference(au: str, aw: str, sign: int) -> dict:
        d: dict[str, int] = {}
        for var, co in ((au, sign), (aw, -sign)):
            d[var] = d.get(var, 0) + co
        return d

    out = []
    for cand in candidates:
        rows = [gauge]
        for eid, (s_t, s_h) in cand.slopes:
            e = graph.edge(eid)
            au, aw = value_var(e.tail), value_var(e.head)
            m = lengths[eid]
            if s_t + s_h == 0:
                rows.append(base.row(difference(au, aw, 1), EQ, -s_t * m))
            else:
                rows.append(base.row(difference(au, aw, 1), LT, -s_t * m))
                rows.append(base.row(difference(au, aw, -1), LT, -s_h * m))
        if is_strictly_feasible(ConstraintSystem(variables, rows)):
            out.append(_cell_from_slopes(graph, moved, cand.slopes))
    out.sort(key=lambda c: c.sort_key)
    return out
