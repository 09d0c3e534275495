"""Command line front end.

Inputs are JSON files in the format of `jsonio.graph_from_json`, or
`@name` for a bundled instance.  Results go to stdout as JSON whose
bytes depend only on the input (never on timing or worker count);
`--table` switches to a human-readable row with wall-clock time.

Exit codes: 0 on success, 1 for input problems, 2 for an internal
invariant violation, 3 for an Euler-characteristic violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time

from .anchor import anchor_cells, representative_function
from .cells import all_cells, euler_characteristic, f_vector
from .errors import EulerViolation, InputError, InternalInvariantError
from .firing import extremal_generators
from .graph import Divisor, MetricGraph, canonical_divisor, refine_to_vertex_supported
from .jsonio import (
    anchor_cell_to_json,
    cell_descriptor_to_json,
    function_to_json,
    graph_from_json,
    graph_to_json,
    rat_to_json,
)
from .library import builtin_inputs
from .parametric import instantiate, parametric_candidates
from .rationals import rat, rat_str


def _load_input(
    source: str, require_lengths: bool = True
) -> tuple[MetricGraph, Divisor | None, str]:
    """Resolve a path or @builtin to (graph, divisor, content digest)."""
    if source.startswith("@"):
        named = builtin_inputs()
        name = source[1:]
        if name not in named:
            known = ", ".join(sorted(named))
            raise InputError(f"unknown builtin {source!r}; available: {known}")
        graph, divisor = named[name]
    else:
        try:
            with open(source) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {source!r}: {exc}") from None
        except ValueError as exc:
            raise InputError(f"{source!r} is not valid JSON: {exc}") from None
        graph, divisor = graph_from_json(data, require_lengths=require_lengths)
    blob = json.dumps(
        graph_to_json(graph, divisor), sort_keys=True, separators=(",", ":")
    )
    return graph, divisor, hashlib.sha256(blob.encode()).hexdigest()[:16]


def _need_divisor(divisor: Divisor | None) -> Divisor:
    if divisor is None:
        raise InputError("this command needs a divisor in the input")
    return divisor


def _metric_of(graph: MetricGraph) -> dict:
    return {e.id: rat_to_json(e.length) for e in graph.edges}


def _metric_text(graph: MetricGraph) -> str:
    return "(" + ",".join(rat_str(e.length) for e in graph.edges) + ")"


def _check_cells(graph: MetricGraph, divisor: Divisor, anchors) -> None:
    """Re-derive every anchor cell's representative; the construction
    validates the divisor it produces against the cell's data."""
    for cell in anchors:
        representative_function(graph, divisor, cell)


def _seeded_metrics(digest: str, count: int, graph: MetricGraph):
    """Deterministic sweep metrics: integer lengths in [1, 100]."""
    for k in range(count):
        rng = random.Random(f"{digest}:{k}")
        yield {e.id: rng.randint(1, 100) for e in graph.edges}


def _with_metric(graph: MetricGraph, divisor: Divisor, metric) -> tuple[MetricGraph, Divisor]:
    g2 = MetricGraph(
        graph.vertices,
        [(e.id, e.tail, e.head, metric[e.id]) for e in graph.edges],
    )
    return g2, Divisor(g2, divisor.vertex_values())


def _analyze(graph: MetricGraph, divisor: Divisor, args, want: str) -> dict:
    """One full run on one metric graph; `want` picks the payload."""
    t0 = time.monotonic()
    anchors = anchor_cells(graph, divisor, jobs=args.jobs)
    fv = f_vector(anchors)
    if args.check:
        _check_cells(graph, divisor, anchors)
    result = {
        "anchor_cells": len(anchors),
        "f_vector": list(fv.counts),
        "euler_characteristic": euler_characteristic(fv),
    }
    if want == "anchors":
        result["cells"] = [anchor_cell_to_json(a) for a in anchors]
    elif want == "cells":
        expanded = all_cells(graph, divisor, jobs=args.jobs)
        result["cells"] = [cell_descriptor_to_json(c) for c in expanded]
    elif want == "extremals":
        gens = extremal_generators(graph, divisor, anchors=anchors)
        result["extremal_generators"] = len(gens)
        result["generators"] = [
            {"cell": anchor_cell_to_json(cell), "function": function_to_json(fn)}
            for cell, fn in gens
        ]
    result["seconds"] = round(time.monotonic() - t0, 3)
    return result


_TABLE_HEADER = "metric | anchor cells | extremal generators | f-vector | time (s)"


def _table_row(metric_text: str, result: dict) -> str:
    ext = result.get("extremal_generators")
    fv = "(" + ",".join(str(n) for n in result["f_vector"]) + ")"
    return " | ".join(
        [
            metric_text,
            str(result["anchor_cells"]),
            "-" if ext is None else str(ext),
            fv,
            f"{result['seconds']:.1f}",
        ]
    )


def _emit_json(payload: dict) -> None:
    # timing is stripped so identical inputs give identical bytes
    def clean(node):
        if isinstance(node, dict):
            return {k: clean(v) for k, v in node.items() if k != "seconds"}
        if isinstance(node, list):
            return [clean(v) for v in node]
        return node

    print(json.dumps(clean(payload), indent=1, sort_keys=True))


def _run_structure(args, want: str) -> int:
    graph, divisor, digest = _load_input(args.input)
    divisor = _need_divisor(divisor)
    if args.seed_metrics and divisor.interior_chips:
        raise InputError("metric sweeps need a vertex-supported divisor")
    graph, divisor = refine_to_vertex_supported(graph, divisor)
    payload: dict = {"command": want, "input": digest}
    rows: list[str] = []
    if args.seed_metrics:
        sweeps = []
        for metric in _seeded_metrics(digest, args.seed_metrics, graph):
            g2, d2 = _with_metric(graph, divisor, metric)
            result = _analyze(g2, d2, args, want)
            sweeps.append({"metric": metric, **result})
            rows.append(_table_row(_metric_text(g2), result))
        payload["sweeps"] = sweeps
    else:
        result = _analyze(graph, divisor, args, want)
        payload.update(result)
        payload["metric"] = _metric_of(graph)
        rows.append(_table_row(_metric_text(graph), result))
    if args.table:
        print(_TABLE_HEADER)
        for row in rows:
            print(row)
    else:
        _emit_json(payload)
    return 0


def _run_parametric(args) -> int:
    graph, divisor, digest = _load_input(args.input, require_lengths=False)
    divisor = _need_divisor(divisor)
    t0 = time.monotonic()
    candidates = parametric_candidates(
        graph, divisor, cache_dir=args.cache, jobs=args.jobs
    )
    payload: dict = {
        "command": "parametric",
        "input": digest,
        "candidates": len(candidates),
        "candidate_list": [
            {
                "slopes": {eid: list(p) for eid, p in cand.slopes},
                "config": {
                    "c": dict(cand.config.edge_chips),
                    "d_prime": dict(cand.config.vertex_chips),
                },
                "witness_metric": {
                    eid: rat_to_json(x) for eid, x in cand.witness_metric
                },
            }
            for cand in candidates
        ],
        "seconds": round(time.monotonic() - t0, 3),
    }
    if args.metric is not None:
        try:
            metric = {
                str(k): rat(v) for k, v in json.loads(args.metric).items()
            }
        except (ValueError, AttributeError) as exc:
            raise InputError(f"bad --metric value: {exc}") from None
        try:
            cells = instantiate(graph, divisor, candidates, metric)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        payload["instantiated"] = {
            "metric": {eid: rat_to_json(x) for eid, x in metric.items()},
            "anchor_cells": len(cells),
            "cells": [anchor_cell_to_json(c) for c in cells],
        }
    if args.table:
        print(f"parametric candidates: {len(candidates)}")
        if "instantiated" in payload:
            inst = payload["instantiated"]
            print(f"instantiated at {inst['metric']}: {inst['anchor_cells']} cells")
    else:
        _emit_json(payload)
    return 0


def _run_canonical(args) -> int:
    graph, _, _ = _load_input(args.input)
    print(
        json.dumps(
            graph_to_json(graph, canonical_divisor(graph)),
            indent=1,
            sort_keys=True,
        )
    )
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metgraph",
        description="Cell complexes of linear systems on metric graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", help="input JSON file, or @name for a builtin")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers")
        p.add_argument("--table", action="store_true", help="human table output")
        return p

    for name, help_text in (
        ("anchors", "enumerate the anchor cells of |D|"),
        ("cells", "enumerate every cell of |D|"),
        ("fvector", "compute the f-vector of |D|"),
        ("extremals", "compute the extremal generators of R(D)"),
    ):
        p = add(name, help_text)
        p.add_argument(
            "--check",
            action="store_true",
            help="re-verify each anchor cell through its representative",
        )
        p.add_argument(
            "--seed-metrics",
            type=int,
            default=0,
            metavar="K",
            help="sweep K deterministic random metrics instead of the input's",
        )

    p = add("parametric", "metric-independent candidates, optionally instantiated")
    p.add_argument("--cache", default=None, metavar="DIR", help="candidate cache directory")
    p.add_argument(
        "--metric",
        default=None,
        help='instantiate at this metric, e.g. \'{"e1": "3/2", "e2": 1}\'',
    )

    p = sub.add_parser("canonical", help="fill in the canonical divisor")
    p.add_argument("input", help="input JSON file, or @name for a builtin")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command in ("anchors", "cells", "fvector", "extremals"):
            return _run_structure(args, args.command if args.command != "fvector" else "fvector")
        if args.command == "parametric":
            return _run_parametric(args)
        return _run_canonical(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EulerViolation as exc:
        print(f"euler characteristic violation: {exc}", file=sys.stderr)
        return 3
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
