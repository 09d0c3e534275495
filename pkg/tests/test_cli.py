"""End-to-end tests of the command line."""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from metgraph.cli import main
from metgraph.graph import canonical_divisor
from metgraph.jsonio import graph_from_json, graph_to_json
from metgraph.library import builtin_inputs, loop3

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "metgraph" / "data"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestStructureCommands:
    def test_anchors_loop(self, capsys):
        payload = run_json(capsys, "anchors", "@loop3")
        assert payload["command"] == "anchors"
        assert payload["anchor_cells"] == 4
        assert payload["f_vector"] == [4, 5, 2]
        assert payload["euler_characteristic"] == 1
        assert len(payload["cells"]) == 4
        assert "seconds" not in payload

    def test_cells_loop(self, capsys):
        payload = run_json(capsys, "cells", "@loop3")
        assert len(payload["cells"]) == 11
        dims = sorted(c["dim"] for c in payload["cells"])
        assert dims == [0] * 4 + [1] * 5 + [2] * 2

    def test_fvector_loop(self, capsys):
        payload = run_json(capsys, "fvector", "@loop3")
        assert payload["f_vector"] == [4, 5, 2]
        assert "cells" not in payload

    def test_extremals_loop(self, capsys):
        payload = run_json(capsys, "extremals", "@loop3")
        assert payload["extremal_generators"] == 3
        assert len(payload["generators"]) == 3
        for gen in payload["generators"]:
            assert "cell" in gen and "function" in gen

    def test_check_flag(self, capsys):
        code, _, err = run(capsys, "anchors", "@k4-unit", "--check")
        assert code == 0, err

    def test_table_output(self, capsys):
        code, out, _ = run(capsys, "extremals", "@loop3", "--table")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("metric | anchor cells")
        assert len(lines) == 2
        metric, anchors, ext, fv, _ = [f.strip() for f in lines[1].split("|")]
        assert (metric, anchors, ext, fv) == ("(3)", "4", "3", "(4,5,2)")

    def test_file_input(self, capsys, tmp_path):
        g, d = loop3()
        path = tmp_path / "loop.json"
        path.write_text(json.dumps(graph_to_json(g, d)))
        payload = run_json(capsys, "anchors", str(path))
        assert payload["anchor_cells"] == 4

    def test_interior_chips_are_refined(self, capsys, tmp_path):
        g, _ = loop3()
        blob = graph_to_json(g)
        blob["divisor"] = {
            "vertices": {"v": 1},
            "interior": [{"edge": "e", "position": 2, "value": 2}],
        }
        path = tmp_path / "chipped.json"
        path.write_text(json.dumps(blob))
        payload = run_json(capsys, "fvector", str(path))
        assert payload["euler_characteristic"] == 1
        # the refined graph carries the chip point as a vertex
        assert "e#0" in payload["metric"] and "e#1" in payload["metric"]

    def test_sweep_rejects_interior_chips(self, capsys, tmp_path):
        g, _ = loop3()
        blob = graph_to_json(g)
        blob["divisor"] = {
            "vertices": {"v": 1},
            "interior": [{"edge": "e", "position": 2, "value": 2}],
        }
        path = tmp_path / "chipped.json"
        path.write_text(json.dumps(blob))
        code, _, err = run(capsys, "fvector", str(path), "--seed-metrics", "2")
        assert code == 1
        assert "vertex-supported" in err

    def test_seed_metric_sweep_is_deterministic(self, capsys):
        first = run(capsys, "fvector", "@loop3", "--seed-metrics", "3")
        second = run(capsys, "fvector", "@loop3", "--seed-metrics", "3")
        assert first == second
        payload = json.loads(first[1])
        assert len(payload["sweeps"]) == 3
        for sweep in payload["sweeps"]:
            assert sweep["euler_characteristic"] == 1
            assert 1 <= sweep["metric"]["e"] <= 100


class TestDeterminism:
    def test_output_independent_of_worker_count(self, capsys):
        serial = run(capsys, "anchors", "@k4-unit", "--jobs", "1")
        parallel = run(capsys, "anchors", "@k4-unit", "--jobs", "3")
        assert serial == parallel

    def test_repeated_runs_identical(self, capsys):
        a = run(capsys, "extremals", "@g020-unit")
        b = run(capsys, "extremals", "@g020-unit")
        assert a == b


class TestParametricCommand:
    def test_candidates_loop(self, capsys):
        payload = run_json(capsys, "parametric", "@loop3")
        assert payload["candidates"] == 4
        for cand in payload["candidate_list"]:
            assert set(cand) == {"slopes", "config", "witness_metric"}

    def test_instantiation_matches_anchor_command(self, capsys):
        inst = run_json(capsys, "parametric", "@loop3", "--metric", '{"e": 3}')
        direct = run_json(capsys, "anchors", "@loop3")
        assert inst["instantiated"]["anchor_cells"] == direct["anchor_cells"]
        assert inst["instantiated"]["cells"] == direct["cells"]

    def test_cache_reuse(self, capsys, tmp_path):
        a = run(capsys, "parametric", "@loop3", "--cache", str(tmp_path))
        assert len(list(tmp_path.glob("parametric-*.json"))) == 1
        b = run(capsys, "parametric", "@loop3", "--cache", str(tmp_path))
        assert a == b

    def test_bad_metric_is_an_input_error(self, capsys):
        code, _, err = run(capsys, "parametric", "@loop3", "--metric", "not json")
        assert code == 1
        assert "error" in err


class TestCanonicalCommand:
    def test_fills_degree_two_g_minus_two(self, capsys):
        code, out, _ = run(capsys, "canonical", "@k4-unit")
        assert code == 0
        data = json.loads(out)
        graph, divisor = graph_from_json(data)
        assert divisor is not None
        assert divisor.degree() == 4
        assert divisor == canonical_divisor(graph)


class TestFailures:
    def test_unknown_builtin(self, capsys):
        code, _, err = run(capsys, "anchors", "@nope")
        assert code == 1
        assert "available" in err

    def test_unreadable_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "anchors", str(tmp_path / "missing.json"))
        assert code == 1

    def test_invalid_json_file(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{")
        code, _, err = run(capsys, "anchors", str(path))
        assert code == 1
        assert "not valid JSON" in err

    def test_non_effective_divisor(self, capsys, tmp_path):
        g, d = loop3()
        blob = graph_to_json(g, d)
        blob["divisor"]["vertices"]["v"] = -1
        path = tmp_path / "neg.json"
        path.write_text(json.dumps(blob))
        code, _, err = run(capsys, "anchors", str(path))
        assert code == 1
        assert "effective" in err

    def test_missing_divisor(self, capsys, tmp_path):
        g, d = loop3()
        blob = graph_to_json(g)
        path = tmp_path / "bare.json"
        path.write_text(json.dumps(blob))
        code, _, err = run(capsys, "anchors", str(path))
        assert code == 1
        assert "divisor" in err


class TestBundledData:
    def test_every_builtin_has_a_data_file(self):
        names = set(builtin_inputs())
        files = {p.stem for p in DATA_DIR.glob("*.json")}
        assert files == names

    def test_data_files_match_builtins(self):
        for name, (g, d) in builtin_inputs().items():
            blob = json.loads((DATA_DIR / f"{name}.json").read_text())
            assert blob == graph_to_json(g, d), name

    def test_data_files_load(self, capsys):
        for path in sorted(DATA_DIR.glob("*.json")):
            graph, divisor = graph_from_json(json.loads(path.read_text()))
            assert divisor is not None and divisor.is_effective()
