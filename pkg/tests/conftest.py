"""Shared fixtures.

The trivalent-family computations are expensive (K3,3 runs for minutes
per metric), so each row is computed once per session and shared by
every test that needs it.
"""
from __future__ import annotations

import pytest

from metgraph.anchor import anchor_cells
from metgraph.cells import f_vector
from metgraph.firing import extremal_generators
from metgraph.graph import canonical_divisor
from metgraph.library import (
    G020_METRICS,
    K4_METRICS,
    K33_MATRICES,
    g020,
    k4,
    k33,
    loop3,
)


def structure_counts(graph, divisor):
    """(anchor count, extremal count, f-vector, anchors, generators)."""
    anchors = anchor_cells(graph, divisor)
    fv = f_vector(anchors)
    gens = extremal_generators(graph, divisor, anchors=anchors)
    return len(anchors), len(gens), fv.counts, anchors, gens


@pytest.fixture(scope="session")
def loop_instance():
    g, d = loop3()
    return (g, d) + structure_counts(g, d)


@pytest.fixture(scope="session")
def k4_rows():
    rows = {}
    for metric in K4_METRICS:
        g = k4(metric)
        rows[metric] = (g,) + structure_counts(g, canonical_divisor(g))
    return rows


@pytest.fixture(scope="session")
def g020_rows():
    rows = {}
    for metric in G020_METRICS:
        g = g020(metric)
        rows[metric] = (g,) + structure_counts(g, canonical_divisor(g))
    return rows


@pytest.fixture(scope="session")
def k33_rows():
    rows = {}
    for matrix in K33_MATRICES:
        g = k33(matrix)
        rows[matrix] = (g,) + structure_counts(g, canonical_divisor(g))
    return rows
