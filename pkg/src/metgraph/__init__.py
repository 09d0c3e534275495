"""Cell complexes of linear systems on metric graphs.

Given a metric graph and an effective divisor D, this package computes
the polyhedral cell complex carried by the linear system |D|: its
anchor cells, the full cell list, the f-vector, and the extremal
generators of the tropical semimodule R(D).  Arithmetic is exact
throughout; all counts are certified by construction rather than
floating-point approximation.
"""
from .anchor import (
    AnchorCell,
    Configuration,
    anchor_cells,
    build_constraints,
    cell_dimension,
    enumerate_configurations,
    representative_function,
)
from .cells import (
    CellDescriptor,
    FVector,
    all_cells,
    compositions,
    euler_characteristic,
    expand_anchor,
    f_vector,
)
from .errors import EulerViolation, InputError, InternalInvariantError
from .firing import (
    SupportComponent,
    can_fire,
    extremal_generators,
    fire,
    is_extremal,
    support_components,
)
from .graph import (
    Divisor,
    Edge,
    InteriorChip,
    MetricGraph,
    RationalFunction,
    add_divisors,
    canonical_divisor,
    components_after_interior_removal,
    refine_to_vertex_supported,
    tropical_max,
    tropical_shift,
)
from .jsonio import (
    anchor_cell_to_json,
    cell_descriptor_to_json,
    function_to_json,
    graph_from_json,
    graph_to_json,
)
from .parametric import ParametricCandidate, instantiate, parametric_candidates
from .rationals import Rat, rat, rat_str

__version__ = "0.1.0"

__all__ = [
    "AnchorCell",
    "CellDescriptor",
    "Configuration",
    "Divisor",
    "Edge",
    "EulerViolation",
    "FVector",
    "InputError",
    "InteriorChip",
    "InternalInvariantError",
    "MetricGraph",
    "ParametricCandidate",
    "Rat",
    "RationalFunction",
    "SupportComponent",
    "add_divisors",
    "all_cells",
    "anchor_cell_to_json",
    "anchor_cells",
    "build_constraints",
    "can_fire",
    "canonical_divisor",
    "cell_descriptor_to_json",
    "cell_dimension",
    "components_after_interior_removal",
    "compositions",
    "enumerate_configurations",
    "euler_characteristic",
    "expand_anchor",
    "extremal_generators",
    "f_vector",
    "fire",
    "function_to_json",
    "graph_from_json",
    "graph_to_json",
    "instantiate",
    "is_extremal",
    "parametric_candidates",
    "rat",
    "rat_str",
    "refine_to_vertex_supported",
    "representative_function",
    "support_components",
    "tropical_max",
    "tropical_shift",
]
