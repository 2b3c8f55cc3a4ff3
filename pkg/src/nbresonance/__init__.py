"""Resonances of non-backtracking transfer operators on finite regular graphs,
the pairing formula between resonant and coresonant states, and the
truncated universal cover used to check the boundary-measure picture."""

from .errors import *  # noqa: F401,F403
from .graph_core import (
    RegularGraph,
    build_from_undirected_edges,
    format_edge_list,
    generate_named,
    generate_random_regular,
    parse_edge_list,
    parse_named_spec,
    read_edge_list,
    write_edge_list,
)
from .pairing_formula import (
    TheoremReport,
    b_integral_closed_form,
    b_integral_limit,
    c_function,
    ic_gamma,
    ir_gamma,
    verify_resonance,
    verify_theorem,
)
from .pairings import (
    edge_pairing,
    edge_pushforward,
    geodesic_pairing,
    geodesic_pairing_direct,
    geodesic_pairing_formula,
    modified_edge_pairing,
    p2_pairing,
    vertex_pairing,
    vertex_pushforward,
)
from .shift_space import (
    Cylinder,
    CylinderFunction,
    ResonantState,
    apply_transfer,
    check_resonant,
    evaluate,
)
from .spectra import (
    NonBacktrackingMatrix,
    SpectrumEntry,
    bass_check,
    bass_spectrum,
    eigensolve,
    eigenspace,
    hashimoto,
    resonances,
)
from .tree_cover import (
    BoundaryCylinder,
    FiniteBoundaryMeasure,
    TruncatedCover,
    deck_transform,
    edge_poisson_transform,
    horocycle_bracket,
    lift_state,
    measure_from_state,
    poisson_kernel,
    poisson_transform,
    root_automorphism,
    unfold,
    unique_path,
)

__version__ = "0.1.0"
