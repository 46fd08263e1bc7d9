"""Workbench for the numbers game on edge-weighted (E-GCM) graphs.

Subpackages: ``graph`` (boards and validation), ``engine`` (firing, traces,
strategies), ``matrices`` (closed-form reflection-word matrices),
``divergence`` (condition-(*) machinery and non-admissibility certificates),
``cli`` (command line), ``service`` (HTTP play API).
"""

from .graph import (
    EGCMGraph,
    TriangleLabels,
    amplitude_product_for_m,
    canonicalize_triangle,
    load_graph,
    make_cyclic3,
    recover_m,
    save_graph,
    validate,
)
from .engine import (
    EPS_LEGAL,
    FiringEvent,
    GameTrace,
    Outcome,
    apply_sequence,
    fire,
    legal_moves,
    play,
)
from .divergence import (
    ConditionStarStatus,
    DivergenceCertificate,
    alternating_sequence,
    alternation_image,
    condition_star,
    divergence_certificate,
    inequalities,
    kappas,
    macro_cycle,
)

__version__ = "0.1.0"
