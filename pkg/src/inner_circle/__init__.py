"""Ergodicity and mixing diagnostics for non-autonomous circle dynamics.

The package studies compositions G_n = g_n o ... o g_1 of finite Blaschke
products fixing the origin.  All ergodicity criteria are functions of the
derivative products P_n = G_n'(0), kept in a log-space ledger; the boundary
lab cross-checks the derivative calculus against Monte Carlo simulation of
the induced dynamics on the unit circle.
"""

__version__ = "0.1.0"

from .disk_algebra import Arc, InnerMap, boundary_eval, eval_map, harmonic_measure_arc
from .sequence_engine import (
    DerivativeLedger,
    FamilySpec,
    InnerSequence,
    build_ledger,
    contracting_heuristic,
    make_sequence,
    orbit,
)
from .criteria import (
    CriterionParams,
    CriterionReport,
    classify,
    density_count,
    ergodic_double_sum,
    necessary_sum,
    sufficient_sum,
    tail_product,
    weyl_sum,
    window_product,
)
from . import catalog  # noqa: F401  (registers the family builders)

__all__ = [
    "Arc",
    "InnerMap",
    "boundary_eval",
    "eval_map",
    "harmonic_measure_arc",
    "DerivativeLedger",
    "FamilySpec",
    "InnerSequence",
    "build_ledger",
    "contracting_heuristic",
    "make_sequence",
    "orbit",
    "CriterionParams",
    "CriterionReport",
    "classify",
    "density_count",
    "ergodic_double_sum",
    "necessary_sum",
    "sufficient_sum",
    "tail_product",
    "weyl_sum",
    "window_product",
    "catalog",
]
