"""Scattering resonances of open quantum graphs.

The resonances of a compact metric graph with Kirchhoff vertex conditions and
semi-infinite leads are the zeros of ``det(Id - U(z))``, where ``U(z)`` is
the bond scattering matrix.  This package assembles ``U``, counts and locates
the zeros with the argument principle, and provides random ensembles and
statistics for comparing open and closed graphs.
"""

__version__ = "0.1.0"

from .graph import (  # noqa: E402
    GraphFormatError,
    QuantumGraph,
    dump_graph,
    load_graph,
    parse_graph,
    remove_leads,
    strip_bound,
    validate,
)
from .secular import SecularSystem, assemble, secular_value  # noqa: E402
from .solver import (  # noqa: E402
    Rectangle,
    Resonance,
    closed_spectrum,
    count_zeros,
    eigenphase_crossing_count,
    find_resonances,
)

__all__ = [
    "GraphFormatError",
    "QuantumGraph",
    "dump_graph",
    "load_graph",
    "parse_graph",
    "remove_leads",
    "strip_bound",
    "validate",
    "SecularSystem",
    "assemble",
    "secular_value",
    "Rectangle",
    "Resonance",
    "closed_spectrum",
    "count_zeros",
    "eigenphase_crossing_count",
    "find_resonances",
]
