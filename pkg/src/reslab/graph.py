"""Quantum-graph data model, bond indexing and hypothesis checks.

A quantum graph is a finite multigraph whose edges carry positive lengths,
together with a lead count ``n(v)`` (number of semi-infinite edges) at each
vertex.  Loops contribute 2 to the internal degree and two bonds; parallel
edges are distinguished by their position in the edge list.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "GraphFormatError",
    "QuantumGraph",
    "BondTable",
    "ValidationReport",
    "parse_graph",
    "load_graph",
    "dump_graph",
    "build_bonds",
    "validate",
    "remove_leads",
    "strip_bound",
]


class GraphFormatError(ValueError):
    """Malformed graph document or a graph violating the model invariants."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class QuantumGraph:
    """Compact part of an open quantum graph plus its lead counts.

    Parameters
    ----------
    vertex_count : int
        Number of vertices, indexed ``0 .. vertex_count - 1``.
    edges : tuple of (u, v, length)
        Internal edges in input order.  ``u == v`` is a loop.
    leads : tuple of int
        ``leads[v]`` is the number of leads attached to vertex ``v``.
    """

    vertex_count: int
    edges: tuple
    leads: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "edges", tuple((int(u), int(v), float(L)) for u, v, L in self.edges)
        )
        object.__setattr__(self, "leads", tuple(int(n) for n in self.leads))
        _check_invariants(self)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([L for _, _, L in self.edges], dtype=float)

    def degrees(self) -> np.ndarray:
        """Internal degree d(v); a loop counts twice."""
        d = np.zeros(self.vertex_count, dtype=int)
        for u, v, _ in self.edges:
            d[u] += 1
            d[v] += 1
        return d

    @property
    def total_length(self) -> float:
        # input order, plain summation
        total = 0.0
        for _, _, L in self.edges:
            total += L
        return total

    @property
    def is_closed(self) -> bool:
        return not any(self.leads)

    @property
    def lead_vertex_count(self) -> int:
        return sum(1 for n in self.leads if n > 0)


def _check_invariants(g: QuantumGraph) -> None:
    if g.vertex_count < 0:
        raise GraphFormatError("vertex count must be nonnegative", "vertices")
    if len(g.leads) != g.vertex_count:
        raise GraphFormatError(
            f"expected {g.vertex_count} lead counts, got {len(g.leads)}", "leads"
        )
    for k, n in enumerate(g.leads):
        if n < 0:
            raise GraphFormatError("negative lead count", f"leads[{k}]")
    degree = [0] * g.vertex_count
    for k, (u, v, L) in enumerate(g.edges):
        for name, w in (("u", u), ("v", v)):
            if not 0 <= w < g.vertex_count:
                raise GraphFormatError(
                    f"endpoint {w} out of range [0, {g.vertex_count})", f"edges[{k}].{name}"
                )
        if not math.isfinite(L):
            raise GraphFormatError("non-finite length", f"edges[{k}].length")
        if L <= 0.0:
            raise GraphFormatError("non-positive length", f"edges[{k}].length")
        degree[u] += 1
        degree[v] += 1
    for w, dw in enumerate(degree):
        if dw == 0:
            raise GraphFormatError("vertex has no internal edge (degree 0)", f"vertex {w}")


def parse_graph(text: str) -> QuantumGraph:
    """Parse a JSON graph document.

    The document has the form
    ``{"vertices": int, "edges": [{"u": int, "v": int, "length": float}, ...],
    "leads": [int, ...]}``; ``leads`` may be omitted (all zeros).

    Raises
    ------
    GraphFormatError
        With the offending location for malformed JSON, wrong types, negative or
        zero lengths, NaN/Inf lengths, out-of-range endpoints, or a vertex of
        internal degree 0.
    """
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    except ValueError as exc:
        raise GraphFormatError(str(exc), "document") from None
    if not isinstance(doc, dict):
        raise GraphFormatError("top level must be an object", "document")

    nv = doc.get("vertices")
    if not _is_int(nv) or nv < 0:
        raise GraphFormatError("'vertices' must be a nonnegative integer", "vertices")
    raw_edges = doc.get("edges")
    if not isinstance(raw_edges, list):
        raise GraphFormatError("'edges' must be a list", "edges")

    edges = []
    for k, e in enumerate(raw_edges):
        if not isinstance(e, dict):
            raise GraphFormatError("edge must be an object", f"edges[{k}]")
        for key in ("u", "v"):
            if not _is_int(e.get(key)):
                raise GraphFormatError("endpoint must be an integer", f"edges[{k}].{key}")
        L = e.get("length")
        if isinstance(L, bool) or not isinstance(L, (int, float)):
            raise GraphFormatError("length must be a number", f"edges[{k}].length")
        edges.append((e["u"], e["v"], float(L)))

    leads = doc.get("leads")
    if leads is None:
        leads = [0] * nv
    elif not isinstance(leads, list) or not all(_is_int(n) for n in leads):
        raise GraphFormatError("'leads' must be a list of integers", "leads")
    return QuantumGraph(nv, tuple(edges), tuple(leads))


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} not allowed")


def load_graph(path) -> QuantumGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def dump_graph(g: QuantumGraph) -> str:
    """Serialize to the JSON graph format (round-trips through `parse_graph`)."""
    doc = {
        "vertices": g.vertex_count,
        "edges": [{"u": u, "v": v, "length": L} for u, v, L in g.edges],
        "leads": list(g.leads),
    }
    return json.dumps(doc)


@dataclass(frozen=True)
class BondTable:
    """Oriented copies of the internal edges.

    Edge ``k`` yields bond ``2k`` (u -> v) and bond ``2k + 1`` (v -> u).
    """

    origin: np.ndarray
    terminus: np.ndarray
    reverse: np.ndarray
    edge_of: np.ndarray
    length_of: np.ndarray

    @property
    def bond_count(self) -> int:
        return len(self.origin)

    def bonds_at(self, v: int) -> np.ndarray:
        """Bonds with origin ``v`` in bond order."""
        return np.flatnonzero(self.origin == v)


def build_bonds(g: QuantumGraph) -> BondTable:
    m = g.edge_count
    origin = np.empty(2 * m, dtype=int)
    terminus = np.empty(2 * m, dtype=int)
    lengths = np.empty(2 * m, dtype=float)
    for k, (u, v, L) in enumerate(g.edges):
        origin[2 * k], terminus[2 * k] = u, v
        origin[2 * k + 1], terminus[2 * k + 1] = v, u
        lengths[2 * k] = lengths[2 * k + 1] = L
    reverse = np.arange(2 * m) ^ 1
    edge_of = np.arange(2 * m) // 2
    for arr in (origin, terminus, reverse, edge_of, lengths):
        arr.flags.writeable = False
    return BondTable(origin, terminus, reverse, edge_of, lengths)


@dataclass(frozen=True)
class ValidationReport:
    """Observed bounds and hypothesis flags for one graph.

    ``satisfies_bounds`` is only meaningful when limits were supplied to
    `validate`; otherwise it is True and the observed witnesses are reported.
    """

    satisfies_bounds: bool
    max_degree: int
    max_leads: int
    min_length: float
    max_length: float
    unbalanced: bool
    balanced_vertices: tuple
    lead_vertex_count: int
    total_length: float
    bound_violations: tuple = field(default=())

    def as_dict(self) -> dict:
        return {
            "satisfies_bounds": self.satisfies_bounds,
            "max_degree": self.max_degree,
            "max_leads": self.max_leads,
            "min_length": self.min_length,
            "max_length": self.max_length,
            "unbalanced": self.unbalanced,
            "balanced_vertices": list(self.balanced_vertices),
            "lead_vertex_count": self.lead_vertex_count,
            "total_length": self.total_length,
            "bound_violations": list(self.bound_violations),
        }


def validate(g: QuantumGraph, limits: Sequence[float] | None = None) -> ValidationReport:
    """Check the degree/length/lead bounds and the no-balanced-vertex condition.

    Parameters
    ----------
    g : QuantumGraph
    limits : (D, n0, L_min, L_max), optional
        Declared bounds; violations are listed in ``bound_violations``.
    """
    d = g.degrees()
    n = np.asarray(g.leads, dtype=int)
    lengths = g.lengths
    D = int(d.max()) if d.size else 0
    n0 = int(n.max()) if n.size else 0
    Lmin = float(lengths.min()) if lengths.size else math.nan
    Lmax = float(lengths.max()) if lengths.size else math.nan
    balanced = tuple(int(v) for v in np.flatnonzero(d == n))

    violations = []
    if limits is not None:
        Dlim, n0lim, Lmin_lim, Lmax_lim = limits
        if D > Dlim:
            violations.append(f"degree {D} > D={Dlim}")
        if n0 > n0lim:
            violations.append(f"lead count {n0} > n0={n0lim}")
        if Lmin < Lmin_lim:
            violations.append(f"length {Lmin} < L_min={Lmin_lim}")
        if Lmax > Lmax_lim:
            violations.append(f"length {Lmax} > L_max={Lmax_lim}")

    return ValidationReport(
        satisfies_bounds=not violations,
        max_degree=D,
        max_leads=n0,
        min_length=Lmin,
        max_length=Lmax,
        unbalanced=not balanced,
        balanced_vertices=balanced,
        lead_vertex_count=g.lead_vertex_count,
        total_length=g.total_length,
        bound_violations=tuple(violations),
    )


def remove_leads(g: QuantumGraph) -> QuantumGraph:
    """The closed graph with the same compact part."""
    if g.is_closed:
        return g
    return QuantumGraph(g.vertex_count, g.edges, (0,) * g.vertex_count)


def strip_bound(g: QuantumGraph) -> float:
    """Depth K such that every resonance satisfies -K <= Im z <= 0.

    ``K = max_v [ln(n(v) + d(v)) - ln|d(v) - n(v)|] / L_min``.

    Raises
    ------
    ValueError
        If some vertex is balanced (``n(v) == d(v)``).
    """
    d = g.degrees()
    n = np.asarray(g.leads, dtype=int)
    if np.any(d == n):
        raise ValueError("strip bound undefined (balanced vertex)")
    per_vertex = np.log(n + d) - np.log(np.abs(d - n))
    return float(per_vertex.max()) / float(g.lengths.min())
