"""Resonance statistics: box counts, binned spectral measures and scans.

Counting is done with the argument principle on rectilinear grids, so a
whole histogram costs little more than a single rectangle: every grid line is
integrated once and shared by its neighbouring cells.  Grid lines that pass
through a zero are shifted by a relative ``1e-6`` toward larger values
(outer lines move outward), which sends a zero lying exactly on a bin edge to
the lower bin.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ensembles import EnsembleSpec, HermitianPair, random_regular_graph
from .graph import QuantumGraph, remove_leads, strip_bound
from .secular import assemble
from .solver import Rectangle, count_grid, count_zeros, find_resonances

__all__ = [
    "BinnedMeasure",
    "ComparisonReport",
    "DeltaScan",
    "AuditReport",
    "bin_edges",
    "box_count",
    "empirical_measure",
    "compare_open_closed",
    "delta_scan",
    "hermitian_strip_count",
    "audit",
    "ensemble_comparison",
]


@dataclass(frozen=True)
class BinnedMeasure:
    """Histogram of resonance real parts, normalized by the total length.

    ``weights[k] * total_length`` is the number of resonances (with
    multiplicity) whose real part lies in bin ``k`` and whose imaginary part
    lies in ``[-cutoff, 0]``.
    """

    window: tuple
    bin_width: float
    weights: np.ndarray
    cutoff: float
    total_length: float
    edges: np.ndarray = field(repr=False, default=None)

    @property
    def counts(self) -> np.ndarray:
        return np.rint(self.weights * self.total_length).astype(int)

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict:
        return {
            "window": list(self.window),
            "bin_width": self.bin_width,
            "cutoff": self.cutoff,
            "total_length": self.total_length,
            "edges": [float(x) for x in self.edges],
            "counts": [int(c) for c in self.counts],
            "weights": [float(w) for w in self.weights],
        }


def bin_edges(window, bin_width: float) -> np.ndarray:
    """Edges ``a, a + w, ...`` up to ``b``; a short final bin is kept."""
    a, b = (float(x) for x in window)
    if not 0 < a < b:
        raise ValueError("window must satisfy 0 < a < b")
    if not bin_width > 0:
        raise ValueError("bin width must be positive")
    k = math.floor((b - a) / bin_width + 1e-9)
    edges = a + bin_width * np.arange(k + 1)
    if b - edges[-1] > 1e-9 * bin_width:
        edges = np.append(edges, b)
    else:
        edges[-1] = b
    return edges


def box_count(g: QuantumGraph, rect: Rectangle, allow_origin: bool = False) -> int:
    """Total multiplicity of resonances of ``g`` in ``rect``."""
    return count_zeros(assemble(g), rect, allow_origin=allow_origin).count


def _upper_margin(sys) -> float:
    # no zeros lie above the real axis; this keeps the top line well clear
    return min(0.5, 0.5 / sys.max_length)


def empirical_measure(g: QuantumGraph, window, bin_width: float, cutoff: float) -> BinnedMeasure:
    """Bin real parts of the resonances with ``Im z`` in ``[-cutoff, 0]``."""
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    edges = bin_edges(window, bin_width)
    sys = assemble(g)
    top = _upper_margin(sys)
    bottom = -top if g.is_closed else -float(cutoff)
    counts, _, _ = count_grid(sys, edges, [bottom, top])
    L = g.total_length
    return BinnedMeasure(
        (float(window[0]), float(window[1])), float(bin_width),
        counts[:, 0] / L, float(cutoff), L, edges,
    )


@dataclass(frozen=True)
class ComparisonReport:
    open: BinnedMeasure
    closed: BinnedMeasure
    distance: float
    shrunken_open_count: int
    shrunken_closed_count: int

    def as_dict(self) -> dict:
        return {
            "distance": self.distance,
            "open": self.open.as_dict(),
            "closed": self.closed.as_dict(),
            "raw_counts": {"open": self.open.total_count, "closed": self.closed.total_count},
            "shrunken_counts": {
                "epsilon": self.open.bin_width,
                "open": self.shrunken_open_count,
                "closed": self.shrunken_closed_count,
            },
        }


def compare_open_closed(g: QuantumGraph, window, bin_width: float = 0.5,
                        cutoff: float | None = None) -> ComparisonReport:
    """Binned open resonances against the closed spectrum of the same compact part.

    The distance is ``sum |w_open - w_closed| / sum w_closed``.  The open side
    keeps resonances with ``Im z >= -cutoff`` (default ``2 / L_min``); the
    closed spectrum is real and needs no cutoff.  Counts on the window shrunk
    by one bin width at each end are reported alongside the raw totals.
    """
    if cutoff is None:
        cutoff = 2.0 / float(g.lengths.min())
    closed_graph = remove_leads(g)
    closed = empirical_measure(closed_graph, window, bin_width, 0.0)
    opened = closed if g.is_closed else empirical_measure(g, window, bin_width, cutoff)
    denom = float(closed.weights.sum())
    diff = float(np.abs(opened.weights - closed.weights).sum())
    if denom > 0:
        distance = diff / denom
    else:
        distance = 0.0 if diff == 0 else math.inf
    return ComparisonReport(
        opened, closed, distance,
        int(opened.counts[1:-1].sum()), int(closed.counts[1:-1].sum()),
    )


@dataclass(frozen=True)
class DeltaScan:
    """Counts ``N(a1, a2, -a3, -delta)`` for decreasing ``delta``."""

    window: tuple
    deltas: tuple
    counts: tuple
    fitted_exponent: float
    fitted_constant: float
    fit_defined: bool
    lead_count: int
    deltas_used: tuple = ()

    def as_dict(self) -> dict:
        return {
            "window": list(self.window),
            "deltas": list(self.deltas),
            "deltas_used": list(self.deltas_used),
            "counts": list(self.counts),
            "fitted_exponent": self.fitted_exponent,
            "fitted_constant": self.fitted_constant,
            "fit_defined": self.fit_defined,
            "lead_count": self.lead_count,
        }


def delta_scan(g: QuantumGraph, a1: float, a2: float, a3: float, deltas) -> DeltaScan:
    """Resonance counts below ``-delta`` in ``[a1, a2] x [-a3, -delta]``.

    ``fitted_exponent`` is the unweighted least-squares slope of
    ``log count`` against ``log(1/delta)`` over points with count at least 3
    (undefined, and reported as 0, with fewer than two such points).
    ``fitted_constant`` is ``max count * delta^(5/2) / g`` with ``g`` the total
    number of leads (1 for a closed graph).
    """
    ds = sorted({float(d) for d in deltas}, reverse=True)
    if not ds or ds[-1] <= 0:
        raise ValueError("deltas must be positive")
    if not a3 > ds[0]:
        raise ValueError("need a3 > max(deltas)")
    sys = assemble(g)
    ys = [-float(a3)] + [-d for d in ds]
    cells, _, ys_used = count_grid(sys, [a1, a2], ys)
    counts = tuple(int(c) for c in np.cumsum(cells[0]))
    g_leads = max(sum(g.leads), 1)
    pts = [(math.log(1 / d), math.log(c)) for d, c in zip(ds, counts) if c >= 3]
    if len(pts) >= 2:
        x, y = np.array(pts).T
        exponent = float(np.polyfit(x, y, 1)[0])
        defined = True
    else:
        exponent, defined = 0.0, False
    constant = max(c * d**2.5 / g_leads for d, c in zip(ds, counts))
    return DeltaScan(
        (float(a1), float(a2), float(a3)), tuple(ds), counts, exponent, float(constant),
        defined, g_leads, tuple(-y for y in ys_used[1:]),
    )


def hermitian_strip_count(pair: HermitianPair, delta: float, window=(-1.0, 1.0)) -> int:
    """Eigenvalues of ``A + iB`` with ``a1 <= Re <= a2`` and ``Im <= -delta``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    a1, a2 = window
    ev = pair.eigenvalues
    return int(np.count_nonzero((ev.real >= a1) & (ev.real <= a2) & (ev.imag <= -delta)))


@dataclass(frozen=True)
class AuditReport:
    strip_bound: float | None
    resonances: tuple
    mirrored: tuple
    strip_violations: tuple
    mirror_violations: tuple
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.strip_violations and not self.mirror_violations

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "strip_bound": self.strip_bound,
            "resonance_count": sum(r.multiplicity for r in self.resonances),
            "mirrored_count": sum(r.multiplicity for r in self.mirrored),
            "strip_violations": [
                {"re": z.real, "im": z.imag, "excess": e} for z, e in self.strip_violations
            ],
            "mirror_violations": [
                {"re": z.real, "im": z.imag, "distance": d} for z, d in self.mirror_violations
            ],
            "notes": list(self.notes),
        }


def audit(g: QuantumGraph, rect: Rectangle, tol: float = 1e-10, strip_slack: float = 1e-9,
          mirror_tol: float = 1e-6, allow_origin: bool = False) -> AuditReport:
    """Check every resonance in ``rect`` against the strip bound and the mirror image.

    The mirror image of ``z`` is ``-conj(z)``; it must be found, independently,
    among the resonances in ``rect.mirrored()`` within ``mirror_tol``.
    """
    sys = assemble(g)
    notes = []
    try:
        K = strip_bound(g)
    except ValueError:
        K = None
        notes.append("balanced vertex: strip bound undefined, strip check skipped")
    found = tuple(find_resonances(sys, rect, tol, allow_origin=allow_origin))
    mirror = tuple(find_resonances(sys, rect.mirrored(), tol, allow_origin=allow_origin))
    strip_bad = []
    if K is not None:
        for r in found:
            if r.z.imag < -K - strip_slack:
                strip_bad.append((r.z, float(-K - r.z.imag)))
    mirror_pts = np.array([r.z for r in mirror], dtype=complex)
    mirror_bad = []
    for r in found:
        target = -r.z.conjugate()
        dist = float(np.min(np.abs(mirror_pts - target))) if len(mirror_pts) else math.inf
        if dist > mirror_tol:
            mirror_bad.append((r.z, dist))
    return AuditReport(K, found, mirror, tuple(strip_bad), tuple(mirror_bad), tuple(notes))


def ensemble_comparison(base: EnsembleSpec, n_list, window, bin_width: float = 0.5,
                        cutoff: float | None = None, threads: int | None = None) -> list:
    """`compare_open_closed` for one member of each size in ``n_list``.

    Members differ from ``base`` only in their vertex count; they run
    concurrently and results are returned in the order of ``n_list``.
    """
    specs = [EnsembleSpec(int(n), base.degree, base.length_range, base.lead_count, base.seed)
             for n in n_list]

    def run(spec):
        return compare_open_closed(random_regular_graph(spec), window, bin_width, cutoff)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, specs))
