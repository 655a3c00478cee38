"""Random quantum-graph ensembles, canonical fixtures and the Hermitian example.

Randomness comes from counter-based Philox streams keyed by ``(seed,
purpose)``: topology, lengths and lead placement draw from independent
streams, so changing the number of leads leaves the edge lengths untouched.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .graph import QuantumGraph

__all__ = [
    "EnsembleSpec",
    "HermitianPair",
    "stream",
    "random_regular_graph",
    "fixture",
    "FIXTURES",
    "hermitian_pair",
    "member_seed",
    "manifest",
]

_PURPOSES = {"topology": 1, "lengths": 2, "leads": 3, "hermitian": 4, "damping": 5}


def stream(seed: int, purpose: str) -> np.random.Generator:
    """Independent Philox generator for one purpose of one seed."""
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, _PURPOSES[purpose]])
    return np.random.Generator(np.random.Philox(key))


def member_seed(seed: int, index: int) -> int:
    """Seed of ensemble member ``index``."""
    return (int(seed) ^ int(index)) & 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class EnsembleSpec:
    n_vertices: int
    degree: int
    length_range: tuple
    lead_count: int
    seed: int

    def __post_init__(self):
        lo, hi = self.length_range
        object.__setattr__(self, "length_range", (float(lo), float(hi)))
        if self.degree < 3:
            raise ValueError("regular degree must be at least 3")
        if (self.degree * self.n_vertices) % 2:
            raise ValueError("degree * n_vertices must be even")
        if not 0 < lo <= hi:
            raise ValueError("need 0 < L_min <= L_max")
        if not 0 <= self.lead_count <= self.n_vertices:
            raise ValueError("lead count must lie in [0, n_vertices]")

    def limits(self):
        """Declared (D, n0, L_min, L_max) bounds."""
        return (self.degree, 1, *self.length_range)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["length_range"] = list(self.length_range)
        return d


def random_regular_graph(spec: EnsembleSpec) -> QuantumGraph:
    """Pairing-model d-regular multigraph with uniform lengths and single leads.

    Loops and parallel edges are kept.  ``lead_count`` distinct vertices get
    exactly one lead each.
    """
    n, d = spec.n_vertices, spec.degree
    stubs = np.repeat(np.arange(n), d)
    stubs = stream(spec.seed, "topology").permutation(stubs)
    pairs = stubs.reshape(-1, 2)
    lo, hi = spec.length_range
    lengths = stream(spec.seed, "lengths").uniform(lo, hi, size=len(pairs))
    leads = np.zeros(n, dtype=int)
    if spec.lead_count:
        chosen = stream(spec.seed, "leads").choice(n, size=spec.lead_count, replace=False)
        leads[chosen] = 1
    edges = tuple((int(u), int(v), float(L)) for (u, v), L in zip(pairs, lengths))
    return QuantumGraph(n, edges, tuple(int(x) for x in leads))


def _interval(L=1.0):
    return QuantumGraph(2, ((0, 1, float(L)),), (0, 0))


def _neumann_path(n, L=1.0):
    return QuantumGraph(n + 1, tuple((k, k + 1, float(L)) for k in range(n)), (0,) * (n + 1))


def _balanced_path(n, L=1.0):
    leads = [0] * (n + 1)
    leads[0] = leads[n] = 1
    return QuantumGraph(n + 1, tuple((k, k + 1, float(L)) for k in range(n)), tuple(leads))


def _commensurate_cycle(k, leads=1):
    if k < 1:
        raise ValueError("cycle needs at least one vertex")
    if not 0 <= leads <= k:
        raise ValueError("at most one lead per cycle vertex")
    edges = tuple((j, (j + 1) % k, 1.0) for j in range(k))
    return QuantumGraph(k, edges, tuple(1 if j < leads else 0 for j in range(k)))


def _triangle_lead():
    return _commensurate_cycle(3, 1)


FIXTURES = {
    "interval": _interval,
    "neumann_path": _neumann_path,
    "balanced_path": _balanced_path,
    "commensurate_cycle": _commensurate_cycle,
    "triangle_lead": _triangle_lead,
}


def fixture(name: str, *args) -> QuantumGraph:
    """Canonical small graphs.

    ``interval(L)``, ``neumann_path(n, L)``, ``balanced_path(n, L)`` (leads at
    both ends), ``commensurate_cycle(k, leads)`` (unit lengths, leads on the
    first ``leads`` vertices) and ``triangle_lead`` (= ``commensurate_cycle(3, 1)``).
    """
    try:
        build = FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    return build(*args)


@dataclass(frozen=True, eq=False)
class HermitianPair:
    """``A`` Hermitian, ``B = -s diag(mask)`` and the spectrum of ``A + iB``."""

    A: np.ndarray
    B: np.ndarray
    eigenvalues: np.ndarray
    damp_count: int
    damp_scale: float
    seed: int

    @property
    def damping_trace_norm(self) -> float:
        return self.damp_scale * self.damp_count

    @property
    def bound(self) -> float:
        return max(float(np.linalg.norm(self.A, 2)), float(np.linalg.norm(self.B, 2)))


def hermitian_pair(n: int, damp_count: int, damp_scale: float, seed: int) -> HermitianPair:
    """Random Hermitian ``A`` (``||A|| = 1``) with ``damp_count`` damped coordinates.

    The same seed gives the same ``A`` for every ``damp_count``; damped
    coordinates are a prefix of a seeded permutation, so they are nested as
    ``damp_count`` grows.
    """
    if not 0 <= damp_count <= n:
        raise ValueError("need 0 <= damp_count <= n")
    if damp_scale <= 0:
        raise ValueError("damp_scale must be positive")
    rng = stream(seed, "hermitian")
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    A = (G + G.conj().T) / 2
    A /= np.linalg.norm(A, 2)
    damped = stream(seed, "damping").permutation(n)[:damp_count]
    diag = np.zeros(n)
    diag[damped] = 1.0
    B = -damp_scale * np.diag(diag)
    eig = np.linalg.eigvals(A + 1j * B)
    return HermitianPair(A, B, eig, damp_count, float(damp_scale), int(seed))


def manifest(spec: EnsembleSpec, n_list=None, members: int = 1) -> str:
    """JSON document recording an ensemble spec and the derived member seeds."""
    sizes = list(n_list) if n_list is not None else [spec.n_vertices]
    doc = {
        "spec": spec.as_dict(),
        "sizes": sizes,
        "members": [member_seed(spec.seed, k) for k in range(members)],
        "generator": "Philox/SeedSequence([seed, purpose])",
    }
    return json.dumps(doc, sort_keys=True)
