"""Bond scattering matrix and the secular determinant det(Id - U(z)).

With Kirchhoff conditions the vertex scattering matrix at a vertex of degree
``d`` carrying ``n`` leads is ``-Id + 2/(n + d) J``.  The global matrix
``S[b, b'] = sigma[b, reverse(b')]`` (nonzero only when ``origin(b) ==
terminus(b')``) is independent of ``z`` and ``U(z) = S diag(exp(i z L_b))``.
Nonzero resonances are the zeros of ``det(Id - U(z))`` with matching
multiplicity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph import BondTable, QuantumGraph, build_bonds

__all__ = [
    "SecularSystem",
    "SecularValue",
    "vertex_sigma",
    "assemble",
    "evaluate_U",
    "evaluate_U_derivative",
    "secular_value",
    "smallest_singular_value",
    "trace_norm",
    "hypothesis_diagnostics",
]

# below this side, smallest singular values come from a full SVD
SVD_CUTOFF = 256


def vertex_sigma(d: int, n: int) -> np.ndarray:
    """Kirchhoff vertex scattering matrix ``-Id + 2/(n+d) J`` of side ``d``."""
    if d < 1 or n < 0:
        raise ValueError("need d >= 1 and n >= 0")
    return np.full((d, d), 2.0 / (n + d)) - np.eye(d)


@dataclass(frozen=True, eq=False)
class SecularSystem:
    """``S``, bond lengths, and the edge/vertex data of the source graph.

    The edge arrays feed a reduced evaluation of the determinant.  Writing
    ``S = Sigma J`` with ``Sigma = -Id + B Lambda B^T`` (``B`` the bond-origin
    incidence, ``Lambda = diag(2/(n+d))``) and ``J`` the bond reversal, the
    determinant lemma gives

        det(Id - U(z)) = prod_e (1 - e_e^2) * det(Id_V - K(z)),  e_e = exp(i z L_e),

    where ``K = Lambda B^T (JD)(Id + JD)^-1 B`` is ``|V| x |V|`` with entries
    built from ``a_e = e/(1 - e^2)`` (between the two ends of an edge) and
    ``c_e = -e^2/(1 - e^2)`` (at each end).  Near the real poles
    ``e_e^2 = 1`` the bond matrix is used instead.
    """

    bonds: BondTable
    S: np.ndarray
    lengths: np.ndarray
    closed: bool
    lead_vertex_count: int = 0
    edge_u: np.ndarray | None = None
    edge_v: np.ndarray | None = None
    edge_lengths: np.ndarray | None = None
    vertex_weight: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.S.shape[0]

    @property
    def vertex_count(self) -> int:
        return 0 if self.vertex_weight is None else len(self.vertex_weight)

    @property
    def min_length(self) -> float:
        return float(self.lengths.min())

    @property
    def max_length(self) -> float:
        return float(self.lengths.max())

    def U(self, z) -> np.ndarray:
        return evaluate_U(self, z)

    def dU(self, z) -> np.ndarray:
        return evaluate_U_derivative(self, z)

    # --- batched kernels used by the contour machinery -----------------

    def _identity_minus_U(self, zs: np.ndarray) -> np.ndarray:
        phases = np.exp(1j * zs[:, None] * self.lengths[None, :])
        A = -self.S[None, :, :] * phases[:, None, :]
        idx = np.arange(self.size)
        A[:, idx, idx] += 1.0
        return A

    def _use_reduced(self, zs):
        """Mask of points where the vertex reduction is numerically safe."""
        if self.vertex_weight is None or self.vertex_count >= self.size:
            return np.zeros(len(zs), dtype=bool)
        e2 = np.exp(2j * zs[:, None] * self.edge_lengths[None, :])
        return np.min(np.abs(1.0 - e2), axis=1) > 1e-5

    def _reduced(self, zs):
        nv = self.vertex_count
        p, q, Le = self.edge_u, self.edge_v, self.edge_lengths
        e = np.exp(1j * zs[:, None] * Le[None, :])
        one_minus = 1.0 - e * e
        a = e / one_minus
        c = -(e * e) / one_minus
        k = len(zs)
        flat = np.concatenate([p * nv + p, q * nv + q, p * nv + q, q * nv + p])
        offsets = (np.arange(k) * nv * nv)[:, None]
        index = (flat[None, :] + offsets).ravel()
        vals = np.concatenate([c, c, a, a], axis=1).ravel()
        K = (np.bincount(index, weights=vals.real, minlength=k * nv * nv)
             + 1j * np.bincount(index, weights=vals.imag, minlength=k * nv * nv))
        K = K.reshape(k, nv, nv) * self.vertex_weight[None, :, None]
        A = -K
        idx = np.arange(nv)
        A[:, idx, idx] += 1.0
        return A, e, one_minus, a, c

    def log_det(self, zs) -> np.ndarray:
        """``log det(Id - U(z))`` with the principal argument (``-inf`` at exact zeros)."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        out = np.empty(len(zs), dtype=complex)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            red = self._use_reduced(zs)
            if red.any():
                A, _, one_minus, _, _ = self._reduced(zs[red])
                sign, logabs = np.linalg.slogdet(A)
                edge = np.log(one_minus).sum(axis=1)
                val = logabs + edge.real + 1j * (np.angle(sign) + edge.imag)
                out[red] = val.real + 1j * np.remainder(val.imag + np.pi, 2 * np.pi) - 1j * np.pi
            if (~red).any():
                sign, logabs = np.linalg.slogdet(self._identity_minus_U(zs[~red]))
                out[~red] = logabs + 1j * np.angle(sign)
        return out

    def log_derivative(self, zs):
        """``d/dz log det(Id - U(z))`` and a singularity gauge per point.

        On the bond matrix this is ``-tr[(Id-U)^-1 U'] = -sum_b i L_b
        ([(Id-U)^-1]_bb - 1)`` since ``U'(z) = U(z) diag(i L)``; the reduced
        form differentiates ``prod_e (1 - e_e^2) det(Id - K)``.  Returns
        ``(values, inv_fro)`` where ``inv_fro`` is the Frobenius norm of the
        inverse of the matrix actually factored (``inf`` when singular);
        ``sqrt(side)/inv_fro`` bounds its smallest singular value from above.
        """
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        values = np.empty(len(zs), dtype=complex)
        fro = np.empty(len(zs))
        # far below the axis the exponentials overflow; such points come back as NaN
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            red = self._use_reduced(zs)
            if red.any():
                values[red], fro[red] = self._reduced_log_derivative(zs[red])
            if (~red).any():
                values[~red], fro[~red] = self._bond_log_derivative(zs[~red])
        bad = ~np.isfinite(values) | ~np.isfinite(fro)
        values[bad] = np.nan
        fro[bad] = np.inf
        return values, fro

    def _bond_log_derivative(self, zs):
        A = self._identity_minus_U(zs)
        inv = _batched_inverse(A)
        if inv is None:
            return self._pointwise(self._bond_log_derivative, zs)
        diag = np.diagonal(inv, axis1=1, axis2=2)
        values = -1j * ((diag - 1.0) @ self.lengths)
        return values, _frobenius(inv)

    def _reduced_log_derivative(self, zs):
        A, e, one_minus, a, c = self._reduced(zs)
        inv = _batched_inverse(A)
        if inv is None:
            return self._pointwise(self._reduced_log_derivative, zs)
        p, q, Le = self.edge_u, self.edge_v, self.edge_lengths
        e2 = e * e
        iL = 1j * Le[None, :]
        da = iL * e * (1.0 + e2) / one_minus**2
        dc = -2.0 * iL * e2 / one_minus**2
        w = self.vertex_weight
        # tr[R K'] with R = (Id - K)^-1 and K' = Lambda dK
        Rpp = inv[:, p, p] * w[p]
        Rqq = inv[:, q, q] * w[q]
        Rqp = inv[:, q, p] * w[p]
        Rpq = inv[:, p, q] * w[q]
        trace = np.sum(dc * (Rpp + Rqq) + da * (Rqp + Rpq), axis=1)
        edge_part = np.sum(-2.0 * iL * e2 / one_minus, axis=1)
        return edge_part - trace, _frobenius(inv)

    @staticmethod
    def _pointwise(kernel, zs):
        if len(zs) == 1:
            return np.array([complex(np.nan, np.nan)]), np.array([np.inf])
        parts = [kernel(zs[k : k + 1]) for k in range(len(zs))]
        return (np.concatenate([v for v, _ in parts]), np.concatenate([f for _, f in parts]))


def _batched_inverse(A):
    try:
        return np.linalg.inv(A)
    except np.linalg.LinAlgError:
        return None


def _frobenius(inv):
    return np.sqrt(np.einsum("kij,kij->k", inv.real, inv.real)
                   + np.einsum("kij,kij->k", inv.imag, inv.imag))


def assemble(g: QuantumGraph) -> SecularSystem:
    """Build ``S`` and the bond lengths for ``g``."""
    bonds = build_bonds(g)
    nb = bonds.bond_count
    S = np.zeros((nb, nb))
    degrees = g.degrees()
    for v in range(g.vertex_count):
        out = bonds.bonds_at(v)
        sigma = vertex_sigma(int(degrees[v]), g.leads[v])
        # S[b, b'] = sigma[b, reverse(b')] with origin(b) = origin(reverse(b')) = v
        incoming = bonds.reverse[out]
        S[np.ix_(out, incoming)] = sigma
    S.flags.writeable = False
    lengths = bonds.length_of.copy()
    lengths.flags.writeable = False
    edge_u = np.array([u for u, _, _ in g.edges], dtype=int)
    edge_v = np.array([v for _, v, _ in g.edges], dtype=int)
    weight = 2.0 / (np.asarray(g.leads, dtype=float) + degrees)
    for arr in (edge_u, edge_v, weight):
        arr.flags.writeable = False
    return SecularSystem(bonds, S, lengths, g.is_closed, g.lead_vertex_count,
                         edge_u, edge_v, g.lengths, weight)


def evaluate_U(sys: SecularSystem, z) -> np.ndarray:
    """``U(z) = S diag(exp(i z L_b))``."""
    return sys.S * np.exp(1j * complex(z) * sys.lengths)[None, :]


def evaluate_U_derivative(sys: SecularSystem, z) -> np.ndarray:
    """``U'(z) = S diag(i L_b exp(i z L_b))``."""
    return sys.S * (1j * sys.lengths * np.exp(1j * complex(z) * sys.lengths))[None, :]


@dataclass(frozen=True)
class SecularValue:
    """Secular determinant data at one point.

    ``log_derivative`` is NaN and ``valid`` False when ``Id - U(z)`` is
    numerically singular (``smallest_singular < 1e-13 * size``).
    """

    z: complex
    det: complex
    log_det: complex
    log_derivative: complex
    smallest_singular: float
    valid: bool


def smallest_singular_value(A: np.ndarray, lu=None, iterations: int = 4) -> float:
    """Smallest singular value; full SVD for small sides, inverse iteration above."""
    n = A.shape[0]
    if n == 0:
        return math.inf
    if n < SVD_CUTOFF:
        return float(np.linalg.svd(A, compute_uv=False)[-1])
    if lu is None:
        lu = scipy.linalg.lu_factor(A, check_finite=False)
    if np.any(np.diagonal(lu[0]) == 0):
        return 0.0
    x = np.random.default_rng(0).standard_normal(n) + 0j
    x /= np.linalg.norm(x)
    sigma = math.inf
    for _ in range(iterations):
        # x <- (A^H A)^-1 x
        y = scipy.linalg.lu_solve(lu, x, check_finite=False)
        w = scipy.linalg.lu_solve(lu, y, trans=2, check_finite=False)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            return 0.0
        sigma = 1.0 / math.sqrt(nw)
        x = w / nw
    # Rayleigh refinement: ||A^-1 x|| for the converged direction
    y = scipy.linalg.lu_solve(lu, x, check_finite=False)
    return min(sigma, 1.0 / float(np.linalg.norm(y)))


def secular_value(sys: SecularSystem, z) -> SecularValue:
    """Determinant, log-derivative and smallest singular value of ``Id - U(z)``."""
    z = complex(z)
    n = sys.size
    A = np.eye(n) - evaluate_U(sys, z)
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    d = np.diagonal(lu)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    with np.errstate(divide="ignore"):
        log_det = complex(np.sum(np.log(d.astype(complex))))
    if swaps % 2:
        log_det += 1j * math.pi
    log_det = complex(log_det.real, math.remainder(log_det.imag, 2 * math.pi))
    det = cmath.exp(log_det) if log_det.real > -745 else 0j
    smin = smallest_singular_value(A, lu=(lu, piv))
    valid = smin >= 1e-13 * n
    if valid:
        inv = scipy.linalg.lu_solve((lu, piv), np.eye(n), check_finite=False)
        dU = evaluate_U_derivative(sys, z)
        logder = complex(-np.einsum("ij,ji->", inv, dU))
    else:
        logder = complex(math.nan, math.nan)
    return SecularValue(z, det, log_det, logder, smin, valid)


def trace_norm(m: np.ndarray) -> float:
    """Schatten-1 norm: the sum of singular values."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False).sum())


def hypothesis_diagnostics(open_sys: SecularSystem, closed_sys: SecularSystem, sample_points) -> dict:
    """Numerical audit of the operator hypotheses for an open/closed pair.

    Returns a dict with
    - ``S_norm``: operator norm of the open ``S`` (expected <= 1);
    - ``unitarity_defect``: ``||S~ S~^T - Id||`` for the closed matrix;
    - ``max_trace_gap`` and ``trace_gap_per_lead``: ``max ||U(z) - U~(z)||_1``
      over the samples, and that value divided by the number of lead vertices;
    - ``phase_velocity_min`` / ``phase_velocity_max``: extreme eigenvalues of
      ``-i U~'(x) U~(x)^-1`` over the real parts ``x`` of the samples (this is
      ``S~ diag(L) S~^T``, so they lie in ``[L_min, L_max]``);
    - ``phase_velocity_hermitian_defect``;
    - ``resolvent_bound``: ``max ||(Id - U~(z))^-1|| |Im z|`` over samples off
      the real axis.
    """
    if open_sys.size != closed_sys.size or not np.array_equal(open_sys.lengths, closed_sys.lengths):
        raise ValueError("systems must share the same bonds")
    pts = [complex(z) for z in sample_points]
    n = closed_sys.size
    S_norm = float(np.linalg.norm(open_sys.S, 2)) if n else 0.0
    defect = float(np.linalg.norm(closed_sys.S @ closed_sys.S.T - np.eye(n), 2)) if n else 0.0

    gaps = [trace_norm(evaluate_U(open_sys, z) - evaluate_U(closed_sys, z)) for z in pts]
    max_gap = max(gaps, default=0.0)
    g = open_sys.lead_vertex_count

    vel_min, vel_max, herm = math.inf, -math.inf, 0.0
    for x in sorted({z.real for z in pts}):
        Ut = evaluate_U(closed_sys, x)
        M = -1j * evaluate_U_derivative(closed_sys, x) @ np.linalg.inv(Ut)
        herm = max(herm, float(np.linalg.norm(M - M.conj().T, 2)))
        ev = np.linalg.eigvalsh((M + M.conj().T) / 2)
        vel_min = min(vel_min, float(ev[0]))
        vel_max = max(vel_max, float(ev[-1]))

    resolvent = 0.0
    for z in pts:
        if z.imag == 0:
            continue
        A = np.eye(n) - evaluate_U(closed_sys, z)
        smin = float(np.linalg.svd(A, compute_uv=False)[-1])
        resolvent = max(resolvent, abs(z.imag) / smin if smin > 0 else math.inf)

    return {
        "S_norm": S_norm,
        "unitarity_defect": defect,
        "max_trace_gap": max_gap,
        "trace_gap_per_lead": max_gap / g if g else (0.0 if max_gap == 0 else math.inf),
        "lead_vertex_count": g,
        "phase_velocity_min": vel_min,
        "phase_velocity_max": vel_max,
        "phase_velocity_hermitian_defect": herm,
        "resolvent_bound": resolvent,
        "L_min": closed_sys.min_length,
        "L_max": closed_sys.max_length,
    }
