"""Counting and locating zeros of det(Id - U(z)) with the argument principle.

The number of zeros inside a rectangle is ``(1/2 pi i) \\oint f(z) dz`` with
``f = d/dz log det(Id - U(z))``.  Each side is integrated with 8-point
Gauss-Legendre panels on a dyadic partition.  A panel is accepted only when
its quadrature value agrees, modulo ``2 pi i``, with the exact increment of
``log det`` between the panel end points (obtained from an LU factorization)
and the integrand does not vary sharply across it; the branch-corrected
increments then sum to an exact multiple of ``2 pi i`` around the cell.

Accepted panels are cached per line, so subdividing a cell only integrates
the two new cross lines.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .secular import SecularSystem, smallest_singular_value

__all__ = [
    "Rectangle",
    "Resonance",
    "CountResult",
    "NearZeroError",
    "QuadratureError",
    "OriginExcludedError",
    "RefinementError",
    "NonRealZeroError",
    "count_zeros",
    "count_grid",
    "find_resonances",
    "closed_spectrum",
    "eigenphase_counts",
    "eigenphase_crossing_count",
    "multiplicity",
    "kernel_dimension",
]

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(8)
PANEL_TOL = 1e-4  # absolute/relative error allowed per accepted panel
SPREAD_LIMIT = 8.0  # max panel_length * integrand variation
MIN_PANEL_FRACTION = 1e-10  # relative to the root interval; below: near-zero
MAX_SIDE_EVALS = 2**14
ORIGIN_RADIUS = 1e-3


class NearZeroError(ArithmeticError):
    """A contour passes (numerically) through a zero of the determinant."""

    def __init__(self, z):
        self.z = z
        super().__init__(f"contour passes through a zero near {z:.12g}")


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge; carries the partial winding."""

    def __init__(self, message, partial_winding=math.nan):
        self.partial_winding = partial_winding
        super().__init__(f"{message} (partial winding {partial_winding:.6g})")


class OriginExcludedError(ValueError):
    """The rectangle closure contains z = 0 and allow_origin is not set."""


class RefinementError(RuntimeError):
    """Newton refinement failed persistently inside a cell."""

    def __init__(self, message, cell=None):
        self.cell = cell
        super().__init__(message if cell is None else f"{message}: {cell}")


class NonRealZeroError(RuntimeError):
    """A closed system produced a zero off the real axis."""


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rectangle bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"empty rectangle {vals}")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= z.real <= self.re_max + pad
                and self.im_min - pad <= z.imag <= self.im_max + pad)

    def contains_origin(self) -> bool:
        return self.contains(0j)

    def mirrored(self) -> "Rectangle":
        """Image under z -> -conj(z)."""
        return Rectangle(-self.re_max, -self.re_min, self.im_min, self.im_max)

    def expanded(self, left=0.0, right=0.0, bottom=0.0, top=0.0) -> "Rectangle":
        return Rectangle(self.re_min - left, self.re_max + right,
                         self.im_min - bottom, self.im_max + top)


@dataclass(frozen=True)
class Resonance:
    z: complex
    multiplicity: int
    residual: float
    refined: bool = True
    cluster: bool = False


@dataclass(frozen=True)
class CountResult:
    count: int
    winding_raw: float
    quadrature_points: int
    jittered: bool = False
    rectangle: Rectangle | None = None
    warnings: tuple = ()


# ---------------------------------------------------------------------------
# line integration


@dataclass
class _Segment:
    delta: complex = 0j  # branch-corrected increment of log det
    raw: complex = 0j  # plain quadrature of f dz
    m1: complex = 0j  # quadrature of z f dz
    m2: complex = 0j  # quadrature of z^2 f dz

    def __iadd__(self, other):
        self.delta += other.delta
        self.raw += other.raw
        self.m1 += other.m1
        self.m2 += other.m2
        return self

    def scaled(self, s):
        return _Segment(s * self.delta, s * self.raw, s * self.m1, s * self.m2)


class _Integrator:
    """Adaptive panel integration of the log-derivative along axis-parallel lines.

    A line is ``('h', y)`` (z = t + i y) or ``('v', x)`` (z = x + i t); panels
    are parameter intervals ``[t0, t1]`` obtained by repeated bisection, so the
    same panel recurs exactly when neighbouring cells share a side.
    """

    def __init__(self, system: SecularSystem, panel_length: float | None = None):
        self.system = system
        self.panel_length = panel_length or 0.5 / max(system.max_length, 1e-12)
        self.singular_floor = 1e-13 * system.size
        self.evaluations = 0
        self._logdet = {}
        self._accepted = {}
        self._rejected = set()

    @staticmethod
    def _point(line, t):
        axis, c = line
        return complex(t, c) if axis == "h" else complex(c, t)

    def _endpoint(self, z):
        val = self._logdet.get(z)
        if val is None:
            val = complex(self.system.log_det([z])[0])
            self.evaluations += 1
            if not math.isfinite(val.real):
                raise NearZeroError(z)
            self._logdet[z] = val
        return val

    def _panel(self, line, t0, t1):
        key = (line, t0, t1)
        hit = self._accepted.get(key)
        if hit is not None:
            return hit
        if key in self._rejected:
            return None
        axis, c = line
        half = 0.5 * (t1 - t0)
        ts = 0.5 * (t0 + t1) + half * _NODES
        zs = ts + 1j * c if axis == "h" else c + 1j * ts
        f, fro = self.system.log_derivative(zs)
        self.evaluations += len(zs)
        if not np.all(np.isfinite(f)) or np.any(np.sqrt(self.system.size) / fro < self.singular_floor):
            raise NearZeroError(zs[int(np.argmax(fro))])
        dz = half if axis == "h" else 1j * half
        wf = _WEIGHTS * f * dz
        q0 = complex(wf.sum())
        q1 = complex((wf * zs).sum())
        q2 = complex((wf * zs * zs).sum())

        dl = self._endpoint(self._point(line, t1)) - self._endpoint(self._point(line, t0))
        k = round((q0.imag - dl.imag) / (2 * math.pi))
        exact = complex(dl.real, dl.imag + 2 * math.pi * k)
        err = abs(q0 - exact)
        spread = 2 * abs(half) * float(np.max(np.abs(f - f.mean())))
        if err <= PANEL_TOL * max(1.0, abs(exact)) and spread <= SPREAD_LIMIT:
            seg = _Segment(exact, q0, q1, q2)
            self._accepted[key] = seg
            return seg
        self._rejected.add(key)
        return None

    def integrate(self, line, t0, t1, budget=MAX_SIDE_EVALS):
        """Integrate from ``t0`` to ``t1`` (``t0 < t1``) along ``line``."""
        start = self.evaluations
        min_len = MIN_PANEL_FRACTION * (t1 - t0)
        total = _Segment()
        # initial dyadic partition
        stack = [(t0, t1)]
        initial = []
        while stack:
            a, b = stack.pop()
            if b - a > self.panel_length:
                m = 0.5 * (a + b)
                stack.append((m, b))
                stack.append((a, m))
            else:
                initial.append((a, b))
        stack = initial[::-1]
        while stack:
            a, b = stack.pop()
            seg = self._panel(line, a, b)
            if seg is not None:
                total += seg
                continue
            if b - a < min_len:
                raise NearZeroError(self._point(line, 0.5 * (a + b)))
            if self.evaluations - start > budget:
                raise QuadratureError(
                    f"side {line} did not converge within {budget} evaluations",
                    (total.raw / (2j * math.pi)).real,
                )
            m = 0.5 * (a + b)
            stack.append((m, b))
            stack.append((a, m))
        return total

    def cell(self, rect: Rectangle) -> _Segment:
        """Counter-clockwise boundary integral of ``rect``."""
        total = _Segment()
        total += self.integrate(("h", rect.im_min), rect.re_min, rect.re_max)
        total += self.integrate(("v", rect.re_max), rect.im_min, rect.im_max)
        total += self.integrate(("h", rect.im_max), rect.re_min, rect.re_max).scaled(-1)
        total += self.integrate(("v", rect.re_min), rect.im_min, rect.im_max).scaled(-1)
        return total

    def circle(self, center: complex, radius: float, start: int = 16, cap: int = 512):
        """Winding number of ``det(Id - U)`` around a circle (trapezoid rule)."""
        n = start
        prev = None
        values = np.empty(0, dtype=complex)
        while True:
            theta = 2 * math.pi * np.arange(n) / n
            need = theta if prev is None else theta[1::2]
            zs = center + radius * np.exp(1j * need)
            f, fro = self.system.log_derivative(zs)
            self.evaluations += len(zs)
            if not np.all(np.isfinite(f)) or np.any(np.sqrt(self.system.size) / fro < self.singular_floor):
                raise NearZeroError(center + radius)
            fe = f * np.exp(1j * need)
            if prev is None:
                values = fe
            else:
                merged = np.empty(n, dtype=complex)
                merged[0::2], merged[1::2] = values, fe
                values = merged
            w = complex(radius * values.mean())
            if prev is not None and abs(w - prev) < 1e-3 and abs(w - round(w.real)) < 0.05:
                return w
            if n >= cap:
                return w
            prev = w
            n *= 2


def _winding(seg: _Segment):
    count = round(seg.delta.imag / (2 * math.pi))
    raw = (seg.raw / (2j * math.pi)).real
    return count, raw


# ---------------------------------------------------------------------------
# counting


def _origin_disc(integ: _Integrator, radius=ORIGIN_RADIUS):
    for k in range(8):
        r = radius * (1 + 0.0173 * k)
        try:
            w = integ.circle(0j, r)
        except NearZeroError:
            continue
        return round(w.real), r
    raise QuadratureError("cannot place the origin excision circle", math.nan)


def _clear_origin(rect: Rectangle, r: float) -> Rectangle:
    # sides passing within 2r of the origin are moved outward
    pad = 2 * r
    left = right = bottom = top = 0.0
    if rect.im_min <= 0 <= rect.im_max:
        if abs(rect.re_min) < pad:
            left = pad + rect.re_min
        if abs(rect.re_max) < pad:
            right = pad - rect.re_max
    if rect.re_min <= 0 <= rect.re_max:
        if abs(rect.im_min) < pad:
            bottom = pad + rect.im_min
        if abs(rect.im_max) < pad:
            top = pad - rect.im_max
    return rect.expanded(left, right, bottom, top)


def _jitter_steps(rect: Rectangle):
    d = rect.diameter
    return [0.0] + [f * d for f in (1.3e-6, 1.1e-5, 1e-4)]


def _count_with_jitter(integ: _Integrator, rect: Rectangle):
    last = None
    for eps in _jitter_steps(rect):
        r = rect.expanded(eps, eps, eps, eps) if eps else rect
        try:
            seg = integ.cell(r)
        except NearZeroError as exc:
            last = exc
            continue
        return seg, r, eps > 0
    raise QuadratureError(f"contour of {rect} passes through a zero even after jitter ({last})")


def count_zeros(sys: SecularSystem, rect: Rectangle, allow_origin: bool = False,
                _integrator: _Integrator | None = None) -> CountResult:
    """Number of zeros of ``det(Id - U)`` in ``rect``, with multiplicity.

    Parameters
    ----------
    sys : SecularSystem
    rect : Rectangle
    allow_origin : bool
        If the closure of ``rect`` contains 0, count zeros outside the disc
        ``|z| < 1e-3`` instead of refusing (a warning is attached).

    Raises
    ------
    OriginExcludedError
        ``rect`` contains 0 and ``allow_origin`` is False.
    QuadratureError
        Quadrature did not converge, or the contour hits a zero even after
        outward jitter.
    """
    integ = _integrator or _Integrator(sys)
    start = integ.evaluations
    notes = []
    excised = 0
    if rect.contains_origin():
        if not allow_origin:
            raise OriginExcludedError("origin excluded: rectangle closure contains z = 0")
        excised, r = _origin_disc(integ)
        rect2 = _clear_origin(rect, r)
        if rect2 != rect:
            notes.append("sides near the origin moved outward")
        rect = rect2
        notes.append(f"disc |z| < {r:.4g} excised ({excised} zeros there)")
    seg, used, jittered = _count_with_jitter(integ, rect)
    count, raw = _winding(seg)
    count -= excised
    raw -= excised
    if abs(raw - count) >= 0.05:
        raise QuadratureError("winding did not settle near an integer", raw)
    return CountResult(count, raw, integ.evaluations - start, jittered, used, tuple(notes))


def count_grid(sys: SecularSystem, xs, ys, _integrator=None):
    """Zero counts on the cells of a rectilinear grid.

    ``counts[i, j]`` is the number of zeros with ``xs[i] <= Re z <= xs[i+1]``
    and ``ys[j] <= Im z <= ys[j+1]``.  Interior grid lines that pass through a
    zero are shifted slightly (consistently for both neighbouring cells);
    outer lines move outward.  Returns ``(counts, xs_used, ys_used)``.
    """
    integ = _integrator or _Integrator(sys)
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if any(b <= a for a, b in zip(xs, xs[1:])) or any(b <= a for a, b in zip(ys, ys[1:])):
        raise ValueError("grid lines must be strictly increasing")
    if Rectangle(xs[0], xs[-1], ys[0], ys[-1]).contains_origin():
        raise OriginExcludedError("origin excluded: grid contains z = 0")

    def nudge(vals, k, attempt):
        lo = vals[k - 1] if k > 0 else -math.inf
        hi = vals[k + 1] if k + 1 < len(vals) else math.inf
        span = min(hi - vals[k], vals[k] - lo, 1.0)
        direction = -1.0 if k == 0 else 1.0  # outer lines move outward
        return vals[k] + direction * span * (1.3e-6 * 10**attempt)

    attempts = {}
    while True:
        try:
            vert = [[integ.integrate(("v", x), ys[j], ys[j + 1]) for j in range(len(ys) - 1)] for x in xs]
            horiz = [[integ.integrate(("h", y), xs[i], xs[i + 1]) for i in range(len(xs) - 1)] for y in ys]
            break
        except NearZeroError as exc:
            z = exc.z
            # move the grid line closest to the offending point
            dx = [abs(z.real - x) for x in xs]
            dy = [abs(z.imag - y) for y in ys]
            if min(dx) <= min(dy):
                k = int(np.argmin(dx))
                tries = attempts.get(("x", k), 0)
                if tries > 3:
                    raise QuadratureError(f"grid line x={xs[k]} passes through a zero") from None
                xs[k] = nudge(xs, k, tries)
            else:
                k = int(np.argmin(dy))
                tries = attempts.get(("y", k), 0)
                if tries > 3:
                    raise QuadratureError(f"grid line y={ys[k]} passes through a zero") from None
                ys[k] = nudge(ys, k, tries)
            attempts[("x" if min(dx) <= min(dy) else "y", k)] = tries + 1
    counts = np.zeros((len(xs) - 1, len(ys) - 1), dtype=int)
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            seg = _Segment()
            seg += horiz[j][i]
            seg += vert[i + 1][j]
            seg += horiz[j + 1][i].scaled(-1)
            seg += vert[i][j].scaled(-1)
            counts[i, j], raw = _winding(seg)
            if abs(raw - counts[i, j]) >= 0.05:
                raise QuadratureError("grid cell winding did not settle", raw)
    return counts, xs, ys


# ---------------------------------------------------------------------------
# refinement


def multiplicity(sys: SecularSystem, z, tol: float = 1e-10, _integrator=None) -> int:
    """Winding number of a circle of radius ``max(8 tol, 1e-9)`` around ``z``."""
    integ = _integrator or _Integrator(sys)
    return round(integ.circle(complex(z), max(8 * tol, 1e-9)).real)


def kernel_dimension(sys: SecularSystem, z, threshold: float = 1e-6) -> int:
    """Number of singular values of ``Id - U(z)`` below ``threshold``."""
    A = np.eye(sys.size) - sys.U(z)
    return int(np.count_nonzero(np.linalg.svd(A, compute_uv=False) < threshold))


def _newton(sys: SecularSystem, z0: complex, tol: float, mult: int = 1, maxit: int = 100):
    z = complex(z0)
    floor = 1e-13 * sys.size
    for _ in range(maxit):
        f, fro = sys.log_derivative([z])
        if math.sqrt(sys.size) / fro[0] < floor:
            return z, True  # landed on the zero to working precision
        f = complex(f[0])
        if not (math.isfinite(f.real) and math.isfinite(f.imag)) or f == 0:
            return z, False
        step = mult / f
        z -= step
        if abs(step) < tol:
            return z, True
    return z, False


def _residual(sys: SecularSystem, z) -> float:
    return smallest_singular_value(np.eye(sys.size) - sys.U(z))


_SPLIT_FRACTIONS = (0.5, 0.4375, 0.5625, 0.40625, 0.59375, 0.3671875)


def _split_candidates(lo, hi, avoid_zero):
    for f in _SPLIT_FRACTIONS:
        s = lo + f * (hi - lo)
        if avoid_zero is not None and abs(s) < avoid_zero:
            continue
        yield s


def _quadrisect(integ, rect, excise, origin_count):
    """Children of ``rect`` with their counts; split lines avoid zeros."""
    avoid = 4 * excise if excise else None
    for sx in _split_candidates(rect.re_min, rect.re_max, avoid):
        for sy in _split_candidates(rect.im_min, rect.im_max, avoid):
            kids = [
                Rectangle(rect.re_min, sx, rect.im_min, sy),
                Rectangle(sx, rect.re_max, rect.im_min, sy),
                Rectangle(rect.re_min, sx, sy, rect.im_max),
                Rectangle(sx, rect.re_max, sy, rect.im_max),
            ]
            try:
                segs = [integ.cell(k) for k in kids]
            except NearZeroError:
                continue
            out = []
            for k, s in zip(kids, segs):
                c, _ = _winding(s)
                if excise and k.contains_origin():
                    c -= origin_count
                out.append((k, c, s))
            return out
    raise QuadratureError(f"could not split {rect} away from zeros")


def find_resonances(sys: SecularSystem, rect: Rectangle, tol: float = 1e-10,
                    allow_origin: bool = False) -> list:
    """Locate all zeros of ``det(Id - U)`` in ``rect``.

    Cells are quadrisected until they hold at most one zero (or are smaller
    than ``16 tol``).  In a single-zero cell Newton's method
    ``z <- z + 1/tr[(Id-U)^-1 U']`` starts from the contour estimate of the
    zero and stops when the step is below ``tol``.  Multiplicities are the
    winding numbers of circles of radius ``max(8 tol, 1e-9)``; a cell that
    keeps several zeros below ``16 tol`` is reported once with its total count
    and ``cluster=True``.

    Returns resonances sorted by real then imaginary part; the multiplicities
    add up to ``count_zeros(sys, rect)``.
    """
    integ = _Integrator(sys)
    excise = 0.0
    origin_count = 0
    if rect.contains_origin():
        if not allow_origin:
            raise OriginExcludedError("origin excluded: rectangle closure contains z = 0")
        origin_count, excise = _origin_disc(integ)
        rect = _clear_origin(rect, excise)
        warnings.warn(f"zeros with |z| < {excise:.3g} are excluded", stacklevel=2)

    seg, rect, _ = _count_with_jitter(integ, rect)
    total, _ = _winding(seg)
    total -= origin_count
    floor = 16 * tol
    found = []
    stack = [(rect, total, seg)]
    while stack:
        cell, m, seg = stack.pop()
        if m <= 0:
            continue
        holds_origin = bool(excise) and cell.contains_origin()
        s0 = m + (origin_count if holds_origin else 0)
        center = seg.m1 / (2j * math.pi * s0) if s0 else cell.center
        if holds_origin or not cell.contains(center):
            center = cell.center
        if m == 1 and not holds_origin:
            res = _refine_simple(sys, integ, cell, center, tol)
            if res is not None:
                found.append(res)
                continue
        elif m > 1 and not holds_origin:
            var = seg.m2 / (2j * math.pi * m) - center**2
            if abs(var) ** 0.5 < 0.05 * cell.diameter:
                res = _refine_multiple(sys, integ, cell, center, m, tol)
                if res is not None:
                    found.append(res)
                    continue
            if cell.diameter < floor:
                found.append(Resonance(center, m, _residual(sys, center), refined=False, cluster=True))
                continue
        if cell.diameter < floor:
            raise RefinementError("Newton refinement failed in a minimal cell", cell)
        kids = _quadrisect(integ, cell, excise, origin_count)
        got = sum(c for _, c, _ in kids)
        if got != m:
            raise QuadratureError(f"children of {cell} count {got} zeros, parent {m}", got)
        for k, c, s in reversed(kids):
            stack.append((k, c, s))
    found.sort(key=lambda r: (r.z.real, r.z.imag))
    return found


def _refine_simple(sys, integ, cell, z0, tol):
    z, ok = _newton(sys, z0, tol)
    if not ok or not cell.contains(z, pad=tol):
        return None
    try:
        mult = multiplicity(sys, z, tol, _integrator=integ)
    except NearZeroError:
        return None
    if mult != 1:
        return None
    return Resonance(z, 1, _residual(sys, z))


def _refine_multiple(sys, integ, cell, z0, m, tol):
    z, ok = _newton(sys, z0, tol, mult=m, maxit=40)
    if not ok or not cell.contains(z, pad=tol):
        return None
    try:
        mult = multiplicity(sys, z, tol, _integrator=integ)
    except NearZeroError:
        return None
    if mult != m:
        return None
    return Resonance(z, m, _residual(sys, z))


# ---------------------------------------------------------------------------
# closed systems


def closed_spectrum(sys: SecularSystem, a: float, b: float, tol: float = 1e-10) -> list:
    """Real zeros ``(x, multiplicity)`` of a closed system in ``[a, b]``."""
    if not sys.closed:
        raise ValueError("closed_spectrum needs a closed system")
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    eps = min(0.1, 0.1 / sys.max_length)
    out = []
    for r in find_resonances(sys, Rectangle(a, b, -eps, eps), tol):
        if abs(r.z.imag) > tol:
            raise NonRealZeroError(f"non-real zero for closed system: {r.z}")
        out.append((r.z.real, r.multiplicity))
    return out


def _eigenphases(sys: SecularSystem, x: float) -> np.ndarray:
    lam = np.linalg.eigvals(sys.U(x))
    return np.mod(np.angle(lam), 2 * math.pi)


def eigenphase_counts(sys: SecularSystem, edges, step: float | None = None,
                      min_step: float = 1e-4) -> np.ndarray:
    """Number of eigenvalues of ``U(x)`` passing through 1 on each ``(x0, x1]``.

    For a closed system every eigenphase of the unitary ``U(x)`` increases with
    speed in ``[L_min, L_max]``, and the phases sum to ``x sum(L_b)`` plus a
    constant.  Summing ``floor(theta_k / 2 pi)`` over continuous lifts, the
    number of passages on ``(x0, x1)`` is
    ``[sum(L)(x1 - x0) - sum(phi(x1)) + sum(phi(x0))] / 2 pi`` with principal
    phases ``phi`` in ``[0, 2 pi)``.  The interval is walked in steps of at
    most ``pi / (4 L_max)``; every step must yield a nonnegative integer,
    otherwise the step is halved.
    """
    if not sys.closed:
        raise ValueError("eigenphase counting needs a closed (unitary) system")
    edges = [float(e) for e in edges]
    if step is None:
        step = math.pi / (4 * sys.max_length)
    total_length = float(sys.lengths.sum())
    n = sys.size
    snap = 1e-9

    def phases(x):
        phi = _eigenphases(sys, x)
        phi[phi > 2 * math.pi - snap] -= 2 * math.pi  # a passage at x counts as done
        return phi

    counts = []
    for x0, x1 in zip(edges, edges[1:]):
        if x1 <= x0:
            raise ValueError("edges must be increasing")
        acc = 0
        x = x0
        phi0 = phases(x0)
        h = step
        while x < x1:
            xn = min(x + h, x1)
            phi1 = phases(xn)
            c = (total_length * (xn - x) - phi1.sum() + phi0.sum()) / (2 * math.pi)
            k = round(c)
            if abs(c - k) > 1e-6 * max(1, n) or k < 0 or k > n:
                h *= 0.5
                if h < min_step:
                    raise QuadratureError(f"eigenphase stepping failed at x={x}", c)
                continue
            acc += k
            phi0, x, h = phi1, xn, step
        counts.append(acc)
    return np.array(counts, dtype=int)


def eigenphase_crossing_count(sys: SecularSystem, a: float, b: float) -> int:
    """Total multiplicity of real zeros in ``(a, b)`` for a closed system."""
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    at_b = np.abs(np.angle(np.linalg.eigvals(sys.U(b)))) < 1e-9
    return int(eigenphase_counts(sys, [a, b])[0]) - int(np.count_nonzero(at_b))
