"""Orientation-preserving maps of an interval or of the circle.

Maps are immutable expression trees over a handful of closed-form
primitives.  Every node knows its value and its exact first derivative;
second derivatives are only ever taken by finite differences of the
exact first derivative.  Circle maps are represented by their lifts
``F: R -> R`` with ``F(x + 1) = F(x) + 1``.

All evaluation entry points accept floats or numpy arrays and return the
same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConstructionError, DomainError, NumericError

INVERSE_TOL = 1e-13
INVERSE_MAXITER = 200
FD_STEP = 1e-5


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x, tol: float = 0.0):
        return (x >= self.lo - tol) & (x <= self.hi + tol)

    def mesh(self, n: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def to_dict(self):
        return {"type": "interval", "lo": self.lo, "hi": self.hi}


class Circle:
    """Marker domain for lifts of circle maps."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "CIRCLE"

    def to_dict(self):
        return {"type": "circle"}


CIRCLE = Circle()
Domain = "Interval | Circle"


def _domain_from_dict(d):
    if d["type"] == "circle":
        return CIRCLE
    return Interval(float(d["lo"]), float(d["hi"]))


def _domain_tol(iv: Interval) -> float:
    return 1e-12 * max(1.0, abs(iv.lo), abs(iv.hi))


class MapDescriptor:
    """Base node.  Subclasses implement ``_eval``/``_deriv`` on arrays."""

    kind: str = ""

    def __init__(self, domain, params: dict[str, Any] | None = None, children: Sequence["MapDescriptor"] = ()):
        self.domain = domain
        self.params = dict(params or {})
        self.children = tuple(children)

    @property
    def is_circle(self) -> bool:
        return self.domain is CIRCLE

    def __call__(self, x):
        return eval(self, x)

    def deriv(self, x):
        return deriv(self, x)

    def _eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _deriv(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _invert(self) -> "MapDescriptor":
        return Inverse(self)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "domain": self.domain.to_dict(),
            "children": [c.to_dict() for c in self.children],
        }

    def __repr__(self):
        body = ", ".join(f"{k}={v!r}" for k, v in self.params.items() if not isinstance(v, list))
        return f"{type(self).__name__}({body})"


def _check_domain(f: MapDescriptor, x: np.ndarray):
    if f.is_circle:
        return
    iv = f.domain
    tol = _domain_tol(iv)
    if np.any((x < iv.lo - tol) | (x > iv.hi + tol)) or np.any(np.isnan(x)):
        bad = x[(x < iv.lo - tol) | (x > iv.hi + tol) | np.isnan(x)]
        raise DomainError(f"{f.kind} map on [{iv.lo}, {iv.hi}] evaluated at {bad[:3]}")


def _wrap(fn, f: MapDescriptor, x):
    arr = np.asarray(x, dtype=float)
    _check_domain(f, arr)
    out = fn(np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def eval(f: MapDescriptor, x):  # noqa: A001 - mirrors the operation name
    """Evaluate ``f`` at ``x`` (scalar or array)."""
    return _wrap(f._eval, f, x)


def deriv(f: MapDescriptor, x):
    """Exact first derivative of ``f`` at ``x``."""
    return _wrap(f._deriv, f, x)


# --------------------------------------------------------------------------
# primitives


class Affine(MapDescriptor):
    kind = "affine"

    def __init__(self, slope: float, offset: float, domain=CIRCLE):
        if not slope > 0:
            raise ConstructionError("affine slope must be positive")
        if domain is CIRCLE and slope != 1.0:
            raise ConstructionError("an affine circle lift must have slope 1")
        super().__init__(domain, {"slope": float(slope), "offset": float(offset)})
        self.slope = float(slope)
        self.offset = float(offset)

    def _eval(self, x):
        return self.slope * x + self.offset

    def _deriv(self, x):
        return np.full_like(x, self.slope)

    def _invert(self):
        dom = self.domain
        if dom is not CIRCLE:
            dom = Interval(float(self._eval(np.array([dom.lo]))[0]), float(self._eval(np.array([dom.hi]))[0]))
        return Affine(1.0 / self.slope, -self.offset / self.slope, dom)


@lru_cache(maxsize=None)
def bump_slope_sup() -> float:
    """sup |psi'| for the unit bump psi(u) = exp(-1/(u(1-u)))."""
    res = minimize_scalar(lambda u: -_psi_prime(np.array([u]))[0], bounds=(0.05, 0.5),
                          method="bounded", options={"xatol": 1e-14})
    return float(-res.fun)


def _psi(u):
    inside = (u > 0.0) & (u < 1.0)
    w = np.where(inside, u * (1.0 - u), 1.0)
    with np.errstate(over="ignore", under="ignore"):
        return np.where(inside, np.exp(-1.0 / w), 0.0)


def _psi_prime(u):
    inside = (u > 0.0) & (u < 1.0)
    w = np.where(inside, u * (1.0 - u), 1.0)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        p = np.where(inside, np.exp(-1.0 / w), 0.0)
        d = p * (1.0 - 2.0 * u) / (w * w)
    return np.where(p > 0.0, d, 0.0)


class Bump(MapDescriptor):
    """``x + eps * L * psi((x - lo) / L)`` on ``[lo, hi]``, identity outside.

    The rescaling by ``L = hi - lo`` makes the map the affine conjugate of
    the unit bump, so its derivative ``1 + eps * psi'(u)`` and its
    log-derivative variation do not depend on the interval.
    """

    kind = "bump"

    def __init__(self, lo: float, hi: float, eps: float, domain=None):
        iv = Interval(float(lo), float(hi))
        cert = abs(eps) * bump_slope_sup()
        if not cert < 1.0:
            raise ConstructionError(f"bump certificate |eps| sup|psi'| = {cert:.6g} >= 1 (eps={eps})")
        super().__init__(domain if domain is not None else iv, {"lo": iv.lo, "hi": iv.hi, "eps": float(eps)})
        self.iv = iv
        self.eps = float(eps)
        self.certificate = cert

    def _u(self, x):
        return (x - self.iv.lo) / self.iv.length

    def _eval(self, x):
        return x + self.eps * self.iv.length * _psi(self._u(x))

    def _deriv(self, x):
        return 1.0 + self.eps * _psi_prime(self._u(x))

    def _invert(self):
        return Inverse(self, bracket=(self.iv.lo, self.iv.hi))


class Moebius(MapDescriptor):
    """Projective action of ``[[a, b], [c, d]]`` in SL(2, R) on RP^1 = R/Z.

    The point ``x`` corresponds to the line through ``(cos pi x, sin pi x)``.
    The canonical lift satisfies ``F(0)`` in ``[-1/2, 1/2)``; ``shift`` adds an
    integer to it (needed so that inverses are exact inverses of lifts).
    """

    kind = "moebius"

    def __init__(self, a: float, b: float, c: float, d: float, shift: int = 0):
        det = a * d - b * c
        if abs(det - 1.0) > 1e-12:
            raise ConstructionError(f"moebius determinant {det!r} != 1")
        super().__init__(CIRCLE, {"a": float(a), "b": float(b), "c": float(c), "d": float(d), "shift": int(shift)})
        self.matrix = np.array([[a, b], [c, d]], dtype=float)
        self.shift = int(shift)
        alpha = math.atan2(c, a)
        if alpha >= math.pi / 2:
            alpha -= math.pi
        elif alpha < -math.pi / 2:
            alpha += math.pi
        self._alpha = alpha
        self._p = math.hypot(a, c)
        self._q = (a * b + c * d) / self._p

    def _eval(self, x):
        n = np.floor(x)
        th = np.pi * (x - n)
        s, c = np.sin(th), np.cos(th)
        t = np.arctan2(s / self._p, self._p * c + self._q * s)
        return n + (self._alpha + t) / np.pi + self.shift

    def _deriv(self, x):
        (a, b), (c, d) = self.matrix
        th = np.pi * x
        s, co = np.sin(th), np.cos(th)
        return 1.0 / ((a * co + b * s) ** 2 + (c * co + d * s) ** 2)

    def _invert(self):
        (a, b), (c, d) = self.matrix
        g = Moebius(d, -b, -c, a, 0)
        f0 = float(self._eval(np.array([0.0]))[0])
        k = -round(float(g._eval(np.array([f0]))[0]))
        return Moebius(d, -b, -c, a, k)


class PiecewiseAffine(MapDescriptor):
    kind = "piecewise-affine"

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.shape != ys.shape or xs.size < 2:
            raise ConstructionError("piecewise-affine needs matching breakpoint lists of length >= 2")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ConstructionError("piecewise-affine breakpoints must be strictly increasing")
        super().__init__(Interval(float(xs[0]), float(xs[-1])), {"xs": xs.tolist(), "ys": ys.tolist()})
        self.xs, self.ys = xs, ys
        self.slopes = np.diff(ys) / np.diff(xs)

    def _eval(self, x):
        return np.interp(x, self.xs, self.ys)

    def _deriv(self, x):
        idx = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.slopes.size - 1)
        return self.slopes[idx]

    def _invert(self):
        return PiecewiseAffine(self.ys, self.xs)


class Stitched(MapDescriptor):
    """Self-maps of consecutive intervals glued together; identity elsewhere."""

    kind = "stitched"

    def __init__(self, pieces: Sequence[Interval], maps: Sequence[MapDescriptor], domain=None):
        if len(pieces) != len(maps) or not pieces:
            raise ConstructionError("stitched map needs one child per piece")
        los = np.array([p.lo for p in pieces])
        his = np.array([p.hi for p in pieces])
        if np.any(los[1:] < his[:-1]):
            raise ConstructionError("stitched pieces must be sorted and non-overlapping")
        dom = domain if domain is not None else Interval(float(los[0]), float(his[-1]))
        super().__init__(dom, {"pieces": [[p.lo, p.hi] for p in pieces]}, maps)
        self.pieces = tuple(pieces)
        self._los, self._his = los, his

    def _locate(self, x):
        idx = np.searchsorted(self._los, x, side="right") - 1
        ok = idx >= 0
        ic = np.clip(idx, 0, len(self.pieces) - 1)
        ok &= x <= self._his[ic]
        return ic, ok

    def _apply(self, x, attr, default):
        ic, ok = self._locate(x)
        out = default(x)
        for j in np.unique(ic[ok]):
            m = ok & (ic == j)
            out[m] = getattr(self.children[j], attr)(x[m])
        return out

    def _eval(self, x):
        return self._apply(x, "_eval", lambda z: z.copy())

    def _deriv(self, x):
        return self._apply(x, "_deriv", np.ones_like)

    def _invert(self):
        return Stitched(self.pieces, [invert(c) for c in self.children], self.domain)


class Compose(MapDescriptor):
    """``children[0] o children[1] o ... o children[-1]``."""

    kind = "compose"

    def __init__(self, *maps: MapDescriptor):
        if not maps:
            raise ConstructionError("compose needs at least one map")
        super().__init__(maps[-1].domain, {}, maps)

    def _eval(self, x):
        for f in reversed(self.children):
            x = f._eval(x)
        return x

    def _deriv(self, x):
        d = np.ones_like(x)
        for f in reversed(self.children):
            d = d * f._deriv(x)
            x = f._eval(x)
        return d

    def _invert(self):
        return Compose(*[invert(f) for f in reversed(self.children)])


class Inverse(MapDescriptor):
    """Lazy numeric inverse: safeguarded Newton inside a monotone bracket."""

    kind = "inverse"

    def __init__(self, f: MapDescriptor, bracket: tuple[float, float] | None = None):
        if f.is_circle:
            dom = CIRCLE
            self._f0 = float(f._eval(np.array([0.0]))[0])
        else:
            lo, hi = bracket if bracket is not None else (f.domain.lo, f.domain.hi)
            flo, fhi = f._eval(np.array([lo, hi]))
            dom = Interval(float(flo), float(fhi))
            self._bracket = (lo, hi)
        super().__init__(dom, {}, (f,))

    def _eval(self, y):
        f = self.children[0]
        if f.is_circle:
            lo = y - self._f0 - 1.0
            hi = y - self._f0 + 1.0
        else:
            lo = np.full_like(y, self._bracket[0])
            hi = np.full_like(y, self._bracket[1])
        return solve_monotone(f._eval, f._deriv, y, lo, hi)

    def _deriv(self, y):
        f = self.children[0]
        return 1.0 / f._deriv(self._eval(y))

    def _invert(self):
        return self.children[0]


class Iterate(MapDescriptor):
    kind = "iterate"

    def __init__(self, f: MapDescriptor, n: int):
        super().__init__(f.domain, {"n": int(n)}, (f,))
        self.n = int(n)
        self._step = f if n >= 0 else invert(f)

    def _eval(self, x):
        for _ in range(abs(self.n)):
            x = self._step._eval(x)
        return x

    def _deriv(self, x):
        d = np.ones_like(x)
        for _ in range(abs(self.n)):
            d = d * self._step._deriv(x)
            x = self._step._eval(x)
        return d

    def _invert(self):
        return Iterate(self.children[0], -self.n)


def solve_monotone(F, dF, y, lo, hi, tol: float = INVERSE_TOL, maxiter: int = INVERSE_MAXITER):
    """Solve ``F(x) = y`` for increasing ``F`` with ``x`` bracketed by ``[lo, hi]``.

    Newton steps are taken whenever they stay strictly inside the current
    bracket; otherwise the bracket is bisected.  Raises ``NumericError`` if
    any entry fails to converge within ``maxiter`` iterations.
    """
    y = np.asarray(y, dtype=float)
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    x = 0.5 * (lo + hi)
    active = np.ones(y.shape, dtype=bool)
    for _ in range(maxiter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            return x
        xa, la, ha = x[idx], lo[idx], hi[idx]
        r = F(xa) - y[idx]
        la = np.where(r < 0, xa, la)
        ha = np.where(r > 0, xa, ha)
        d = dF(xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - r / d
        ok = np.isfinite(xn) & (xn > la) & (xn < ha)
        xn = np.where(ok, xn, 0.5 * (la + ha))
        done = (r == 0) | (ok & (np.abs(xn - xa) <= tol)) | (ha - la <= tol)
        xn = np.where(r == 0, xa, xn)
        x[idx], lo[idx], hi[idx] = xn, la, ha
        active[idx[done]] = False
    if np.any(active):
        raise NumericError("monotone inversion did not converge", unconverged=int(active.sum()),
                           worst_bracket=float(np.max(hi[active] - lo[active])))
    return x


# --------------------------------------------------------------------------
# constructors and operations


def identity(domain=CIRCLE) -> Affine:
    return Affine(1.0, 0.0, domain)


def make_affine(src: Interval, dst: Interval) -> Affine:
    slope = dst.length / src.length
    return Affine(slope, dst.lo - slope * src.lo, src)


def make_rotation(alpha: float) -> Affine:
    return Affine(1.0, float(alpha), CIRCLE)


def make_bump(iv: Interval, eps: float) -> Bump:
    return Bump(iv.lo, iv.hi, eps)


def make_moebius(a: float, b: float, c: float, d: float) -> Moebius:
    return Moebius(a, b, c, d)


def make_piecewise_affine(xs, ys) -> PiecewiseAffine:
    return PiecewiseAffine(xs, ys)


def make_stitched(pieces, maps, domain=None) -> Stitched:
    return Stitched(pieces, maps, domain)


def compose(*maps: MapDescriptor) -> MapDescriptor:
    return Compose(*maps)


def invert(f: MapDescriptor) -> MapDescriptor:
    return f._invert()


def iterate(f: MapDescriptor, n: int) -> MapDescriptor:
    if n == 0:
        return identity(f.domain)
    return Iterate(f, n)


def circle_point(x: float) -> np.ndarray:
    """Unit vector spanning the projective point ``x``."""
    return np.array([math.cos(math.pi * x), math.sin(math.pi * x)])


def make_hyperbolic(attracting: float, repelling: float, lam: float) -> Moebius:
    """Hyperbolic element with the given fixed points; derivative ``1/lam**2`` at the attractor."""
    if not lam > 1:
        raise ConstructionError("multiplier must exceed 1")
    u, v = circle_point(attracting), circle_point(repelling)
    P = np.column_stack([u, v])
    det = np.linalg.det(P)
    if abs(det) < 1e-12:
        raise ConstructionError("fixed points must be distinct")
    if det < 0:
        P[:, 1] *= -1
        det = -det
    P /= math.sqrt(det)
    M = P @ np.diag([lam, 1.0 / lam]) @ np.linalg.inv(P)
    # project back onto det = 1 to absorb rounding
    M /= math.sqrt(np.linalg.det(M))
    return Moebius(*M.ravel())


def moebius_fixed_points(m: Moebius) -> list[float]:
    """Fixed points in ``[0, 1)`` of the projective action (empty if elliptic)."""
    w, vecs = np.linalg.eig(m.matrix)
    if np.iscomplexobj(w) and np.any(np.abs(w.imag) > 1e-14):
        return []
    pts = []
    for k in range(2):
        vx, vy = np.real(vecs[:, k])
        pts.append((math.atan2(vy, vx) / math.pi) % 1.0)
    pts = sorted(set(round(p, 15) % 1.0 for p in pts))
    return pts


# --------------------------------------------------------------------------
# diagnostics


def _base_interval(f: MapDescriptor) -> Interval:
    return Interval(0.0, 1.0) if f.is_circle else f.domain


@dataclass(frozen=True)
class VariationEstimate:
    """Total variation of ``log f'`` by two independent routes."""

    partition_sum: float
    quadrature: float
    cells: int

    @property
    def value(self) -> float:
        return self.partition_sum

    @property
    def discrepancy(self) -> float:
        return abs(self.partition_sum - self.quadrature)

    def __float__(self):
        return self.partition_sum


def _fd_second(f: MapDescriptor, x: np.ndarray, iv: Interval, h: float = FD_STEP) -> np.ndarray:
    if f.is_circle:
        xl, xr = x - h, x + h
    else:
        xl, xr = np.maximum(x - h, iv.lo), np.minimum(x + h, iv.hi)
    return (f._deriv(xr) - f._deriv(xl)) / (xr - xl)


def _insert_extrema(g, x, y, noise: float = 1e-15, limit: int = 4096):
    """Add the local extrema of ``g`` that fall between mesh points.

    On a monotone stretch the partition sum is exact, so a mesh that
    contains every turning point gives the variation up to roundoff.
    """
    d = np.diff(y)
    sgn = np.where(np.abs(d) > noise, np.sign(d), 0.0)
    nz = np.nonzero(sgn)[0]
    turn = nz[:-1][sgn[nz[:-1]] * sgn[nz[1:]] < 0]
    if turn.size == 0 or turn.size > limit:
        return x, y
    extra = []
    for i, j in zip(turn, nz[1:][sgn[nz[:-1]] * sgn[nz[1:]] < 0]):
        lo, hi = x[i], x[j + 1]
        sign = sgn[i]  # rising then falling: a maximum
        res = minimize_scalar(lambda t: -sign * float(g(np.array([t]))[0]), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-14})
        extra.append(res.x)
    xs = np.concatenate([x, extra])
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    ys = np.concatenate([y, g(np.asarray(extra))])[order]
    return xs, ys


def log_deriv_variation(f: MapDescriptor, resolution: int = 1024, tol: float = 1e-8,
                        max_cells: int = 1 << 22, quad_cells: int = 1 << 16) -> VariationEstimate:
    """``var(log f')`` over the domain (one period for circle maps).

    The partition sum runs on dyadically refined uniform meshes with the
    turning points of ``log f'`` inserted, and stops once two successive
    sums differ by less than ``tol``.  The quadrature route integrates ``|f''/f'|`` by the trapezoid
    rule with ``f''`` from central differences of the exact ``f'``.
    Piecewise-affine maps have no ``f''``; their quadrature entry is NaN.
    Stitched maps are handled piece by piece.
    """
    if isinstance(f, Stitched):
        return _stitched_variation(f, resolution, tol, max_cells, quad_cells)
    iv = _base_interval(f)

    def partition_sum(cells):
        x = np.linspace(iv.lo, iv.hi, cells + 1)
        y = np.log(f._deriv(x))
        x, y = _insert_extrema(lambda t: np.log(f._deriv(t)), x, y)
        return float(np.abs(np.diff(y)).sum())

    n = resolution
    older, prev = None, partition_sum(n)
    while True:
        if 2 * n > max_cells:
            raise NumericError("log-derivative variation did not converge", last=prev, previous=older)
        n *= 2
        cur = partition_sum(n)
        if abs(cur - prev) < tol:
            break
        older, prev = prev, cur
    if isinstance(f, PiecewiseAffine):
        return VariationEstimate(cur, float("nan"), n)
    xq = np.linspace(iv.lo, iv.hi, max(n, quad_cells) + 1)
    g = np.abs(_fd_second(f, xq, iv) / f._deriv(xq))
    return VariationEstimate(cur, float(np.trapezoid(g, xq)), n)


def _stitched_variation(f: Stitched, resolution, tol, max_cells, quad_cells) -> VariationEstimate:
    ps = qs = 0.0
    cells = 0
    prev_right = None
    for piece, child in zip(f.pieces, f.children):
        left = float(child._deriv(np.array([piece.lo]))[0])
        right = float(child._deriv(np.array([piece.hi]))[0])
        jump_in = abs(math.log(left) - math.log(prev_right if prev_right is not None else 1.0))
        ps += jump_in
        qs += jump_in
        prev_right = right
        sub = _Restricted(child, piece)
        v = log_deriv_variation(sub, resolution, tol, max_cells, quad_cells)
        ps += v.partition_sum
        qs += v.quadrature
        cells += v.cells
    ps += abs(math.log(prev_right))
    qs += abs(math.log(prev_right))
    return VariationEstimate(ps, qs, cells)


class _Restricted(MapDescriptor):
    kind = "restricted"

    def __init__(self, f: MapDescriptor, iv: Interval):
        super().__init__(iv, {}, (f,))

    def _eval(self, x):
        return self.children[0]._eval(x)

    def _deriv(self, x):
        return self.children[0]._deriv(x)


def difference_quotients(func, lo: float, hi: float, n: int) -> tuple[float, float]:
    """Max forward and backward difference quotients of ``func`` on an ``n``-point mesh."""
    x = np.linspace(lo, hi, n)
    y = np.asarray(func(x), dtype=float)
    dx, dy = np.diff(x), np.diff(y)
    if np.any(dy <= 0):
        raise NumericError("map is not strictly increasing on the mesh", worst=float(dy.min()))
    return float(np.max(dy / dx)), float(np.max(dx / dy))


def lipschitz_estimate(f: MapDescriptor, mesh: int = 4097) -> tuple[float, float]:
    """(L_forward, L_backward) from adjacent mesh pairs over the domain."""
    if mesh < 2:
        raise ValueError("mesh must contain at least two points")
    iv = _base_interval(f)
    return difference_quotients(f._eval, iv.lo, iv.hi, mesh)


def is_strictly_increasing(f: MapDescriptor, mesh: int = 10_000) -> bool:
    iv = _base_interval(f)
    y = f._eval(np.linspace(iv.lo, iv.hi, mesh))
    return bool(np.all(np.diff(y) > 0))


# --------------------------------------------------------------------------
# serialization


def map_to_dict(f: MapDescriptor) -> dict:
    return f.to_dict()


def map_from_dict(d: dict) -> MapDescriptor:
    kind = d["kind"]
    p = d.get("params", {})
    dom = _domain_from_dict(d["domain"])
    kids = [map_from_dict(c) for c in d.get("children", [])]
    if kind == "affine":
        return Affine(p["slope"], p["offset"], dom)
    if kind == "bump":
        return Bump(p["lo"], p["hi"], p["eps"], dom)
    if kind == "moebius":
        return Moebius(p["a"], p["b"], p["c"], p["d"], p.get("shift", 0))
    if kind == "piecewise-affine":
        return PiecewiseAffine(p["xs"], p["ys"])
    if kind == "stitched":
        return Stitched([Interval(lo, hi) for lo, hi in p["pieces"]], kids, dom)
    if kind == "compose":
        return Compose(*kids)
    if kind == "inverse":
        return Inverse(kids[0])
    if kind == "iterate":
        return Iterate(kids[0], p["n"])
    raise ValueError(f"unknown map kind {kind!r}")
