"""Equivariant extension of a seed homeomorphism and its audits.

Interval case: on ``[a, b]`` with a driver ``f`` that has no interior fixed
point, a seed on ``D = [f(c), c]`` is spread to every tile
``f^n(D)`` by ``h = f^n o seed o f^-n``.  Circle case: a homeomorphism of a
gap ``I`` is transported to the images ``v(I)`` by ``h = v o h_I o v^-1``.
Both are truncated (tile depth, word radius) and are the identity beyond.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .action import GroupAction, Word, apply_word, ball_images
from .errors import (
    ConstructionError,
    EquivarianceError,
    GeometryError,
    NumericError,
    OrientationError,
)
from .map1d import (
    CIRCLE,
    Interval,
    MapDescriptor,
    invert,
    make_bump,
    make_piecewise_affine,
)

SEED_ENDPOINT_TOL = 1e-12


def fundamental_domain(f: MapDescriptor, c: float) -> Interval:
    """``[f(c), c]``; requires ``f(c) < c`` so forward iterates move towards the left end."""
    fc = float(f(c))
    if fc >= c:
        raise OrientationError(f"f(c) = {fc!r} is not below c = {c!r}; pass the inverse map")
    return Interval(fc, c)


def slope_jump_seed(domain: Interval, slope: float = 2.0) -> MapDescriptor:
    """Piecewise-affine self-map of ``domain`` with slopes ``slope`` then ``1/slope``.

    The break sits at one ``(1 + slope)``-th of the way along, which keeps
    both endpoints fixed.  Its bi-Lipschitz constant is ``max(slope, 1/slope)``.
    """
    if slope <= 0:
        raise ValueError("slope must be positive")
    lo, hi = domain.lo, domain.hi
    L = hi - lo
    t = L / (1.0 + slope)
    return make_piecewise_affine([lo, lo + t, hi], [lo, lo + slope * t, hi])


def slope_jump_point(domain: Interval, slope: float = 2.0) -> float:
    return domain.lo + domain.length / (1.0 + slope)


def smooth_seed(domain: Interval, eps: float = 0.5) -> MapDescriptor:
    """A C-infinity self-map of ``domain`` fixing both ends (a bump)."""
    return make_bump(domain, eps)


class EquivariantHomeo(MapDescriptor):
    """Common base; derivatives are deliberately not provided."""

    def _deriv(self, x):
        raise NotImplementedError("equivariant extensions are audited through difference quotients")


# --------------------------------------------------------------------------
# interval case


class IntervalExtension(EquivariantHomeo):
    """``h = f^n o seed o f^-n`` on tile ``n = [f^{n+1}(c), f^n(c)]``, ``-n_bwd <= n <= n_fwd``.

    Both depths are at most ``n_max``; a side stops sooner when its tiles
    shrink below ``tile_floor`` times the fundamental-domain length.
    """

    kind = "interval_extension"

    def __init__(self, f: MapDescriptor, seed: MapDescriptor, c: float, n_max: int = 30,
                 fault_tile: int | None = None, tile_floor: float = 1e-13):
        if f.is_circle:
            raise ConstructionError("interval extension needs an interval driver")
        if n_max < 1:
            raise ValueError("n_max must be at least 1")
        D = fundamental_domain(f, c)
        ends = np.asarray(seed(np.array([D.lo, D.hi])))
        mismatch = float(np.max(np.abs(ends - [D.lo, D.hi])))
        if mismatch > SEED_ENDPOINT_TOL * max(1.0, abs(c)):
            raise ConstructionError(f"seed moves the fundamental-domain endpoints by {mismatch:.3g}")
        super().__init__(f.domain, {"c": c, "n_max": n_max, "fault_tile": fault_tile,
                                    "tile_floor": tile_floor}, (f, seed))
        self.tile_floor = tile_floor
        self.f, self.seed, self.c, self.n_max = f, seed, float(c), int(n_max)
        self.f_inv = invert(f)
        self.fundamental = D
        self.fault_tile = fault_tile
        # boundaries[j] = f^(n_fwd + 1 - j)(c), ascending; each side stops early
        # once tiles drop below tile_floor (identity is then exact to that size)
        floor = tile_floor * D.length
        fwd = [self.c]
        for _ in range(n_max + 1):
            nxt = float(f._eval(np.array([fwd[-1]]))[0])
            if fwd[-1] - nxt < floor:
                break
            fwd.append(nxt)
        bwd = [self.c]
        for _ in range(n_max):
            nxt = float(self.f_inv._eval(np.array([bwd[-1]]))[0])
            if nxt - bwd[-1] < floor:
                break
            bwd.append(nxt)
        if len(fwd) < 3 or len(bwd) < 2:
            raise NumericError("driver too weak or too strong to build tiles", n_fwd=len(fwd), n_bwd=len(bwd))
        self.n_fwd, self.n_bwd = len(fwd) - 2, len(bwd) - 1
        self.boundaries = np.array(fwd[::-1] + bwd[1:])
        if np.any(np.diff(self.boundaries) <= 0):
            raise NumericError("tile boundaries are not strictly increasing")

    @property
    def tiles(self) -> list[tuple[int, Interval]]:
        b = self.boundaries
        return [(self.n_fwd - j, Interval(b[j], b[j + 1])) for j in range(b.size - 1)]

    @property
    def zone(self) -> Interval:
        """Where both ``h`` and ``h o f`` are defined by conjugation."""
        return Interval(self.boundaries[1], self.boundaries[-1])

    @property
    def truncation_mass(self) -> float:
        iv = self.domain
        return float((self.boundaries[0] - iv.lo) + (iv.hi - self.boundaries[-1]))

    def tile_index(self, x: np.ndarray) -> np.ndarray:
        """Tile number of each point; a huge sentinel outside the conjugation range."""
        j = np.searchsorted(self.boundaries, x, side="right") - 1
        inside = (j >= 0) & (j < self.boundaries.size - 1)
        n = self.n_fwd - j
        return np.where(inside, n, np.iinfo(np.int64).max)

    def _power(self, y: np.ndarray, n: int) -> np.ndarray:
        g = self.f if n > 0 else self.f_inv
        for _ in range(abs(n)):
            y = g._eval(y)
        return y

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        out = x.copy()
        n_of = self.tile_index(x)
        D = self.fundamental
        for n in np.unique(n_of):
            if n == np.iinfo(np.int64).max:
                continue
            sel = n_of == n
            y = np.clip(self._power(x[sel], -int(n)), D.lo, D.hi)
            outer = int(n) + 1 if self.fault_tile is not None and n == self.fault_tile else int(n)
            out[sel] = self._power(self.seed._eval(y), outer)
        return out

    def _invert(self):
        if self.fault_tile is not None:
            return super()._invert()
        return IntervalExtension(self.f, invert(self.seed), self.c, self.n_max, tile_floor=self.tile_floor)


def extend_interval(f: MapDescriptor, seed: MapDescriptor, n_max: int = 30, c: float | None = None,
                    fault_tile: int | None = None) -> IntervalExtension:
    """Spread ``seed`` from ``[f(c), c]`` over the interval.

    ``c`` defaults to the right end of the seed's domain.  ``fault_tile``
    corrupts one tile (outer power off by one) for negative-control runs.
    """
    if c is None:
        if seed.is_circle:
            raise ValueError("pass c explicitly for a seed without an interval domain")
        c = seed.domain.hi
    return IntervalExtension(f, seed, c, n_max, fault_tile)


# --------------------------------------------------------------------------
# circle case


class _GapDriver(MapDescriptor):
    """A word acting on the lift window of a gap it stabilises."""

    kind = "gap_driver"

    def __init__(self, action: GroupAction, w: Word, gap: Interval, shift: int):
        super().__init__(gap, {"word": w.label(action.labels), "shift": shift})
        self.action, self.w, self.shift = action, w, shift

    def _eval(self, x):
        return apply_word(self.action, self.w, x) - self.shift

    def _deriv(self, x):
        from .action import word_derivative

        return word_derivative(self.action, self.w, x)

    def _invert(self):
        return _GapDriver(self.action, self.w.inverse(), self.domain, -self.shift)


def gap_driver(action: GroupAction, gap: Interval, stabilizer: Word) -> tuple[MapDescriptor, Word]:
    """Stabiliser (or its inverse) as an interval map of ``gap`` pushing the midpoint left."""
    c = 0.5 * (gap.lo + gap.hi)
    for w in (stabilizer, stabilizer.inverse()):
        shift = round(apply_word(action, w, gap.lo) - gap.lo)
        drv = _GapDriver(action, w, gap, shift)
        if float(drv._eval(np.array([c]))[0]) < c:
            return drv, w
    raise OrientationError("stabilizer fixes the gap midpoint")


def stabilized_gap_seed(action: GroupAction, gap: Interval, stabilizer: Word, slope: float = 2.0,
                        n_max: int = 30, smooth: bool = False) -> IntervalExtension:
    """Homeomorphism of ``gap`` commuting with its stabiliser, from a seed on a fundamental domain."""
    drv, _ = gap_driver(action, gap, stabilizer)
    c = 0.5 * (gap.lo + gap.hi)
    D = fundamental_domain(drv, c)
    seed = smooth_seed(D) if smooth else slope_jump_seed(D, slope)
    return IntervalExtension(drv, seed, c, n_max)


@dataclass(frozen=True)
class GapImage:
    lo: float
    hi: float
    word: Word  # maps the base gap onto this one
    shift: int  # floor of the raw lift image of the base gap's left end
    depth: int


class CircleExtension(EquivariantHomeo):
    """``h = v o h_I o v^-1`` on each enumerated image ``v(I)``, identity elsewhere."""

    kind = "circle_extension"

    def __init__(self, action: GroupAction, gap: Interval, seed: MapDescriptor,
                 stabilizer: Word | None, radius: int, consistency_tol: float = 1e-9,
                 overlap_tol: float = 1e-12):
        super().__init__(CIRCLE, {"radius": radius, "gap": gap.to_dict()}, (seed,))
        self.action, self.gap, self.seed = action, gap, seed
        self.stabilizer, self.radius = stabilizer, int(radius)
        self.gaps, self.duplicates = self._enumerate(overlap_tol)
        self.los = np.array([g.lo for g in self.gaps])
        self.his = np.array([g.hi for g in self.gaps])
        # longer duplicates differ from the canonical word by stabiliser powers,
        # whose conditioning near the gap ends amplifies roundoff; they are recorded only
        self.consistency, self.consistency_all = self._consistency()
        if self.consistency > consistency_tol:
            raise EquivarianceError(
                f"two words define h differently on one gap (discrepancy {self.consistency:.3g})")

    def _enumerate(self, overlap_tol):
        I = self.gap
        imgs = ball_images(self.action, [I.lo, I.hi], self.radius)
        cands = []
        for m in range(self.radius + 1):
            vals = imgs.values[m]
            for j in range(vals.shape[0]):
                cands.append((m, j, vals[j, 0], vals[j, 1]))
        lo_raw = np.array([c[2] for c in cands])
        hi_raw = np.array([c[3] for c in cands])
        shift = np.floor(lo_raw)
        lo, hi = lo_raw - shift, hi_raw - shift
        length = hi - lo
        order = np.argsort(lo, kind="stable")
        # cluster by left end; images are either disjoint or coincide
        clusters, cur = [], [order[0]]
        for a, b in zip(order[:-1], order[1:]):
            if lo[b] - lo[a] < 0.5 * min(length[a], length[b]):
                cur.append(b)
            else:
                clusters.append(cur)
                cur = [b]
        clusters.append(cur)
        if len(clusters) > 1:
            a, b = clusters[-1][0], clusters[0][0]
            if lo[b] + 1.0 - lo[a] < 0.5 * min(length[a], length[b]):
                clusters[0] = clusters.pop() + clusters[0]
        gaps, dups = [], []
        for cl in clusters:
            rep = min(cl)  # BFS order: shortest word first
            m, j = cands[rep][0], cands[rep][1]
            w = imgs.word(m, j)
            gi = GapImage(float(lo[rep]), float(hi[rep]), w, int(shift[rep]), m)
            gaps.append(gi)
            for other in cl:
                if other != rep:
                    mo, jo = cands[other][0], cands[other][1]
                    dups.append((gi, imgs.word(mo, jo), float(lo_raw[other] - lo[rep])))
        gaps.sort(key=lambda g: g.lo)
        los = np.array([g.lo for g in gaps])
        his = np.array([g.hi for g in gaps])
        if gaps:
            overlap = np.concatenate([his[:-1] - los[1:], [his[-1] - 1.0 - los[0]]]) if len(gaps) > 1 \
                else np.array([his[0] - los[0] - 1.0])
            worst = float(np.max(overlap))
            if worst > overlap_tol:
                raise GeometryError(f"gap images overlap by {worst:.3g}")
        return gaps, dups

    def _through(self, g: GapImage, w: Word, shift: float, x: np.ndarray) -> np.ndarray:
        """``w o h_I o w^-1`` at lift points ``x`` of ``g``'s window."""
        A = self.action
        I = self.gap
        y = apply_word(A, w.inverse(), x + shift)
        y = np.clip(y, I.lo, I.hi)
        return apply_word(A, w, self.seed._eval(y)) - shift

    def _consistency(self) -> tuple[float, float]:
        """Max disagreement over (equal-length ties, all duplicate words in the ball)."""
        ties = every = 0.0
        for g, w, raw_shift in self.duplicates:
            x = np.linspace(g.lo, g.hi, 35)[1:-1]
            ref = self._through(g, g.word, g.shift, x)
            alt = self._through(g, w, round(raw_shift), x)
            d = float(np.max(np.abs(ref - alt)))
            every = max(every, d)
            if len(w) == g.depth:
                ties = max(ties, d)
        return ties, every

    def locate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(gap index or -1, lift point inside that gap's window)."""
        t = np.asarray(x, dtype=float) % 1.0
        idx = np.searchsorted(self.los, t, side="right") - 1
        xl = t.copy()
        inside = np.zeros(t.shape, dtype=bool)
        ok = idx >= 0
        inside[ok] = t[ok] < self.his[idx[ok]]
        # the last gap may wrap past 1
        if self.gaps and self.his[-1] > 1.0:
            wrap = ~inside & (t + 1.0 < self.his[-1])
            idx = np.where(wrap, len(self.gaps) - 1, idx)
            xl = np.where(wrap, t + 1.0, xl)
            inside |= wrap
        return np.where(inside, idx, -1), xl

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        idx, xl = self.locate(x)
        out = x.copy()
        for i in np.unique(idx):
            if i < 0:
                continue
            sel = idx == i
            g = self.gaps[i]
            out[sel] = self._through(g, g.word, g.shift, xl[sel]) + (x[sel] - xl[sel])
        return out

    def depth(self, x) -> np.ndarray:
        """Word length of the gap containing each point; -1 off the enumerated orbit."""
        idx, _ = self.locate(x)
        d = np.array([g.depth for g in self.gaps] + [-1])
        return d[idx]

    @property
    def truncation_mass(self) -> float:
        return float(1.0 - np.sum(self.his - self.los))


def extend_circle(action: GroupAction, gap: Interval, seed: MapDescriptor, stabilizer: Word | None,
                  radius: int = 8, consistency_tol: float = 1e-9, commute_tol: float = 1e-9) -> CircleExtension:
    """Transport ``seed`` (a homeomorphism of ``gap``) along the gap orbit over the word ball.

    With a stabiliser the seed must already commute with it (build it with
    ``stabilized_gap_seed``); this is checked inside the seed's
    conjugation zone when the seed is an interval extension, else on the whole gap.
    """
    if stabilizer is not None and not stabilizer.is_identity:
        drv, _ = gap_driver(action, gap, stabilizer)
        zone = seed.zone if isinstance(seed, IntervalExtension) else gap
        res = commutation_residual(seed, drv, mesh=2001, region=zone)
        if res > commute_tol:
            raise EquivarianceError(f"seed does not commute with the stabilizer (residual {res:.3g})")
    return CircleExtension(action, gap, seed, stabilizer, radius, consistency_tol)


# --------------------------------------------------------------------------
# audits


def commutation_residual(h: EquivariantHomeo | MapDescriptor, driver, mesh: int = 10_000,
                         region: Interval | None = None) -> float:
    """``sup |h(g x) - g(h x)|`` over the mesh, restricted to the conjugation zone.

    ``driver`` is a single map (interval case) or a GroupAction (circle
    case, all generators and inverses).
    """
    if isinstance(driver, GroupAction):
        if not isinstance(h, CircleExtension):
            raise TypeError("a group driver needs a circle extension")
        x = np.linspace(0.0, 1.0, mesh, endpoint=False)
        dx = h.depth(x)
        worst = 0.0
        for lt in driver.letters():
            g = driver.letter_map(lt)
            gx = g._eval(x)
            dg = h.depth(gx)
            keep = ((dx >= 0) & (dx < h.radius)) | ((dx < 0) & (dg < h.radius))
            if not np.any(keep):
                continue
            r = h._eval(gx[keep]) - g._eval(h._eval(x[keep]))
            worst = max(worst, float(np.max(np.abs(r))))
        return worst
    if region is None:
        region = h.zone if isinstance(h, IntervalExtension) else driver.domain
    x = np.linspace(region.lo, region.hi, mesh)
    return float(np.max(np.abs(h._eval(driver._eval(x)) - driver._eval(h._eval(x)))))


@dataclass
class DiagnosticReport:
    M: float
    V: float
    k: int
    cap: float
    empirical_fwd: float
    empirical_bwd: float
    margin: float
    truncation_mass: float
    residuals: dict = field(default_factory=dict)
    per_tile: list = field(default_factory=list)
    rel_tol: float = 1e-6
    monotone: bool = True

    @property
    def empirical(self) -> float:
        return max(self.empirical_fwd, self.empirical_bwd)

    @property
    def passed(self) -> bool:
        return self.monotone and self.empirical <= self.cap * (1.0 + self.rel_tol)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _per_tile(h: IntervalExtension, x: np.ndarray, y: np.ndarray):
    q = np.diff(y) / np.diff(x)
    n_of = h.tile_index(x[:-1])
    rows = []
    for n in np.unique(n_of):
        if n == np.iinfo(np.int64).max:
            continue
        qs = q[n_of == n]
        rows.append({"tile": int(n), "fwd": float(qs.max()), "bwd": float((1.0 / qs).max())})
    return rows


def lipschitz_bound_audit(h: EquivariantHomeo, M: float, V: float, k: int = 1, mesh: int = 1 << 14,
                          residuals: dict | None = None, rel_tol: float = 1e-6) -> DiagnosticReport:
    """Empirical bi-Lipschitz constants on a uniform mesh against ``M e^{kV}``.

    A map that fails to increase on the mesh gets infinite constants and fails.
    """
    if isinstance(h, CircleExtension) or h.is_circle:
        lo, hi = 0.0, 1.0
    else:
        lo, hi = h.domain.lo, h.domain.hi
    x = np.linspace(lo, hi, mesh)
    y = h._eval(x)
    dx, dy = np.diff(x), np.diff(y)
    monotone = bool(np.all(dy > 0))
    if monotone:
        fwd, bwd = float(np.max(dy / dx)), float(np.max(dx / dy))
    else:
        fwd = bwd = float("inf")
    cap = float(M * np.exp(k * V))
    emp = max(fwd, bwd)
    per_tile = _per_tile(h, x, y) if isinstance(h, IntervalExtension) and monotone else []
    trunc = float(getattr(h, "truncation_mass", 0.0))
    return DiagnosticReport(float(M), float(V), int(k), cap, fwd, bwd, cap / emp, trunc,
                            dict(residuals or {}), per_tile, rel_tol, monotone)


def nondifferentiability_score(h: MapDescriptor, x: float, scales) -> float:
    """Spread of one-sided difference quotients at the two smallest scales.

    At a corner both one-sided slopes persist as the scale shrinks, so the
    spread stays near their difference; for a C^1 map it tends to zero.
    """
    s = np.sort(np.asarray(scales, dtype=float))
    if s.size < 2:
        raise ValueError("need at least two scales")
    if s[0] < 1e-12:
        raise NumericError("difference-quotient scale below the 1e-12 floor", smallest=float(s[0]))
    use = s[:2]
    hx = float(h._eval(np.array([x]))[0])
    right = (h._eval(x + use) - hx) / use
    left = (hx - h._eval(x - use)) / use
    q = np.concatenate([right, left])
    return float(q.max() - q.min())
