"""Finitely generated groups of circle maps over the free-group word model."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConstructionError, ResourceError
from .map1d import (
    CIRCLE,
    Interval,
    MapDescriptor,
    Moebius,
    circle_point,
    invert,
    make_hyperbolic,
    map_from_dict,
    moebius_fixed_points,
)

MAX_RADIUS = 12
Letter = tuple[int, int]


@dataclass(frozen=True)
class Word:
    """Freely reduced word.  ``letters[0]`` is applied last (right-to-left)."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", reduce_letters(self.letters))

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((i, -s) for i, s in reversed(self.letters)))

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def label(self, names: Sequence[str] | None = None) -> str:
        if not self.letters:
            return "e"
        names = names or "abcdefghijklmnopqrstuvwxyz"
        return "".join(names[i] if s > 0 else names[i].upper() for i, s in self.letters)

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Inverse of ``label`` for the default alphabet (``A`` = ``a^-1``)."""
        if text in ("", "e"):
            return cls()
        return cls(tuple((ord(ch.lower()) - 97, 1 if ch.islower() else -1) for ch in text))

    def __repr__(self):
        return f"Word({self.label()!r})"


def reduce_letters(letters) -> tuple[Letter, ...]:
    out: list[Letter] = []
    for i, s in letters:
        if s not in (1, -1):
            raise ValueError("letter exponents must be +1 or -1")
        if out and out[-1] == (i, -s):
            out.pop()
        else:
            out.append((int(i), int(s)))
    return tuple(out)


def reduce_word(w: Word) -> Word:
    return Word(w.letters)


@dataclass(frozen=True)
class GroupAction:
    generators: tuple[MapDescriptor, ...]
    labels: tuple[str, ...] = ()
    max_radius: int = MAX_RADIUS
    _inverses: tuple[MapDescriptor, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        for g in gens:
            if not g.is_circle:
                raise ConstructionError("group actions are generated by circle maps")
        object.__setattr__(self, "generators", gens)
        if not self.labels:
            object.__setattr__(self, "labels", tuple("abcdefghijklmnopqrstuvwxyz"[: len(gens)]))
        object.__setattr__(self, "_inverses", tuple(invert(g) for g in gens))

    @property
    def k(self) -> int:
        return len(self.generators)

    def letter_map(self, letter: Letter) -> MapDescriptor:
        i, s = letter
        return self.generators[i] if s > 0 else self._inverses[i]

    def letters(self) -> list[Letter]:
        return [(i, s) for i in range(self.k) for s in (1, -1)]

    def to_dict(self) -> dict:
        return {"generators": [g.to_dict() for g in self.generators], "labels": list(self.labels)}

    @classmethod
    def from_dict(cls, d: dict) -> "GroupAction":
        return cls(tuple(map_from_dict(g) for g in d["generators"]), tuple(d.get("labels", ())))


def apply_word(action: GroupAction, w: Word, x):
    """Right-to-left composition of the letters of ``w`` at ``x``."""
    y = np.asarray(x, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    for letter in reversed(w.letters):
        y = action.letter_map(letter)._eval(y)
    return float(y[0]) if scalar else y


def word_derivative(action: GroupAction, w: Word, x):
    y = np.atleast_1d(np.asarray(x, dtype=float))
    d = np.ones_like(y)
    for letter in reversed(w.letters):
        g = action.letter_map(letter)
        d = d * g._deriv(y)
        y = g._eval(y)
    return d


def ball_size(k: int, radius: int) -> int:
    if k == 0:
        return 1
    if k == 1:
        return 2 * radius + 1
    # geometric sum of 2k(2k-1)^(m-1), m = 1..radius
    return 1 + k * ((2 * k - 1) ** radius - 1) // (k - 1)


def _check_budget(action: GroupAction, radius: int):
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius > action.max_radius:
        raise ResourceError(f"radius {radius} exceeds the configured budget {action.max_radius}")


def word_ball(action: GroupAction, radius: int) -> list[Word]:
    """All reduced words of length <= radius, ordered by length."""
    _check_budget(action, radius)
    out = [Word()]
    level = [()]
    for _ in range(radius):
        nxt = []
        for letters in level:
            for lt in action.letters():
                if letters and letters[0] == (lt[0], -lt[1]):
                    continue
                nxt.append((lt,) + letters)
        level = nxt
        out.extend(Word(t) for t in level)
    return out


@dataclass
class BallImages:
    """Images of a point set under every word of a ball, built level by level.

    ``values[m]`` has shape (words at length m, points); ``first[m]`` is the
    index of the last-applied letter of each word and ``parent[m]`` the
    index of the word it extends at level ``m - 1``.
    """

    action: GroupAction
    values: list[np.ndarray]
    first: list[np.ndarray]
    parent: list[np.ndarray]

    def words(self, level: int) -> list[Word]:
        letters = self.action.letters()
        out = []
        for j in range(len(self.first[level])):
            seq = []
            m, jj = level, j
            while m > 0:
                seq.append(letters[self.first[m][jj]])
                jj = self.parent[m][jj]
                m -= 1
            out.append(Word(tuple(seq)))
        return out

    def word(self, level: int, j: int) -> Word:
        letters = self.action.letters()
        seq = []
        m = level
        while m > 0:
            seq.append(letters[self.first[m][j]])
            j = self.parent[m][j]
            m -= 1
        return Word(tuple(seq))

    def flat(self) -> np.ndarray:
        return np.concatenate([v.reshape(-1) for v in self.values])


def ball_images(action: GroupAction, points, radius: int) -> BallImages:
    _check_budget(action, radius)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    letters = action.letters()
    inv_index = [letters.index((i, -s)) for i, s in letters]
    values = [pts[None, :].copy()]
    first = [np.array([-1])]
    parent = [np.array([-1])]
    for m in range(1, radius + 1):
        prev_v, prev_f = values[-1], first[-1]
        vs, fs, ps = [], [], []
        for li, lt in enumerate(letters):
            keep = np.nonzero(prev_f != inv_index[li])[0]
            if keep.size == 0:
                continue
            g = action.letter_map(lt)
            vs.append(g._eval(prev_v[keep].reshape(-1)).reshape(keep.size, -1))
            fs.append(np.full(keep.size, li))
            ps.append(keep)
        values.append(np.concatenate(vs))
        first.append(np.concatenate(fs))
        parent.append(np.concatenate(ps))
    return BallImages(action, values, first, parent)


def orbit(action: GroupAction, x: float, radius: int) -> list[tuple[Word, float]]:
    """(word, w(x) mod 1) for every word in the ball."""
    imgs = ball_images(action, [x], radius)
    out = []
    for m in range(radius + 1):
        ws = imgs.words(m)
        vals = imgs.values[m][:, 0] % 1.0
        out.extend(zip(ws, vals.tolist()))
    return out


def distinct_count(values, tol: float = 1e-9) -> int:
    """Number of distinct points mod 1 at the given tolerance."""
    v = np.sort(np.asarray(values, dtype=float) % 1.0)
    if v.size == 0:
        return 0
    gaps = np.diff(np.concatenate([v, [v[0] + 1.0]]))
    n = int(np.sum(gaps > tol))
    return max(n, 1)


# --------------------------------------------------------------------------
# fixed points, minimal sets, gaps


def circle_fixed_points(f: MapDescriptor, mesh: int = 4096) -> list[float]:
    """Isolated fixed points in ``[0, 1)`` of a circle map (none for an identity)."""
    if isinstance(f, Moebius):
        return moebius_fixed_points(f)
    x = np.linspace(0.0, 1.0, mesh + 1)
    disp = f._eval(x) - x
    if np.ptp(disp) < 1e-14 and abs(disp[0] - round(disp[0])) < 1e-14:
        return []
    pts = []
    for k in range(math.floor(disp.min()), math.ceil(disp.max()) + 1):
        g = disp - k
        for j in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]:
            if g[j] == 0:
                pts.append(x[j])
            elif g[j + 1] != 0:
                pts.append(brentq(lambda t: float(f._eval(np.array([t]))[0]) - t - k, x[j], x[j + 1], xtol=1e-15))
    pts = sorted(p % 1.0 for p in pts)
    dedup = []
    for p in pts:
        if not dedup or p - dedup[-1] > 1e-10:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] + 1.0 - dedup[-1] < 1e-10:
        dedup.pop()
    return dedup


@dataclass(frozen=True)
class Gap:
    lo: float
    hi: float
    stabilizer: Word | None = None

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)


@dataclass(frozen=True)
class GapSet:
    """Complementary intervals of an approximate minimal set.

    ``lo`` lies in ``[0, 1)``; a gap straddling 0 has ``hi > 1``.
    """

    gaps: tuple[Gap, ...]
    radius: int
    points: int

    @property
    def coverage(self) -> float:
        return float(sum(g.length for g in self.gaps))

    def __len__(self):
        return len(self.gaps)

    def largest(self) -> Gap:
        return max(self.gaps, key=lambda g: g.length)

    def to_csv(self, path, names=None):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gap_lo", "gap_hi", "length", "stabilizer_word"])
            for g in self.gaps:
                lab = g.stabilizer.label(names) if g.stabilizer is not None else ""
                w.writerow([f"{g.lo:.17g}", f"{g.hi:.17g}", f"{g.length:.17g}", lab])


def default_seed(action: GroupAction) -> float:
    for g in action.generators:
        pts = circle_fixed_points(g)
        if pts:
            return pts[0]
    return 0.0


def _cloud(action: GroupAction, seed: float, radius: int) -> np.ndarray:
    seeds = [seed]
    for g in action.generators:
        seeds.extend(circle_fixed_points(g))
    pts = ball_images(action, seeds, radius).flat() % 1.0
    pts = np.unique(pts)
    # merge numerically coincident points
    keep = np.concatenate([[True], np.diff(pts) > 1e-13])
    return pts[keep]


def _complement(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    los = pts
    his = np.concatenate([pts[1:], [pts[0] + 1.0]])
    return los, his


def coarse_radius(k: int, radius: int) -> int:
    """Largest radius whose ball is at most a quarter the size of ``ball(radius)``."""
    target = ball_size(k, radius) / 4.0
    r = radius - 1
    while r > 0 and ball_size(k, r) > target:
        r -= 1
    return max(r, 0)


def approximate_minimal_set(action: GroupAction, radius: int, seed: float | None = None,
                            gap_floor: float = 1e-6, persistence: float = 0.9) -> GapSet:
    """Gaps of the closure of ``orbit(seed)`` together with the orbits of generator fixed points.

    A complementary interval of the radius-``radius`` point cloud counts as a
    gap when it is longer than ``gap_floor`` and keeps at least
    ``persistence`` of the length of the complementary interval containing it
    at the coarser radius ``coarse_radius``; intervals that keep shrinking as
    the orbit is refined are discretisation holes, not gaps.
    """
    if radius < 1:
        raise ValueError("radius must be at least 1")
    _check_budget(action, radius)
    if seed is None:
        seed = default_seed(action)
    fine = _cloud(action, seed, radius)
    coarse = _cloud(action, seed, coarse_radius(action.k, radius))
    flo, fhi = _complement(fine)
    clo, chi = _complement(coarse)
    # fine points within 1e-9 below a coarse point are its roundoff copies
    pos = np.searchsorted(coarse, flo + 1e-9, side="right") - 1
    # pos == -1 only for fine intervals before the first coarse point; those sit in the wrapping one
    pos = np.where(pos < 0, coarse.size - 1, pos)
    clen = chi[pos] - clo[pos]
    flen = fhi - flo
    keep = (flen > gap_floor) & (flen >= persistence * clen)
    gaps = tuple(Gap(float(a), float(b)) for a, b in zip(flo[keep], fhi[keep]))
    return GapSet(gaps, radius, int(fine.size))


def _circle_dist(a, b):
    d = (np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(d, 1.0 - d)


def refine_gap(action: GroupAction, gap: Gap, w: Word) -> Gap | None:
    """Snap gap endpoints to nearby fixed points of ``w``; None if there are none."""
    out = []
    span = gap.length
    for e in (gap.lo, gap.hi):
        disp = lambda t: apply_word(action, w, t) - t
        k = round(disp(e))
        g = lambda t: disp(t) - k
        lo, hi = e - 0.25 * span, e + 0.25 * span
        if g(lo) * g(hi) > 0:
            return None
        out.append(brentq(g, lo, hi, xtol=1e-15))
    return Gap(out[0], out[1], w)


def gap_stabilizer_search(action: GroupAction, gap: Gap | Interval, radius: int,
                          tol: float = 1e-8) -> tuple[Word, Gap] | None:
    """Shortest non-identity word fixing both gap endpoints (mod 1).

    The endpoints of approximate gaps carry the approximation error of the
    point cloud, so words are first screened at a loose tolerance and then
    the endpoints are refined to exact fixed points of the candidate; the
    refined residual must be below ``tol``.  Returns ``(word, refined gap)``
    or None when nothing is found within the radius.
    """
    if isinstance(gap, Interval):
        gap = Gap(gap.lo, gap.hi)
    imgs = ball_images(action, [gap.lo, gap.hi], radius)
    screen = max(1e-3 * gap.length, tol)
    for m in range(1, radius + 1):
        res = np.max(_circle_dist(imgs.values[m], [gap.lo, gap.hi]), axis=1)
        for j in np.argsort(res):
            if res[j] > screen:
                break
            w = imgs.word(m, j)
            refined = refine_gap(action, gap, w)
            if refined is None:
                continue
            if max(abs(refined.lo - gap.lo), abs(refined.hi - gap.hi)) > screen:
                continue
            ends = np.array([refined.lo, refined.hi])
            if np.max(_circle_dist(apply_word(action, w, ends), ends)) >= tol:
                continue
            inner = np.linspace(refined.lo, refined.hi, 66)[1:-1]
            disp = apply_word(action, w, inner) - inner
            disp -= np.round(np.median(disp))
            if not (np.all(disp > 0) or np.all(disp < 0)):
                continue
            return w, refined
    return None


def classify(action: GroupAction, radius: int, seed: float | None = None, gap_floor: float = 1e-6) -> str:
    """Heuristic label: minimal-like, exceptional-like or finite-orbit-like."""
    gs = approximate_minimal_set(action, radius, seed, gap_floor)
    if len(gs) == 0:
        return "minimal-like"
    rc = coarse_radius(action.k, radius)
    for g in gs.gaps[:8]:
        fine = distinct_count(ball_images(action, [g.lo], radius).flat())
        coarse = distinct_count(ball_images(action, [g.lo], rc).flat())
        if fine == coarse and fine < ball_size(action.k, radius):
            return "finite-orbit-like"
    return "exceptional-like"


# --------------------------------------------------------------------------
# Schottky groups


@dataclass(frozen=True)
class Arc:
    """Closed arc ``[lo, hi]`` of R/Z in lift coordinates (``hi - lo < 1``)."""

    lo: float
    hi: float

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def margin(self, x) -> np.ndarray:
        """Signed distance inside the arc (positive = interior)."""
        t = (np.asarray(x) - self.lo) % 1.0
        return np.minimum(t, self.length - t)


@dataclass(frozen=True)
class SchottkyAction:
    action: GroupAction
    sources: tuple[Arc, ...]
    targets: tuple[Arc, ...]
    pingpong_margin: float


def _arcs_disjoint(arcs: Sequence[Arc]) -> bool:
    pts = []
    for a in arcs:
        lo = a.lo % 1.0
        pts.append((lo, lo + a.length))
    pts.sort()
    for (l1, h1), (l2, _) in zip(pts, pts[1:]):
        if l2 <= h1:
            return False
    return pts[-1][1] < pts[0][0] + 1.0


def make_schottky(arcs: Sequence[Arc], multipliers: Sequence[float], min_margin: float = 1e-6) -> SchottkyAction:
    """Hyperbolic generators pairing ``arcs = (A1, B1, A2, B2, ...)``.

    Generator ``g_i`` has its repelling fixed point at the centre of ``A_i``,
    its attracting one at the centre of ``B_i`` and multiplier
    ``multipliers[i]``.  Ping-pong requires ``g_i`` to map the closed
    complement of ``A_i`` into the interior of ``B_i``; this is checked on the
    endpoints of ``A_i`` with a margin of at least ``min_margin``.
    """
    arcs = list(arcs)
    if len(arcs) != 2 * len(multipliers):
        raise ConstructionError("need two arcs per multiplier")
    if not _arcs_disjoint(arcs):
        raise ConstructionError("pairing arcs must be pairwise disjoint")
    gens, worst = [], math.inf
    sources, targets = arcs[0::2], arcs[1::2]
    for i, (A, B, lam) in enumerate(zip(sources, targets, multipliers)):
        g = make_hyperbolic(B.center, A.center, lam)
        imgs = g._eval(np.array([A.lo, A.hi]))
        margin = float(np.min(B.margin(imgs)))
        if margin < min_margin:
            raise ConstructionError(f"ping-pong fails: g{i + 1}(S^1 \\ A{i + 1}) not inside B{i + 1} "
                                    f"(margin {margin:.3g})")
        worst = min(worst, margin)
        gens.append(g)
    return SchottkyAction(GroupAction(tuple(gens)), tuple(sources), tuple(targets), worst)


def default_schottky(multiplier: float = 4.0, half_width: float = 0.11) -> SchottkyAction:
    """Two generators with interlaced arcs centred at 1/2, 0, 3/4, 1/4."""
    hw = half_width
    if not 0 < hw < 0.125:
        raise ConstructionError("half-width must lie in (0, 1/8) for the arcs to be disjoint")
    arcs = [Arc(0.5 - hw, 0.5 + hw), Arc(-hw, hw), Arc(0.75 - hw, 0.75 + hw), Arc(0.25 - hw, 0.25 + hw)]
    return make_schottky(arcs, [multiplier, multiplier])


def rotation_action(alpha: float) -> GroupAction:
    from .map1d import make_rotation

    return GroupAction((make_rotation(alpha),))


GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
