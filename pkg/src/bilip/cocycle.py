"""Real cocycles over group actions, skew products and transfer functions."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .action import GroupAction, Word, apply_word, ball_images, ball_size
from .errors import NumericError
from .map1d import MapDescriptor, compose, invert

GeneratorValue = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Cocycle:
    """Values ``c(g_i, x)`` on the generators, extended to words by the chain rule.

    ``c(fg, x) = c(g, x) + c(f, g(x))``, ``c(e, x) = 0`` and
    ``c(g^-1, x) = -c(g, g^-1(x))``, so the cocycle relation holds on words by
    construction.
    """

    action: GroupAction
    generator_values: tuple[GeneratorValue, ...]
    name: str = ""

    def __post_init__(self):
        if len(self.generator_values) != self.action.k:
            raise ValueError("need one value function per generator")

    def letter_value(self, letter, x: np.ndarray) -> np.ndarray:
        i, s = letter
        if s > 0:
            return self.generator_values[i](x)
        y = self.action.letter_map(letter)._eval(x)
        return -self.generator_values[i](y)


def cocycle_eval(c: Cocycle, w: Word, x):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    total = np.zeros_like(arr)
    for letter in reversed(w.letters):
        total += c.letter_value(letter, arr)
        arr = c.action.letter_map(letter)._eval(arr)
    return float(total[0]) if np.ndim(x) == 0 else total


def zero_cocycle(action: GroupAction) -> Cocycle:
    return Cocycle(action, tuple(np.zeros_like for _ in range(action.k)), "zero")


def constant_cocycle(action: GroupAction, betas: Sequence[float]) -> Cocycle:
    """``c(g_i, x) = beta_i``; on a free action this drifts linearly along words."""
    fns = tuple((lambda b: (lambda x: np.full_like(x, b)))(float(b)) for b in betas)
    return Cocycle(action, fns, "constant")


def coboundary(action: GroupAction, phi: Callable[[np.ndarray], np.ndarray]) -> Cocycle:
    """``c(g, x) = phi(g(x)) - phi(x)``."""
    fns = tuple((lambda g: (lambda x: phi(g._eval(x)) - phi(x)))(g) for g in action.generators)
    return Cocycle(action, fns, "coboundary")


def derivative_cocycle(theta1: GroupAction, theta2: GroupAction, phi: MapDescriptor) -> Cocycle:
    """``c(g, x) = log theta1(g)'(x) - log theta2(g)'(phi(x))``.

    If ``phi`` conjugates ``theta1`` to ``theta2`` this is the coboundary of
    ``-log phi'``.
    """
    if theta1.k != theta2.k:
        raise ValueError("actions must share the generator alphabet")

    def make(g1, g2):
        def value(x):
            d1 = g1._deriv(x)
            d2 = g2._deriv(phi._eval(x))
            if np.any(d1 <= 0) or np.any(d2 <= 0):
                raise NumericError("nonpositive derivative in derivative cocycle",
                                   min_d1=float(d1.min()), min_d2=float(d2.min()))
            return np.log(d1) - np.log(d2)

        return value

    fns = tuple(make(g1, g2) for g1, g2 in zip(theta1.generators, theta2.generators))
    return Cocycle(theta1, fns, "derivative")


def conjugate_action(action: GroupAction, psi: MapDescriptor) -> GroupAction:
    """Generators ``psi o g o psi^-1``."""
    psi_inv = invert(psi)
    return GroupAction(tuple(compose(psi, g, psi_inv) for g in action.generators), action.labels)


def log_deriv_transfer(psi: MapDescriptor) -> Callable[[np.ndarray], np.ndarray]:
    """``x -> -log psi'(x)``, the transfer function of the derivative cocycle of ``psi``."""
    return lambda x: -np.log(psi._deriv(np.asarray(x, dtype=float)))


# --------------------------------------------------------------------------
# skew product


@dataclass(frozen=True)
class SkewPoint:
    x: float
    t: float


def skew_apply(action: GroupAction, c: Cocycle, w: Word, p: SkewPoint) -> SkewPoint:
    """``(x, t) -> (w(x), t + c(w, x))``."""
    return SkewPoint(apply_word(action, w, p.x), p.t + cocycle_eval(c, w, p.x))


def _ball_cocycle_levels(action: GroupAction, c: Cocycle, x0: float, radius: int):
    """Per-level arrays of (points, fiber values) for the skew orbit of ``(x0, 0)``."""
    imgs = ball_images(action, [x0], radius)
    letters = action.letters()
    ts = [np.zeros(1)]
    for m in range(1, radius + 1):
        par = imgs.parent[m]
        xs_prev = imgs.values[m - 1][par, 0]
        t = ts[m - 1][par].copy()
        for li, lt in enumerate(letters):
            sel = imgs.first[m] == li
            if np.any(sel):
                t[sel] += c.letter_value(lt, xs_prev[sel])
        ts.append(t)
    return imgs, ts


@dataclass
class BoundednessReport:
    radii: list[int]
    sup_abs: list[float]
    slope: float
    threshold: float
    bounded: bool

    def to_dict(self):
        return {
            "radii": self.radii,
            "sup_abs": self.sup_abs,
            "slope": self.slope,
            "threshold": self.threshold,
            "bounded": self.bounded,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def bounded_orbit_test(action: GroupAction, c: Cocycle, x0: float, radius: int,
                       threshold: float = 1e-3) -> BoundednessReport:
    """Running sup of ``|c(w, x0)|`` over balls of radius 0..radius.

    The verdict compares the growth over the last two radius steps,
    ``(sup_r - sup_{r-2}) / 2``, with ``threshold``.
    """
    if radius < 2:
        raise ValueError("radius must be at least 2")
    _, ts = _ball_cocycle_levels(action, c, x0, radius)
    sups, running = [], 0.0
    for t in ts:
        running = max(running, float(np.max(np.abs(t))))
        sups.append(running)
    slope = (sups[-1] - sups[-3]) / 2.0
    return BoundednessReport(list(range(radius + 1)), sups, slope, threshold, slope < threshold)


# --------------------------------------------------------------------------
# transfer functions


@dataclass(frozen=True)
class TransferFunction:
    """Binned graph of a transfer function recovered from one skew orbit.

    ``x``/``t`` are the sorted raw orbit samples (``x`` reduced mod 1).  Per
    bin, ``bin_x`` and ``bin_t`` are sample means and ``bin_spread`` the
    max-min spread of ``t``; empty bins carry NaN.
    """

    x: np.ndarray
    t: np.ndarray
    bin_width: float
    bin_x: np.ndarray
    bin_t: np.ndarray
    bin_spread: np.ndarray
    continuity_modulus: float
    empty_fraction: float
    graph_ok: bool = True
    spread_tol: float = field(default=np.inf)

    @property
    def bins(self) -> int:
        return self.bin_t.size

    def __call__(self, x):
        """Nearest-bin value (empty bins take the nearest filled bin)."""
        arr = np.asarray(x, dtype=float)
        idx = np.floor((arr % 1.0) / self.bin_width).astype(int) % self.bins
        return self._filled()[idx]

    def _filled(self):
        vals = self.bin_t.copy()
        if np.any(np.isnan(vals)):
            good = np.nonzero(~np.isnan(vals))[0]
            centers = (np.arange(vals.size) + 0.5) * self.bin_width
            ext = np.concatenate([centers[good] - 1, centers[good], centers[good] + 1])
            ev = np.tile(vals[good], 3)
            bad = np.isnan(vals)
            near = np.abs(ext[None, :] - centers[bad][:, None]).argmin(axis=1)
            vals[bad] = ev[near]
        return vals

    def sup_error(self, phi: Callable[[np.ndarray], np.ndarray]) -> float:
        """Max over filled bins of ``|bin_t - phi(bin_x)|`` after optimal constant alignment."""
        ok = ~np.isnan(self.bin_t)
        diff = self.bin_t[ok] - phi(self.bin_x[ok])
        return float(np.max(np.abs(diff - diff.mean())))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "t", "bin_spread"])
            for bx, bt, bs in zip(self.bin_x, self.bin_t, self.bin_spread):
                if np.isnan(bt):
                    continue
                w.writerow([f"{bx:.17g}", f"{bt:.17g}", f"{bs:.17g}"])


class CoverageError(NumericError):
    """Too many empty bins: the orbit is not dense enough at this length."""


def skew_orbit(action: GroupAction, c: Cocycle, x0: float, orbit_length: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``orbit_length`` points of the skew orbit of ``(x0, 0)`` in ball order.

    Balls are grown one radius at a time until they hold enough words,
    which for a single generator means the iterates ``g^n``, ``|n| <= L/2``.
    """
    r = 0
    while ball_size(action.k, r) < orbit_length:
        r += 1
    if action.k == 1:
        return _cyclic_orbit(action, c, x0, r)
    if r > action.max_radius:
        from .errors import ResourceError

        raise ResourceError(f"orbit length {orbit_length} needs radius {r} > budget {action.max_radius}")
    imgs, ts = _ball_cocycle_levels(action, c, x0, r)
    xs = np.concatenate([v[:, 0] for v in imgs.values])[:orbit_length]
    tt = np.concatenate(ts)[:orbit_length]
    return xs, tt


def _cyclic_orbit(action, c, x0, r):
    # c(g^n, x0) is the running sum of c(g, g^j x0), j < n; same for g^-1
    out_x, out_t = [np.array([x0])], [np.zeros(1)]
    for s in (1, -1):
        letter = (0, s)
        g = action.letter_map(letter)
        pts = np.empty(r + 1)
        pts[0] = x0
        cur = np.array([x0])
        for j in range(r):
            cur = g._eval(cur)
            pts[j + 1] = cur[0]
        out_x.append(pts[1:])
        out_t.append(np.cumsum(c.letter_value(letter, pts[:-1])))
    return np.concatenate(out_x), np.concatenate(out_t)


def extract_transfer(action: GroupAction, c: Cocycle, x0: float, orbit_length: int = 10_000,
                     bins: int = 256, spread_tol: float = 0.05, max_empty: float = 0.05) -> TransferFunction:
    """Recover ``phi`` with ``c(f, x) = phi(f(x)) - phi(x)`` from the skew orbit of ``(x0, 0)``.

    Values are normalised so that the bin containing ``x0`` has value 0.
    Raises ``CoverageError`` if more than ``max_empty`` of the bins are empty.
    A bin spread above ``spread_tol`` marks the extraction as failed
    (``graph_ok = False``) without raising.
    """
    xs, ts = skew_orbit(action, c, x0, orbit_length)
    xm = xs % 1.0
    order = np.argsort(xm, kind="stable")
    xm, ts = xm[order], ts[order]
    width = 1.0 / bins
    idx = np.minimum((xm / width).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    empty = float(np.mean(counts == 0))
    if empty > max_empty:
        raise CoverageError(f"{empty:.1%} of bins are empty", empty_fraction=empty)
    with np.errstate(invalid="ignore"):
        bx = np.bincount(idx, weights=xm, minlength=bins) / counts
        bt = np.bincount(idx, weights=ts, minlength=bins) / counts
    tmax = np.full(bins, -np.inf)
    tmin = np.full(bins, np.inf)
    np.maximum.at(tmax, idx, ts)
    np.minimum.at(tmin, idx, ts)
    spread = np.where(counts > 0, tmax - tmin, np.nan)
    ref_bin = min(int((x0 % 1.0) / width), bins - 1)
    ref = bt[ref_bin] if counts[ref_bin] else np.nanmean(bt)
    bt = bt - ref
    ts = ts - ref
    modulus = float(np.nanmax(spread))
    return TransferFunction(xm, ts, width, bx, bt, spread, modulus, empty,
                            graph_ok=bool(modulus <= spread_tol), spread_tol=spread_tol)


def coboundary_residual(action: GroupAction, c: Cocycle, phi, mesh: int | np.ndarray = 4096) -> float:
    """``max_i max_x |c(g_i, x) - phi(g_i x) + phi(x)|`` over a mesh of ``[0, 1)``."""
    x = np.linspace(0.0, 1.0, mesh, endpoint=False) if np.isscalar(mesh) else np.asarray(mesh, dtype=float)
    worst = 0.0
    for i, g in enumerate(action.generators):
        r = c.generator_values[i](x) - np.asarray(phi(g._eval(x))) + np.asarray(phi(x))
        worst = max(worst, float(np.max(np.abs(r))))
    return worst
