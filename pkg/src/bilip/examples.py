"""Interval pairs that are bi-Lipschitz but not C^1 conjugate, and a centralizer fixture.

Lengths ``l_n`` come in equal pairs ``l_{2m} = l_{2m+1}``.  The barred
lengths put ``(1 + delta)`` of a pair's mass on the even member and
``(1 - delta)`` on the odd one.  The affine-on-pieces map ``phi0`` sends
``I_n`` to ``Ibar_n``, and ``f``, ``fbar = phi0 f phi0^-1`` preserve the
two chains.  Any conjugacy must shift the chains by some ``N``, and the ratios
``|Ibar_{n+N}| / |I_n|`` then alternate between two limits, so no C^1
conjugacy exists.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.special import zeta

from .errors import ConstructionError
from .extension import (
    DiagnosticReport,
    IntervalExtension,
    commutation_residual,
    extend_interval,
    fundamental_domain,
    lipschitz_bound_audit,
    nondifferentiability_score,
    slope_jump_point,
    slope_jump_seed,
)
from .map1d import (
    Interval,
    MapDescriptor,
    bump_slope_sup,
    compose,
    invert,
    iterate,
    lipschitz_estimate,
    log_deriv_variation,
    make_bump,
    make_piecewise_affine,
    make_stitched,
)

DEFAULT_WIDTH = 128.0
DEFAULT_DELTA = 1.0 / 3.0


@dataclass(frozen=True)
class Lorentzian:
    """``s_m = 1 / (1 + (m / width)^2)``; consecutive ratios tend to 1."""

    width: float = DEFAULT_WIDTH

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def __call__(self, m):
        return 1.0 / (1.0 + (np.asarray(m, dtype=float) / self.width) ** 2)

    def tail(self, J: int) -> float:
        """``sum_{j >= J} s_j`` for ``J >= 1``, from ``sum_Z s = pi w coth(pi w)``."""
        w = self.width
        total = np.pi * w / np.tanh(np.pi * w)
        inner = math.fsum(self(np.arange(-(J - 1), J)).tolist())
        return 0.5 * (total - inner)


@dataclass(frozen=True)
class PowerLaw:
    """``s_m = (1 + |m| / offset)^-p`` with ``p > 1``."""

    p: float = 2.0
    offset: float = 128.0

    def __post_init__(self):
        if self.p <= 1 or self.offset <= 0:
            raise ValueError("need p > 1 and a positive offset")

    def __call__(self, m):
        return (1.0 + np.abs(np.asarray(m, dtype=float)) / self.offset) ** (-self.p)

    def tail(self, J: int) -> float:
        o = self.offset
        return float(o ** self.p * zeta(self.p, o + J))


FAMILIES = {"lorentzian": Lorentzian, "power": PowerLaw}


@dataclass(frozen=True)
class LengthSequence:
    """``values[i]`` is ``l_n`` for ``n = indices[i]``, ``n`` in ``[-n_max, n_max + 1]``.

    ``raw`` keeps the family values before the tails are folded in, and
    ``edge_ratios`` the family's ratio across the last pair at each end.
    """

    indices: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    n_max: int
    tail_tol: float
    edge_ratios: tuple[float, float]

    def __getitem__(self, n: int) -> float:
        return float(self.values[n + self.n_max])

    def endpoints(self) -> np.ndarray:
        e = np.concatenate([[0.0], np.cumsum(self.values)])
        e[-1] = 1.0
        return e


@dataclass(frozen=True)
class BarredSequence:
    indices: np.ndarray
    values: np.ndarray
    n_max: int
    delta: float

    def __getitem__(self, n: int) -> float:
        return float(self.values[n + self.n_max])

    def endpoints(self) -> np.ndarray:
        e = np.concatenate([[0.0], np.cumsum(self.values)])
        e[-1] = 1.0
        return e


@dataclass(frozen=True)
class IntervalChain:
    indices: np.ndarray
    I: np.ndarray  # endpoints, length len(indices) + 1
    Ibar: np.ndarray

    def interval(self, n: int, barred: bool = False) -> Interval:
        e = self.Ibar if barred else self.I
        i = n - int(self.indices[0])
        return Interval(float(e[i]), float(e[i + 1]))


def make_length_sequence(n_max: int = 64, family=None, tail_tol: float = 0.05,
                         **family_args) -> LengthSequence:
    """Paired lengths over ``n`` in ``[-n_max, n_max + 1]``, summing to 1.

    Pair ``m`` (indices ``2m, 2m + 1``, ``|m| <= n_max / 2``) gets
    ``s_m / (2 S)`` each, with ``S`` the sum over all integers.  Each
    end pair also absorbs the mass of the pairs beyond it.  ``family`` is a
    name in ``FAMILIES`` (options passed as keywords) or an even callable with a
    ``tail(J)`` method returning ``sum_{j >= J} s_j``.
    """
    if n_max < 8 or n_max % 2:
        raise ConstructionError("n_max must be an even integer of at least 8")
    family = "lorentzian" if family is None else family
    s = FAMILIES[family](**family_args) if isinstance(family, str) else family
    half = n_max // 2
    m = np.arange(-half, half + 1)
    sm = s(m).astype(float)
    if np.any(sm <= 0):
        raise ConstructionError("family values must be positive")
    right_tail = left_tail = s.tail(half + 1)
    total = math.fsum(sm.tolist()) + right_tail + left_tail
    edge = (float(sm[0] / sm[1]), float(sm[-2] / sm[-1]))
    for r in edge:
        if not (1 - tail_tol < r < 1 + tail_tol):
            raise ConstructionError(
                f"edge ratio {r:.4f} outside 1 +- {tail_tol}; widen the range or flatten the family")
    raw = np.repeat(sm / (2 * total), 2)
    folded = sm.copy()
    folded[0] += left_tail
    folded[-1] += right_tail
    vals = np.repeat(folded / (2 * total), 2)
    vals /= math.fsum(vals.tolist())
    idx = np.arange(-n_max, n_max + 2)
    return LengthSequence(idx, vals, raw, n_max, tail_tol, edge)


def make_barred(ell: LengthSequence, delta: float = DEFAULT_DELTA) -> BarredSequence:
    """``(1 + delta) l_n`` on even ``n``, ``(1 - delta) l_n`` on odd ``n``."""
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    fac = np.where(ell.indices % 2 == 0, 1.0 + delta, 1.0 - delta)
    return BarredSequence(ell.indices, ell.values * fac, ell.n_max, float(delta))


def interval_chain(ell: LengthSequence, bar: BarredSequence) -> IntervalChain:
    return IntervalChain(ell.indices, ell.endpoints(), bar.endpoints())


def build_phi0(ell: LengthSequence, bar: BarredSequence) -> MapDescriptor:
    """Piecewise-affine homeomorphism of ``[0, 1]`` taking each ``I_n`` onto ``Ibar_n``."""
    if not np.array_equal(ell.indices, bar.indices):
        raise ValueError("index ranges differ")
    return make_piecewise_affine(ell.endpoints(), bar.endpoints())


def eps_schedule(eps0: float = 1.0, rate: float = 0.5) -> Callable[[int], float]:
    return lambda n: eps0 * rate ** abs(n)


def build_f(ell: LengthSequence, schedule: Callable[[int], float] | None = None) -> MapDescriptor:
    """Stitch of bumps ``f_n`` on ``I_n``; each is tangent to the identity to all orders at both ends."""
    schedule = schedule or eps_schedule()
    e = ell.endpoints()
    pieces, maps = [], []
    cap = 1.0 / bump_slope_sup()
    for i, n in enumerate(ell.indices):
        eps = float(schedule(int(n)))
        if not (0 < abs(eps) < cap):
            raise ConstructionError(f"bump amplitude {eps!r} on I_{n} fails the monotonicity certificate")
        iv = Interval(float(e[i]), float(e[i + 1]))
        pieces.append(iv)
        maps.append(make_bump(iv, eps))
    return make_stitched(pieces, maps, Interval(0.0, 1.0))


def build_fbar(phi0: MapDescriptor, f: MapDescriptor) -> MapDescriptor:
    return compose(phi0, f, invert(phi0))


# --------------------------------------------------------------------------
# ratio diagnostic


@dataclass
class RatioReport:
    n_probe: int
    window: list[int]
    even_tail: list[float]
    odd_tail: list[float]
    gap: list[float]
    gap_threshold: float
    obstructed: list[bool]

    @property
    def verdict(self) -> bool:
        return all(self.obstructed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        return d

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def ratio_diagnostic(ell: LengthSequence, bar: BarredSequence, window=range(-4, 5), n_probe: int = 48,
                     gap_threshold: float = 0.5) -> RatioReport:
    """``|Ibar_{p+N}| / |I_p|`` at the even probe ``p`` and at ``p + 1``, for each shift ``N``.

    A C^1 conjugacy with shift ``N`` mapping ``I_n`` to ``Ibar_{n+N}`` would force both
    tails to share one limit, ``phi'(endpoint)``.
    """
    if n_probe % 2:
        raise ValueError("n_probe is the even member of a pair")
    window = list(window)
    lo, hi = int(ell.indices[0]), int(ell.indices[-1])
    for N in window:
        if not (lo <= n_probe + N and n_probe + 1 + N <= hi):
            raise ValueError(f"probe {n_probe} with shift {N} leaves the index range")
    ev, od, gp, ob = [], [], [], []
    for N in window:
        e = bar[n_probe + N] / ell[n_probe]
        o = bar[n_probe + 1 + N] / ell[n_probe + 1]
        ev.append(e)
        od.append(o)
        gp.append(abs(e - o))
        ob.append(abs(e - o) > gap_threshold)
    return RatioReport(n_probe, window, ev, od, gp, gap_threshold, ob)


def c1_obstruction_verdict(ell: LengthSequence, bar: BarredSequence, window=range(-4, 5),
                           n_probe: int = 48, gap_threshold: float = 0.5) -> tuple[bool, RatioReport]:
    rep = ratio_diagnostic(ell, bar, window, n_probe, gap_threshold)
    return rep.verdict, rep


def sequences_to_csv(ell: LengthSequence, bar: BarredSequence, path):
    ch = interval_chain(ell, bar)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "ell", "ell_bar", "I_lo", "I_hi", "Ibar_lo", "Ibar_hi"])
        for i, n in enumerate(ell.indices):
            row = [ell.values[i], bar.values[i], ch.I[i], ch.I[i + 1], ch.Ibar[i], ch.Ibar[i + 1]]
            w.writerow([int(n)] + [f"{v:.17g}" for v in row])


# --------------------------------------------------------------------------
# centralizer fixture


def default_centralizer_driver(eps: float = -10.0) -> MapDescriptor:
    """Bump on ``[0, 1]`` pushing points left; no interior fixed point."""
    return make_bump(Interval(0.0, 1.0), eps)


@dataclass
class CentralizerDemo:
    h: IntervalExtension
    report: DiagnosticReport
    score: float
    kink: float
    passed: bool = field(default=False)

    def to_dict(self) -> dict:
        d = self.report.to_dict()
        d["nondifferentiability_score"] = self.score
        d["kink_point"] = self.kink
        d["all_passed"] = self.passed
        return d


def build_centralizer_demo(f: MapDescriptor | None = None, c: float = 0.5, seed: MapDescriptor | None = None,
                           slope: float = 2.0, n_max: int = 30, mesh: int = 1 << 14, tile: int = 3,
                           commute_tol: float = 1e-9, score_floor: float = 0.5,
                           fault_tile: int | None = None) -> CentralizerDemo:
    """Extension of a seed on ``[f(c), c]`` commuting with ``f``, with its three audits.

    The score is taken at the image, inside tile ``tile``, of the seed's break
    point (for the default seed) and must exceed ``score_floor``.
    """
    f = f or default_centralizer_driver()
    D = fundamental_domain(f, c)
    kinked = seed is None
    seed = seed or slope_jump_seed(D, slope)
    h = extend_interval(f, seed, n_max, c=c, fault_tile=fault_tile)
    M = max(lipschitz_estimate(seed, mesh=mesh))
    V = log_deriv_variation(f).value
    res = commutation_residual(h, f, 10_000)
    rep = lipschitz_bound_audit(h, M, V, 1, mesh, {"commutation": res})
    if kinked:
        kink = float(iterate(f, tile)(slope_jump_point(D, slope)))
        score = nondifferentiability_score(h, kink, [1e-4, 1e-5, 1e-6, 1e-7])
    else:
        kink = float("nan")
        score = float("nan")
    ok = rep.passed and res < commute_tol and (not kinked or score >= score_floor)
    return CentralizerDemo(h, rep, score, kink, ok)
