"""Invariant suites over the shipped fixtures, driven by one seeded generator."""

from __future__ import annotations

import numpy as np

from .action import GroupAction, Word, apply_word, default_schottky, rotation_action, GOLDEN
from .cocycle import Cocycle, SkewPoint, cocycle_eval, coboundary, derivative_cocycle, conjugate_action, skew_apply
from .config import SelftestConfig
from .examples import build_f, build_fbar, build_phi0, make_barred, make_length_sequence
from .extension import extend_interval, slope_jump_seed, fundamental_domain
from .map1d import (
    Interval,
    compose,
    invert,
    is_strictly_increasing,
    iterate,
    log_deriv_variation,
    make_bump,
    make_hyperbolic,
    make_moebius,
    make_piecewise_affine,
    make_stitched,
)
from .reporting import RunReport


def random_word(rng: np.random.Generator, k: int, max_len: int = 6) -> Word:
    n = int(rng.integers(0, max_len + 1))
    letters = [(int(rng.integers(k)), int(rng.choice([-1, 1]))) for _ in range(n)]
    return Word(tuple(letters))


def trig_cocycle(action: GroupAction) -> Cocycle:
    """Generic (non-coboundary) smooth generator values."""
    fns = tuple((lambda a, p: (lambda x: a * np.sin(2 * np.pi * x + p) + 0.05))(0.3 / (i + 1), 0.7 * i)
                for i in range(action.k))
    return Cocycle(action, fns, "trig")


def relation_suite(rng, cases: int):
    S = default_schottky().action
    c = trig_cocycle(S)
    worst_rel = worst_fact = 0.0
    for _ in range(cases):
        u, v = random_word(rng, S.k), random_word(rng, S.k)
        x = float(rng.random())
        lhs = cocycle_eval(c, u * v, x)
        rhs = cocycle_eval(c, v, x) + cocycle_eval(c, u, apply_word(S, v, x))
        worst_rel = max(worst_rel, abs(lhs - rhs))
        # a second factorisation of the same word
        w = u * v
        if len(w) >= 2:
            i = int(rng.integers(1, len(w)))
            a, b = Word(w.letters[:i]), Word(w.letters[i:])
            alt = cocycle_eval(c, b, x) + cocycle_eval(c, a, apply_word(S, b, x))
            worst_fact = max(worst_fact, abs(alt - lhs))
    return worst_rel, worst_fact


def skew_suite(rng, cases: int):
    S = default_schottky().action
    c = trig_cocycle(S)
    worst_law = worst_shift = 0.0
    for _ in range(cases):
        u, v = random_word(rng, S.k), random_word(rng, S.k)
        p = SkewPoint(float(rng.random()), float(rng.normal()))
        two = skew_apply(S, c, u, skew_apply(S, c, v, p))
        one = skew_apply(S, c, u * v, p)
        worst_law = max(worst_law, abs(two.x - one.x), abs(two.t - one.t))
        s = float(rng.normal())
        a = skew_apply(S, c, u, SkewPoint(p.x, p.t + s))
        b = skew_apply(S, c, u, p)
        worst_shift = max(worst_shift, abs(a.x - b.x), abs(a.t - (b.t + s)))
    return worst_law, worst_shift


def inverse_fixtures():
    U = Interval(0.0, 1.0)
    pa = make_piecewise_affine([0, 0.3, 0.55, 1], [0, 0.4, 0.5, 1])
    st = make_stitched([Interval(0, 0.5), Interval(0.5, 1)],
                       [make_bump(Interval(0, 0.5), 5.0), make_bump(Interval(0.5, 1), -7.0)], U)
    return {
        "bump": make_bump(U, 9.0),
        "moebius": make_moebius(2.0, 0.3, -0.5, 0.425),
        "hyperbolic": make_hyperbolic(0.1, 0.6, 3.0),
        "piecewise_affine": pa,
        "stitched": st,
        "compose": compose(make_bump(U, 4.0), pa, make_bump(U, -3.0)),
        "iterate": iterate(make_bump(U, -6.0), 5),
    }


def inverse_suite(rng, cases: int):
    worst = 0.0
    for name, f in inverse_fixtures().items():
        if f.is_circle:
            x = rng.uniform(-2.0, 2.0, cases)
        else:
            x = rng.uniform(f.domain.lo, f.domain.hi, cases)
        g = invert(f)
        worst = max(worst, float(np.max(np.abs(g(f(x)) - x))), float(np.max(np.abs(f(g(x)) - x))))
    return worst


def variation_suite():
    U = Interval(0.0, 1.0)
    fx = [make_bump(U, e) for e in (0.5, -4.0, 10.0)] + [make_hyperbolic(0.0, 0.5, 2.0),
                                                        make_hyperbolic(0.2, 0.65, 4.0)]
    return max(log_deriv_variation(f).discrepancy for f in fx)


def monotonicity_suite():
    ok = all(is_strictly_increasing(f) for f in inverse_fixtures().values())
    ell = make_length_sequence(64)
    bar = make_barred(ell)
    phi0 = build_phi0(ell, bar)
    f = build_f(ell)
    ok = ok and is_strictly_increasing(f) and is_strictly_increasing(build_fbar(phi0, f))
    return ok


def tiling_suite(fault_tile=None):
    """Tiles of the interval fixture: disjoint interiors, and they cover ``[f^10(c), c]``."""
    f = make_bump(Interval(0.0, 1.0), -10.0)
    D = fundamental_domain(f, 0.5)
    h = extend_interval(f, slope_jump_seed(D), 30, fault_tile=fault_tile)
    b = h.boundaries
    ends = [0.5]
    for _ in range(10):
        ends.append(float(f(ends[-1])))
    # direct iteration of the domain versus the stored boundaries
    cover = max(abs(ends[j] - b[h.n_fwd + 1 - j]) for j in range(11))
    overlap = float(np.max(-np.diff(b)))
    x = np.linspace(0.0, 1.0, 10_000)
    mono = bool(np.all(np.diff(h(x)) > 0))
    return cover, overlap, mono


def partition_suite():
    ell = make_length_sequence(64)
    bar = make_barred(ell)
    pair = float(np.max(np.abs((bar.values[0::2] + bar.values[1::2]) - (ell.values[0::2] + ell.values[1::2]))))
    inc = bool(np.all(np.diff(ell.endpoints()) > 0) and np.all(np.diff(bar.endpoints()) > 0))
    return pair, inc


def run_selftest(cfg: SelftestConfig | None = None, fault: str | None = None) -> RunReport:
    cfg = cfg or SelftestConfig()
    rng = np.random.default_rng(cfg.seed)
    rep = RunReport("selftest", cfg.to_dict())
    rel, fact = relation_suite(rng, cfg.relation_cases)
    rep.check("cocycle relation residual", rel, "<", cfg.relation_tol)
    rep.check("cocycle factorisation agreement", fact, "<", cfg.relation_tol)
    law, shift = skew_suite(rng, cfg.skew_cases)
    rep.check("skew product action law", law, "<", cfg.skew_tol)
    rep.check("skew product fiber-shift equivariance", shift, "<", cfg.shift_tol)
    rep.check("inverse round trips", inverse_suite(rng, cfg.inverse_cases), "<", cfg.inverse_tol)
    rep.check("variation dual-oracle agreement", variation_suite(), "<", cfg.variation_tol)
    rep.check("monotonicity of shipped maps", monotonicity_suite(), "==", True)
    cover, overlap, mono = tiling_suite(fault_tile=3 if fault == "corrupt-tile" else None)
    rep.check("tiles match direct iteration", cover, "<", cfg.tiling_tol)
    rep.check("tile overlap", overlap, "<", cfg.tiling_tol)
    rep.check("extension strictly increasing", mono, "==", True)
    pair, inc = partition_suite()
    rep.check("pair-mass conservation", pair, "<", 1e-15)
    rep.check("partitions strictly increasing", inc, "==", True)
    rep.results = {c.name: c.value for c in rep.checks}
    return rep
