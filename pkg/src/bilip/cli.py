"""Command-line front end.

Exit codes: 0 every check passed, 1 a check failed on a healthy run,
2 configuration or precondition error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .action import (
    GOLDEN,
    approximate_minimal_set,
    default_schottky,
    gap_stabilizer_search,
    rotation_action,
)
from .cocycle import (
    CoverageError,
    bounded_orbit_test,
    coboundary,
    coboundary_residual,
    conjugate_action,
    constant_cocycle,
    derivative_cocycle,
    extract_transfer,
    log_deriv_transfer,
)
from .config import CONFIGS, ConfigError, defaults_markdown, load_config
from .errors import BilipError, ConstructionError, EquivarianceError, NumericError, ResourceError
from .examples import (
    build_centralizer_demo,
    build_f,
    build_fbar,
    build_phi0,
    c1_obstruction_verdict,
    default_centralizer_driver,
    eps_schedule,
    make_barred,
    make_length_sequence,
    sequences_to_csv,
)
from .extension import (
    commutation_residual,
    extend_circle,
    fundamental_domain,
    lipschitz_bound_audit,
    nondifferentiability_score,
    slope_jump_point,
    stabilized_gap_seed,
)
from .map1d import difference_quotients, log_deriv_variation, make_hyperbolic
from .reporting import RunReport, ensure_dir, write_csv, write_json
from .selftest import run_selftest

FAULT_GATE = "BILIP_ALLOW_FAULT_INJECTION"
FAULT_ENV = "BILIP_FAULT_INJECT"
FAULTS = {"corrupt-tile"}

EXIT_OK, EXIT_FINDING, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class PreconditionError(ConfigError):
    """The configuration is valid but the fixture it names cannot be run."""


# --------------------------------------------------------------------------
# commands


def cmd_theorem_c(cfg, out: str, fault: str | None = None) -> RunReport:
    if fault:
        raise PreconditionError("theorem-c has no fault-injection points")
    rep = RunReport("theorem-c", cfg.to_dict())
    fam = {"width": cfg.width} if cfg.family == "lorentzian" else {}
    ell = make_length_sequence(cfg.n_max, cfg.family, cfg.tail_tol, **fam)
    bar = make_barred(ell, cfg.delta)
    window = range(cfg.window_lo, cfg.window_hi + 1)
    verdict, ratios = c1_obstruction_verdict(ell, bar, window, cfg.n_probe, cfg.gap_threshold)
    phi0 = build_phi0(ell, bar)
    f = build_f(ell, eps_schedule(cfg.eps0, cfg.eps_rate))
    fbar = build_fbar(phi0, f)
    x = np.linspace(0.0, 1.0, cfg.mesh)
    conj = float(np.max(np.abs(phi0(f(x)) - fbar(phi0(x)))))

    rep.check("sum of lengths - 1", abs(float(np.sum(ell.values)) - 1.0), "<=", cfg.sum_tol)
    rep.check("sum of barred lengths - 1", abs(float(np.sum(bar.values)) - 1.0), "<=", cfg.sum_tol)
    rep.check("pairing l_2m = l_2m+1", float(np.max(np.abs(ell.values[0::2] - ell.values[1::2]))), "==", 0.0)
    rep.check("edge ratio deviation", max(abs(r - 1.0) for r in ell.edge_ratios), "<", cfg.tail_tol)
    rep.check("phi0 f = fbar phi0 residual", conj, "<", cfg.conj_tol)
    hi, lo = 1.0 + cfg.delta, 1.0 - cfg.delta
    for N, e, o in zip(ratios.window, ratios.even_tail, ratios.odd_tail):
        te, to = (hi, lo) if N % 2 == 0 else (lo, hi)
        rep.check(f"even tail N={N:+d} vs {te:.4g}", abs(e - te), "<=", cfg.limit_tol)
        rep.check(f"odd tail N={N:+d} vs {to:.4g}", abs(o - to), "<=", cfg.limit_tol)
    rep.check("worst gap deviation from 2 delta", max(abs(g - 2 * cfg.delta) for g in ratios.gap), "<=",
              cfg.limit_tol)
    rep.check("no C^1 conjugacy for any shift", verdict, "==", True)
    rep.results = {"ratios": ratios.to_dict(), "edge_ratios": list(ell.edge_ratios), "conjugacy_residual": conj}

    sequences_to_csv(ell, bar, os.path.join(out, "sequences.csv"))
    write_csv(os.path.join(out, "ratios.csv"), ["N", "even_tail", "odd_tail", "gap", "obstructed"],
              [[N, e, o, g, int(b)] for N, e, o, g, b in
               zip(ratios.window, ratios.even_tail, ratios.odd_tail, ratios.gap, ratios.obstructed)])
    write_json(os.path.join(out, "verdict.json"), rep.to_dict())
    return rep


def _extend_interval(cfg, out, fault):
    f = default_centralizer_driver(cfg.eps)
    demo = build_centralizer_demo(f, cfg.c, slope=cfg.slope, n_max=cfg.n_max, mesh=cfg.mesh,
                                  tile=cfg.score_tile, commute_tol=cfg.interval_commute_tol,
                                  score_floor=cfg.score_floor,
                                  fault_tile=cfg.score_tile if fault == "corrupt-tile" else None)
    rep = RunReport("extend", cfg.to_dict())
    a = demo.report
    res = a.residuals["commutation"]
    D = demo.h.fundamental
    xs = D.mesh(1001)
    recovery = float(np.max(np.abs(demo.h(xs) - demo.h.seed(xs))))
    if fault:
        rep.check("commutation residual (fault injected; must be detected)", res, ">", cfg.fault_threshold)
    rep.check("commutation residual", res, "<", cfg.interval_commute_tol)
    rep.check("extension strictly increasing", a.monotone, "==", True)
    rep.check("empirical bi-Lipschitz constant <= M e^V", a.empirical, "<=", a.cap * (1 + cfg.rel_tol))
    rep.check("nondifferentiability score at transported kink", demo.score, ">=", cfg.score_floor)
    rep.check("seed recovered on the fundamental domain", recovery, "<=", 1e-12)
    rep.results = {"audit": a.to_dict(), "score": demo.score, "kink": demo.kink,
                   "fundamental_domain": D.to_dict(), "n_fwd": demo.h.n_fwd, "n_bwd": demo.h.n_bwd}
    x = np.linspace(0.0, 1.0, cfg.mesh)
    write_csv(os.path.join(out, "trace.csv"), ["x", "h"], zip(x.tolist(), demo.h(x).tolist()))
    return rep


def _circle_fixture(cfg):
    if cfg.action == "golden":
        act = rotation_action(GOLDEN)
    else:
        act = default_schottky(cfg.multiplier, cfg.half_width).action
    gaps = approximate_minimal_set(act, cfg.gap_radius)
    if len(gaps) == 0:
        raise PreconditionError(f"the {cfg.action} action has no gap at radius {cfg.gap_radius}; "
                                "circle extension needs an exceptional minimal set")
    found = gap_stabilizer_search(act, gaps.largest(), cfg.stabilizer_radius)
    return act, gaps, found


def _extend_circle(cfg, out, fault):
    if fault:
        raise PreconditionError("fault injection is only wired into the interval mode")
    act, gaps, found = _circle_fixture(cfg)
    rep = RunReport("extend", cfg.to_dict())
    if found is None:
        raise PreconditionError("no stabilizer found for the largest gap; raise stabilizer_radius")
    w, gap = found
    I = gap.interval
    hI = stabilized_gap_seed(act, I, w, cfg.slope, cfg.n_max)
    h = extend_circle(act, I, hI, w, cfg.radius, cfg.consistency_tol)
    res = commutation_residual(h, act, cfg.commute_mesh)
    V = max(log_deriv_variation(g).value for g in act.generators)
    M = max(difference_quotients(hI._eval, I.lo, I.hi, cfg.mesh))
    a = lipschitz_bound_audit(h, M, V, act.k, cfg.mesh, {"commutation": res}, cfg.rel_tol)
    kink = slope_jump_point(hI.fundamental, cfg.slope)
    score = nondifferentiability_score(h, kink, [1e-4, 1e-5, 1e-6, 1e-7])
    rep.check("commutation residual on the gap orbit", res, "<", cfg.circle_commute_tol)
    rep.check("double-definition consistency", h.consistency, "<", cfg.consistency_tol)
    rep.check("extension strictly increasing", a.monotone, "==", True)
    rep.check("empirical bi-Lipschitz constant <= M e^{kV}", a.empirical, "<=", a.cap * (1 + cfg.rel_tol))
    rep.check("nondifferentiability score at seed kink", score, ">=", cfg.score_floor)
    rep.results = {
        "audit": a.to_dict(),
        "gap": I.to_dict(),
        "stabilizer": w.label(act.labels),
        "gap_images": len(h.gaps),
        "duplicate_words": len(h.duplicates),
        "consistency_all_duplicates": h.consistency_all,
        "coverage": gaps.coverage,
        "score": score,
    }
    write_csv(os.path.join(out, "gap_images.csv"), ["lo", "hi", "word", "depth"],
              [[g.lo, g.hi, g.word.label(act.labels), g.depth] for g in h.gaps])
    x = np.linspace(0.0, 1.0, cfg.mesh, endpoint=False)
    write_csv(os.path.join(out, "trace.csv"), ["x", "h"], zip(x.tolist(), h(x).tolist()))
    return rep


def cmd_extend(cfg, out: str, fault: str | None = None) -> RunReport:
    rep = (_extend_interval if cfg.mode == "interval" else _extend_circle)(cfg, out, fault)
    write_json(os.path.join(out, "report.json"), rep.to_dict())
    return rep


def cmd_gh(cfg, out: str, fault: str | None = None) -> RunReport:
    if fault:
        raise PreconditionError("gh has no fault-injection points")
    rep = RunReport("gh", cfg.to_dict())
    if cfg.mode == "derivative":
        S = default_schottky().action
        psi = make_hyperbolic(cfg.psi_attracting, cfg.psi_repelling, cfg.psi_multiplier)
        S2 = conjugate_action(S, psi)
        c = derivative_cocycle(S, S2, psi)
        x = np.linspace(0.0, 1.0, cfg.deriv_mesh, endpoint=False)
        res = coboundary_residual(S, c, log_deriv_transfer(psi), x)
        b = bounded_orbit_test(S, c, cfg.x0, cfg.deriv_radius, cfg.slope_threshold)
        rep.check("bounded orbit verdict", b.bounded, "==", True)
        rep.check("derivative cocycle residual with -log psi'", res, "<", cfg.derivative_tol)
        rep.results = {"boundedness": b.to_dict(), "residual": res}
        write_json(os.path.join(out, "boundedness.json"), b.to_dict())
        write_json(os.path.join(out, "report.json"), rep.to_dict())
        return rep

    R = rotation_action(cfg.alpha)
    if cfg.mode == "coboundary":
        amp = cfg.amplitude
        phi = lambda t: amp * np.sin(2 * np.pi * np.asarray(t))
        c = coboundary(R, phi)
    else:
        c = constant_cocycle(R, [cfg.drift])
        phi = None
    b = bounded_orbit_test(R, c, cfg.x0, cfg.radius, cfg.slope_threshold)
    write_json(os.path.join(out, "boundedness.json"), b.to_dict())
    rep.check("bounded orbit verdict", b.bounded, "==", True)
    rep.results = {"boundedness": b.to_dict()}
    if not b.bounded:
        rep.results["slope"] = b.slope
        if cfg.mode == "drift":
            rep.results["slope_relative_error"] = abs(b.slope - abs(cfg.drift)) / abs(cfg.drift)
    else:
        rep.check("sup |c(w, x0)| at every radius", max(b.sup_abs), "<=", cfg.sup_bound)
        try:
            tf = extract_transfer(R, c, cfg.x0, cfg.orbit_length, cfg.bins, cfg.spread_tol, cfg.max_empty)
        except CoverageError as e:
            rep.check("orbit coverage", e.details.get("empty_fraction", 1.0), "<=", cfg.max_empty)
        else:
            tf.to_csv(os.path.join(out, "transfer.csv"))
            rep.check("graph extraction (max bin spread)", tf.continuity_modulus, "<=", cfg.spread_tol)
            res = coboundary_residual(R, c, tf)
            rep.check("coboundary residual of extracted transfer", res, "<", cfg.residual_tol)
            if phi is not None:
                rep.check("recovery sup error after alignment", tf.sup_error(phi), "<", cfg.recovery_tol)
            rep.results["continuity_modulus"] = tf.continuity_modulus
            rep.results["empty_fraction"] = tf.empty_fraction
    write_json(os.path.join(out, "report.json"), rep.to_dict())
    return rep


def cmd_selftest(cfg, out: str | None, fault: str | None = None) -> RunReport:
    rep = run_selftest(cfg, fault)
    if out:
        write_json(os.path.join(out, "selftest.json"), rep.to_dict())
    return rep


COMMANDS = {"theorem-c": cmd_theorem_c, "extend": cmd_extend, "gh": cmd_gh, "selftest": cmd_selftest}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bilip", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name, help=f"run the {name} fixture")
        s.add_argument("--config", metavar="PATH", help="JSON object with option overrides")
        s.add_argument("--out", metavar="DIR", default=None, help="output directory (default: ./out/<command>)")
        s.add_argument("--override", metavar="KEY=VALUE", action="append", default=[],
                       help="set one option; VALUE is parsed as JSON when possible")
        s.add_argument("--fault-inject", metavar="NAME", default=None,
                       help=f"test-only; requires {FAULT_GATE}=1")
        s.add_argument("--quiet", action="store_true")
    sub.add_parser("defaults", help="print the option reference")
    return p


def _fault_name(args) -> str | None:
    name = args.fault_inject or os.environ.get(FAULT_ENV) or None
    if name is None:
        return None
    if os.environ.get(FAULT_GATE) != "1":
        raise ConfigError(f"fault injection is disabled; set {FAULT_GATE}=1")
    if name not in FAULTS:
        raise ConfigError(f"unknown fault {name!r}; available: {', '.join(sorted(FAULTS))}")
    return name


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "defaults":
        print(defaults_markdown())
        return EXIT_OK
    t0 = time.perf_counter()
    out = None
    try:
        fault = _fault_name(args)
        cfg = load_config(args.command, args.config, args.override)
        out = args.out or os.path.join("out", args.command)
        ensure_dir(out)
        rep = COMMANDS[args.command](cfg, out, fault)
    except (ConfigError, ResourceError, ConstructionError) as e:
        # construction certificates fail only on parameters taken from the config
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except EquivarianceError as e:
        print(f"finding: {e}", file=sys.stderr)
        return EXIT_FINDING
    except (NumericError, FloatingPointError, BilipError) as e:
        print(f"numeric error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        if out is not None and os.path.isdir(out):
            write_json(os.path.join(out, "timing.json"),
                       {"command": args.command, "wall_time_s": time.perf_counter() - t0})
    if not args.quiet:
        print(rep.table())
        print(f"{'PASS' if rep.passed else 'FAIL'}  {args.command}")
    return EXIT_OK if rep.passed else EXIT_FINDING


if __name__ == "__main__":
    sys.exit(main())
