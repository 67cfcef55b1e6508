"""Bi-Lipschitz audits of the interval and Schottky extensions, with the constant per tile."""

import time

from bilip.action import approximate_minimal_set, default_schottky, gap_stabilizer_search
from bilip.examples import build_centralizer_demo
from bilip.extension import commutation_residual, extend_circle, lipschitz_bound_audit, stabilized_gap_seed
from bilip.map1d import difference_quotients, log_deriv_variation


def interval():
    t0 = time.perf_counter()
    d = build_centralizer_demo()
    a = d.report
    print("interval extension")
    print(f"  M = {a.M:.6g}  V = {a.V:.6g}  cap M e^V = {a.cap:.6g}")
    print(f"  empirical = {a.empirical:.6g}  margin = {a.margin:.4g}  residual = {a.residuals['commutation']:.3g}")
    print(f"  kink score in tile 3 = {d.score:.4g}  untouched length = {a.truncation_mass:.4g}")
    worst = max(a.per_tile, key=lambda r: max(r["fwd"], r["bwd"]))
    print(f"  worst tile {worst['tile']}: fwd {worst['fwd']:.5g}, bwd {worst['bwd']:.5g}")
    print(f"  {time.perf_counter() - t0:.2f}s")


def circle(radius=8):
    t0 = time.perf_counter()
    S = default_schottky().action
    gaps = approximate_minimal_set(S, 8)
    w, gap = gap_stabilizer_search(S, gaps.largest(), 6)
    I = gap.interval
    seed = stabilized_gap_seed(S, I, w)
    h = extend_circle(S, I, seed, w, radius)
    V = max(log_deriv_variation(g).value for g in S.generators)
    M = max(difference_quotients(seed._eval, I.lo, I.hi, 1 << 14))
    a = lipschitz_bound_audit(h, M, V, S.k, 1 << 14)
    print(f"circle extension, gap [{I.lo:.6f}, {I.hi:.6f}] stabilised by {w.label()}")
    print(f"  {len(h.gaps)} gap images, {len(h.duplicates)} duplicate words")
    print(f"  consistency: ties {h.consistency:.3g}, all duplicates {h.consistency_all:.3g}")
    print(f"  M = {a.M:.6g}  V = {a.V:.6g}  cap M e^(kV) = {a.cap:.6g}  empirical = {a.empirical:.6g}")
    print(f"  residual = {commutation_residual(h, S, 10_000):.3g}  {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    interval()
    circle()
