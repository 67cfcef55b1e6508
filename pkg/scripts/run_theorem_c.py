"""Ratio table for the paired-length construction at several truncations."""

import argparse

from bilip.examples import build_f, build_fbar, build_phi0, make_barred, make_length_sequence, ratio_diagnostic
from bilip.map1d import lipschitz_estimate


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--width", type=float, default=128.0)
    p.add_argument("--n-max", type=int, nargs="+", default=[64, 128])
    a = p.parse_args()
    for n in a.n_max:
        ell = make_length_sequence(n, width=a.width)
        bar = make_barred(ell)
        r = ratio_diagnostic(ell, bar)
        print(f"n_max = {n}  edge ratios {ell.edge_ratios[0]:.5f} {ell.edge_ratios[1]:.5f}")
        print("   N   even tail   odd tail      gap")
        for N, e, o, g in zip(r.window, r.even_tail, r.odd_tail, r.gap):
            print(f"{N:+4d}  {e:10.5f} {o:10.5f} {g:9.5f}")
        phi0 = build_phi0(ell, bar)
        fbar = build_fbar(phi0, build_f(ell))
        print(f"  phi0 bi-Lipschitz {lipschitz_estimate(phi0, 1 << 14)}")
        print(f"  fbar bi-Lipschitz {lipschitz_estimate(fbar, 1 << 14)}")
        print(f"  verdict: no C^1 conjugacy = {r.verdict}\n")


if __name__ == "__main__":
    main()
