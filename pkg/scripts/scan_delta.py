"""Gap between even and odd ratio tails as the redistribution factor shrinks.

The gap tracks ``2 delta``; the obstruction verdict flips once it drops
below the threshold.  Writes ``out/scan_delta.csv``.
"""

import argparse
import os

import numpy as np

from bilip.examples import c1_obstruction_verdict, make_barred, make_length_sequence
from bilip.reporting import ensure_dir, write_csv


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=64)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", default="out")
    a = p.parse_args()
    ell = make_length_sequence(a.n_max)
    rows = []
    for delta in np.geomspace(1e-4, 0.9, 25):
        verdict, r = c1_obstruction_verdict(ell, make_barred(ell, delta), gap_threshold=a.threshold)
        rows.append([float(delta), min(r.gap), max(r.gap), int(verdict)])
        print(f"delta {delta:9.3g}  gap [{min(r.gap):.4g}, {max(r.gap):.4g}]  obstructed {verdict}")
    write_csv(os.path.join(ensure_dir(a.out), "scan_delta.csv"), ["delta", "gap_min", "gap_max", "obstructed"], rows)


if __name__ == "__main__":
    main()
