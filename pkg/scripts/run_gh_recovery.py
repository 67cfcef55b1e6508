"""Transfer recovery error as the orbit length and bin count vary."""

import numpy as np

from bilip.action import GOLDEN, rotation_action
from bilip.cocycle import CoverageError, coboundary, coboundary_residual, extract_transfer

phi = lambda x: 0.1 * np.sin(2 * np.pi * np.asarray(x))

if __name__ == "__main__":
    R = rotation_action(GOLDEN)
    c = coboundary(R, phi)
    print(" orbit   bins   sup error   max spread   residual")
    for L in (1_000, 3_000, 10_000, 30_000):
        for bins in (64, 256, 1024):
            try:
                tf = extract_transfer(R, c, 0.0, L, bins)
            except CoverageError as e:
                print(f"{L:6d} {bins:6d}   coverage failure ({e})")
                continue
            print(f"{L:6d} {bins:6d}   {tf.sup_error(phi):9.3g}   {tf.continuity_modulus:10.3g}"
                  f"   {coboundary_residual(R, c, tf):8.3g}")
