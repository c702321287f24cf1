"""Frame bounds, Gram conditioning and peak placement across scale ratios.

    python demos/frame_design.py
"""

import math

from spikelet.frames import frame_report, spectral_bank
from spikelet.wavelets import make_bank, peak_frequency


def main():
    print(f"{'family':<6} {'c':>6} {'K':>3} {'A':>11} {'B':>8} {'cond(G)':>10}")
    for fam in ("dog", "doe", "dot"):
        for c in (math.sqrt(2), 2.0):
            for K in (4, 8):
                rep = frame_report(spectral_bank(fam, c, K))
                # the Gaussian lowpass underflows at the top of the range, so A(DoG) = 0
                print(f"{fam:<6} {c:6.3f} {K:3d} {rep.A:11.3e} {rep.B:8.4f} "
                      f"{rep.condition_number:10.3g}")
    # where the DoT peak sits relative to 1/mu_1 as c grows
    print("\nDoT (n = 7) peak position, omega_peak * mu_1:")
    for c in (1.1, math.sqrt(2), 1.5, 2.0, 3.0):
        b = make_bank("dot", 1.0, c, 1, 1e-3, n=7)
        mu1 = math.sqrt(c * c - 1) / c
        print(f"  c = {c:5.3f}: {peak_frequency(b, 1) * mu1:.3f}")


if __name__ == "__main__":
    main()
