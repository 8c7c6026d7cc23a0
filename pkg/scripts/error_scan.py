"""Relative error versus control frequency around omega_0 for a few couplings.

Writes one CSV per coupling x = sqrt(2N) g tau_c and reports the two local
minima on either side of omega_0 together with the fitted divergence slopes.
"""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from taucrit.estimation import error_vs_control_scan, local_minima
from taucrit.spectral import NoiseSpectrum, critical_frequency


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--x", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(exist_ok=True)

    ratios = np.geomspace(0.05, 20, 801)
    for x in args.x:
        spec = NoiseSpectrum(x / math.sqrt(2 * args.n), 1.0, args.beta)
        w0 = critical_frequency(spec)
        pts = error_vs_control_scan(spec, args.n, omega_grid=ratios * w0)
        path = args.out / f"error_scan_x{x:g}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega_over_omega0", "t", "j", "eps"])
            for r, p in zip(ratios, pts):
                w.writerow([f"{r:.12g}", f"{p.t:.12g}", f"{p.j:.12g}", f"{p.eps:.12g}"])

        eps = np.array([p.eps for p in pts])
        mins = ", ".join(f"eps={eps[i]:.4f} at omega/omega0={ratios[i]:.3f}" for i in local_minima(eps))
        d = np.geomspace(1e-3, 1e-2, 25)
        slopes = []
        for side in (-1, 1):
            flank = error_vs_control_scan(spec, args.n, omega_grid=np.sort(w0 * (1 + side * d)))
            e = np.array([p.eps for p in flank])
            dist = np.abs(np.array([p.omega_ctrl for p in flank]) - w0)
            slopes.append(np.polyfit(np.log(dist), np.log(e), 1)[0])
        print(f"x={x:g}: minima {mins}; divergence slopes {slopes[0]:.3f} / {slopes[1]:.3f} -> {path}")


if __name__ == "__main__":
    main()
