"""Monte-Carlo check of the Cramer-Rao prediction along the probing-time axis.

Sweeps t / t0 at a fixed coupling and compares the spread of maximum-likelihood
estimates of tau_c with eps / sqrt(shots).
"""
import argparse
import math

import numpy as np

from taucrit.estimation import optimal_time, reference_time
from taucrit.filters import Cpmg
from taucrit.montecarlo import Protocol, crb_check
from taucrit.spectral import NoiseSpectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--x", type=float, nargs="+", default=[3.0, 1.0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--shots", type=int, default=10_000)
    ap.add_argument("--trials", type=int, default=400)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    print("x,t_over_t0,empirical,predicted,ratio,bias")
    for x in args.x:
        g = x / math.sqrt(2 * args.n)
        spec = NoiseSpectrum(g, 1.0)
        control = Cpmg(args.n)
        t0 = reference_time(spec, control)
        t_opt = optimal_time(spec, control).t_opt
        for t in sorted({t_opt, *(t0 * np.array([0.75, 1.25, 1.3, 1.4]))}):
            rep = crb_check(Protocol(g, 2.0, control, t), 1.0, args.shots, args.trials, args.seed)
            print(f"{x:g},{t / t0:.4f},{rep.empirical_rel_std:.5g},{rep.predicted_rel_err:.5g},"
                  f"{rep.ratio:.4f},{rep.rel_bias:.3g}")


if __name__ == "__main__":
    main()
