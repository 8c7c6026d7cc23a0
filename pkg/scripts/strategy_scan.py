"""Best CPMG pulse count versus g tau_c: Hahn echo at weak coupling, N_max at strong."""
import argparse
import csv
from pathlib import Path

import numpy as np

from taucrit.estimation import strategy_scan, ultimate_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, nargs="+", default=[10, 100])
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--points", type=int, default=32)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(exist_ok=True)

    _, eps0 = ultimate_bound()
    grid = np.logspace(-2, 1, args.points)
    for n_max in args.n_max:
        res = strategy_scan(grid, args.beta, n_max, jobs=args.jobs)
        path = args.out / f"strategy_beta{args.beta:g}_nmax{n_max}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["g_tau_c", "n_star", "eps_min", "eps_hahn", "eps_n_max"])
            for r in res:
                w.writerow([f"{r.g_tau_c:.12g}", r.n_star, f"{r.eps_min:.12g}",
                            f"{r.eps_by_n[0]:.12g}", f"{r.eps_by_n[-1]:.12g}"])
        stars = [r.n_star for r in res]
        switch = [grid[i] for i in range(1, len(stars)) if stars[i] != stars[i - 1]]
        print(f"N_max={n_max}: switches at g tau_c ~ {', '.join(f'{g:.3f}' for g in switch) or 'none'}; "
              f"eps_min at g tau_c={grid[-1]:g} is {res[-1].eps_min:.4f} (eps0={eps0:.4f}) -> {path}")


if __name__ == "__main__":
    main()
