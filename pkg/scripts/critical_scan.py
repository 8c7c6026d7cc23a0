"""Minimal error and optimal probing time across the critical coupling."""
import argparse
import csv
from pathlib import Path

import numpy as np

from taucrit.estimation import branch_flips, critical_point, critical_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--beta", type=float, nargs="+", default=[2.0, 3.0, 4.0])
    ap.add_argument("--points", type=int, default=64)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(exist_ok=True)

    xs = np.geomspace(0.1, 10, args.points)
    for beta in args.beta:
        rows = critical_scan(beta, args.n, xs, jobs=args.jobs)
        path = args.out / f"critical_scan_beta{beta:g}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "eps_min", "t_opt", "t0", "t_opt_over_t0", "branch"])
            for r in rows:
                w.writerow([f"{r.x:.12g}", f"{r.eps_min:.12g}", f"{r.t_opt:.12g}", f"{r.t0:.12g}",
                            f"{r.t_opt / r.t0:.12g}", r.branch])
        flips = branch_flips(rows)
        where = f"x_c ~ {critical_point(rows):.4f}" if len(flips) == 1 else f"{len(flips)} flips"
        print(f"beta={beta:g}: {where}; eps_min range {min(r.eps_min for r in rows):.4f}"
              f"-{max(r.eps_min for r in rows):.4f} -> {path}")


if __name__ == "__main__":
    main()
