"""Time-step convergence study on the quarter annulus.

    python scripts/run_study.py                      # default: h = 2^-5, tau = 2^-2 .. 2^-6
    python scripts/run_study.py --h 0.03125 --kmin 4 --kmax 8 --out out/extended

Writes errors.csv and slopes.csv and prints the fitted slopes together with
the local rates between consecutive time steps.
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from tpns.io import write_errors_csv, write_slopes_csv
from tpns.manufactured import SectorProblem
from tpns.verification import ERROR_COLUMNS, SLOPE_WINDOWS, convergence_study


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--h", type=float, default=2.0**-5, help="target mesh size")
    ap.add_argument("--kmin", type=int, default=2, help="largest step is 2^-kmin")
    ap.add_argument("--kmax", type=int, default=6, help="smallest step is 2^-kmax")
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--solver", choices=("direct", "cg"), default="direct")
    ap.add_argument("--out", default="out/study")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    taus = [2.0**-k for k in range(args.kmin, args.kmax + 1)]
    res = convergence_study(SectorProblem(), mesh_h=args.h, tau_list=taus, T=args.T, pressure_solver=args.solver)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_errors_csv(res, out / "errors.csv")
    write_slopes_csv(res, SLOPE_WINDOWS, out / "slopes.csv")

    print(f"mesh h = {res.mesh_h:.4g}")
    print("tau        " + " ".join(f"{c:>18s}" for c in ERROR_COLUMNS))
    for row in res.rows:
        print(f"{row.tau:<10.6g} " + " ".join(f"{row.errors[c]:18.6e}" for c in ERROR_COLUMNS))
    for c in ERROR_COLUMNS:
        e = res.column(c)
        local = np.log2(e[:-1] / e[1:])
        lo, hi = SLOPE_WINDOWS[c]
        flag = "ok" if lo <= res.slopes[c] <= hi else "outside"
        print(f"{c:18s} slope={res.slopes[c]:.3f} [{lo}, {hi}] {flag}  local={np.round(local, 3).tolist()}")


if __name__ == "__main__":
    main()
