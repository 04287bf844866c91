"""Per-step pressure error ||P_k - Pi P(t_k)|| for a few time steps.

Shows the start-up transient caused by P_0 = 0: the error is largest in the
first steps and decays over a number of steps that grows as tau shrinks.
"""

import argparse

import numpy as np

from tpns.fem import FeSystem
from tpns.manufactured import SectorProblem
from tpns.mesh import generate_sector_mesh
from tpns.scheme import ProjectionScheme, SchemeConfig
from tpns.verification import field_error_l2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=2.0**-4)
    ap.add_argument("--ks", type=int, nargs="+", default=[2, 4, 6, 8])
    args = ap.parse_args()
    problem = SectorProblem()
    fe = FeSystem(generate_sector_mesh(problem.r1, problem.r2, problem.theta1, problem.theta2, args.h))
    forms = None
    for k in args.ks:
        tau = 2.0**-k
        scheme = ProjectionScheme(fe, problem.data(), SchemeConfig.from_final_time(1.0, tau), forms=forms)
        forms = scheme.forms
        errs = []
        scheme.run([lambda j, s: errs.append(field_error_l2(s.pressure, problem.exact_total_pressure, j * tau, fe))])
        errs = np.array(errs)
        picks = sorted(j for j in {0, 1, 2, 4, len(errs) // 4, len(errs) // 2, len(errs) - 1} if j < len(errs))
        body = "  ".join(f"k={j + 1}:{errs[j]:.2e}" for j in picks)
        print(f"tau=2^-{k}: L2(L2)={np.sqrt(tau * np.sum(errs**2)):.3e}  {body}")


if __name__ == "__main__":
    main()
