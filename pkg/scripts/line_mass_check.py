"""Compare the transformed line mass with the closed-form line density for two-parameter configurations.

For ``|2 s10 s11| < 1`` the two agree. Otherwise the difference is a rank-one
matrix ``w q(y*) q(y*)^T`` in the edge basis, i.e. a point mass at ``(x0, y*)``
with ``y* > 1`` that the closed-form density omits. The script reports
``y*`` and ``w`` recovered from that rank-one part.

Usage: python scripts/line_mass_check.py [s11 s10 [m]]
"""

import argparse
import warnings

import numpy as np
from scipy.optimize import brentq

from cheb2d.darboux import DarbouxConfig, alpha_matrix, hat_measure
from cheb2d.measures import line_formula_valid, line_mass_matrix, measure_two_param
from cheb2d.parameters import DeformationFamily
from cheb2d.recurrence import jacobi_operator


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("s11", type=float, nargs="?", default=0.6)
    ap.add_argument("s10", type=float, nargs="?", default=1.0)
    ap.add_argument("m", type=int, nargs="?", default=3)
    args = ap.parse_args()

    one = jacobi_operator(DeformationFamily.one_param(args.s11), args.m)
    two = jacobi_operator(DeformationFamily.two_param(args.s11, args.s10), args.m)
    cfg = DarbouxConfig.from_s10(args.s10)
    alpha = alpha_matrix(args.s11, args.s10, args.m)
    transformed = cfg.z0**2 * alpha @ hat_measure(one, cfg).r_hat @ alpha.T
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mu = measure_two_param(args.s11, args.s10)
    c = two.y_basis
    closed = c @ line_mass_matrix(mu, args.m) @ c.T
    gap = transformed - closed
    eig = np.linalg.eigvalsh(gap)

    print(f"s11={args.s11} s10={args.s10} m={args.m} x0={cfg.x0:.6g}")
    print(f"closed-form line valid: {line_formula_valid(args.s11, args.s10)}")
    print(f"||gap|| = {np.linalg.norm(gap):.3e}, eigenvalues {np.array2string(eig, precision=3)}")
    if np.linalg.norm(gap) < 1e-10:
        return
    w = gap[0, 0]
    q1 = gap[1, 0] / w
    ystar = brentq(lambda y: two.y_values(np.array(y))[1] - q1, -1.0, 1e3) if args.m >= 1 else float("nan")
    rank_one = w * np.outer(two.y_values(np.array(ystar)), two.y_values(np.array(ystar)))
    print(f"missing atom at y* = {ystar:.12g}, mass w = {w:.12g}")
    print(f"rank-one fit residual {np.linalg.norm(gap - rank_one):.3e}")


if __name__ == "__main__":
    main()
