"""The two cost kernels and the log-domain residual transform.

The square cost turns the residual into a cubic drive; the convex paired
with a logistic yields a bounded, saturating drive.  The log-domain (KDL)
form compresses large residuals, which is what keeps the cluster runs from
overheating far from the target.
"""

import numpy as np

from fdopt.kernels import CostKernel, apply_kdl


def main():
    sq = CostKernel("square")
    sg = CostKernel("sigmoid_convex")
    print("rho_cost   square u       sigmoid u")
    for rho in (-5.0, -1.0, -0.25, 0.0, 0.25, 1.0, 5.0):
        print(f"{rho:8.2f}   {sq.u(rho):12.6f}   {sg.u(rho):12.6f}")

    print("\nboth kernels are odd and vanish at zero:")
    for rho in (0.3, 2.0, 17.0):
        print(f"  u(-{rho}) + u({rho}) = {sq.u(-rho) + sq.u(rho):.2e} (square), "
              f"{sg.u(-rho) + sg.u(rho):.2e} (sigmoid)")

    print("\nlog-domain residual for cluster energies (offset 50):")
    target = -44.3268
    for e in (-20.0, -38.0, -41.4, -44.0, -44.3):
        plain = e - target
        kdl = apply_kdl(e, target, 50.0)
        print(f"  E = {e:7.2f}: plain residual {plain:8.4f}, log-domain {kdl:8.4f}, "
              f"square drive ratio {sq.u(plain) / sq.u(kdl):10.1f}x")


if __name__ == "__main__":
    main()
