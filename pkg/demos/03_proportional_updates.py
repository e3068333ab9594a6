"""How the proportional-plus-bias update differs from plain gradient descent.

On a single-layer square objective both methods step along the gradient;
the functional-derivative method rescales each component by the kernelized
residual and by (alpha * target + beta), so the step carries the target's
own magnitude.  The fixed-point property (zero residual means zero step) is
shown at the bottom.
"""

import numpy as np

import fdopt
from fdopt.graph import LayerGraph, unary_layer
from fdopt.kernels import CostConfig, CostKernel
from fdopt.optimizer import OptimizerConfig, assemble_update, step_taylor


def main():
    graph = LayerGraph([unary_layer(1, "square", ("x", 0), "power", p=2.0)],
                       variable_dim=1)
    cost = CostConfig(kernel=CostKernel("square"), rho_target=0.0)

    print("x       mlpf delta (a=1, b=1)   mlpf delta (a=0, b=1)   taylor delta")
    for x0 in (2.0, 1.0, 0.5, 0.1):
        x = np.array([x0])
        full = assemble_update(graph, x, OptimizerConfig(eta=1.0), cost)
        bias = assemble_update(graph, x, OptimizerConfig(eta=1.0, alpha=0.0), cost)
        tay = step_taylor(graph, x, eta=1.0, cost=cost)
        print(f"{x0:5.2f}   {full.delta[0]:20.6f}   {bias.delta[0]:20.6f}   "
              f"{tay.delta[0]:12.6f}")

    print("\nat the target the residual vanishes and so do all updates:")
    x = np.array([0.0])
    for label, up in (
        ("mlpf", assemble_update(graph, x, OptimizerConfig(eta=1.0), cost)),
        ("taylor", step_taylor(graph, x, eta=1.0, cost=cost)),
    ):
        print(f"  {label}: delta = {up.delta}")

    print("\nshort run on the 2-variable bowl |x|^2 from (0.7, -0.4):")
    from fdopt.graph import sum_of_squares_layer

    bowl = LayerGraph([sum_of_squares_layer(1, "bowl", (("x", 0), ("x", 1)))],
                      variable_dim=2)
    from fdopt.benchmarks import BenchmarkProblem

    prob = BenchmarkProblem(name="bowl", graph=bowl, domain_box=(-10, 10),
                            global_minimum_location=np.zeros(2),
                            global_minimum_value=0.0,
                            canonical_initials=(np.array([0.7, -0.4]),),
                            rho_target=0.0, divergence_radius=1e4)
    cfg = OptimizerConfig(method="mlpf", eta=0.5, max_steps=4000, cost_tol=1e-10)
    tr = fdopt.run_optimization(prob, cfg, cost)
    print(f"  status {tr.status} after {tr.steps} steps, "
          f"final objective {tr.columns['objective'][-1]:.3e}")


if __name__ == "__main__":
    main()
