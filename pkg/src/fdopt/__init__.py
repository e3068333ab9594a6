"""Functional-derivative gradient descent over layered continuous objectives.

The package decomposes a closed-form objective into a hierarchy of layers
with analytic partials (:mod:`fdopt.graph`), derives the update from a
convex cost through its kernel (:mod:`fdopt.kernels`), assembles
proportional-plus-bias steps per target (:mod:`fdopt.optimizer`), and ships
three global-minimum benchmarks (:mod:`fdopt.benchmarks`) plus a run
harness with a CLI (:mod:`fdopt.harness`, ``fdopt``).
"""

__version__ = "0.1.0"

from .graph import (
    Activations,
    DomainError,
    GraphError,
    LayerGraph,
    LayerNode,
    NonFiniteLayerError,
    eval_forward,
    eval_with_activations,
    fd_gradient,
    partial_wrt_input,
    partial_wrt_param,
)
from .kernels import (
    CostConfig,
    CostKernel,
    KdlDomainError,
    apply_kdl,
    cost_update,
)
from .optimizer import (
    OptimizationTrace,
    OptimizerConfig,
    UpdateVector,
    assemble_update,
    layer_sensitivity,
    neuron_update,
    run_optimization,
    step_taylor,
)
from .benchmarks import (
    BenchmarkProblem,
    ClusterGeometry,
    LJ13_GLOBAL_MIN_ENERGY,
    ctl_problem,
    dvg02_problem,
    icosahedron_coords,
    lj13_problem,
    lj_energy,
    lj_local_minimum_init,
    problem_by_name,
)

__all__ = [name for name in dir() if not name.startswith("_")]
