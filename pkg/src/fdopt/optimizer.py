"""Update assembly and the optimization loop.

Two methods share one loop.  The functional-derivative method ("mlpf")
scales each target's chain-rule component by the kernelized residual and by
the proportional-plus-bias weight ``alpha * t + beta`` of the target itself;
the conventional baseline ("taylor") is plain gradient descent on the
squared residual.  Both reduce a zero residual to a zero update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .benchmarks import BenchmarkProblem
from .graph import GraphError, LayerGraph, Activations
from .kernels import CostConfig, cost_residual, cost_residual_chain

__all__ = [
    "OptimizerConfig",
    "UpdateVector",
    "OptimizationTrace",
    "layer_sensitivity",
    "neuron_update",
    "assemble_update",
    "step_taylor",
    "run_optimization",
]

METHODS = ("mlpf", "taylor")
MODES = ("optimize_vars", "optimize_params")
STATUSES = ("converged", "max_steps", "diverged")


@dataclass(frozen=True)
class OptimizerConfig:
    """Loop parameters; alpha and beta weight the aX+b update form."""

    method: str = "mlpf"
    mode: str = "optimize_vars"
    eta: float = 1e-3
    alpha: float = 1.0
    beta: float = 1.0
    max_steps: int = 10_000
    cost_tol: float = 1e-6
    step_tol: float = 1e-30
    factorized: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if not (self.cost_tol > 0 and self.step_tol > 0):
            raise ValueError("tolerances must be > 0")


@dataclass(frozen=True)
class UpdateVector:
    """Per-target signed step, one component per optimized scalar."""

    delta: np.ndarray
    eta: float
    alpha: float
    beta: float


def layer_sensitivity(graph: LayerGraph, acts: Activations, layer_id: int):
    """d rho_N / d rho_i at the recorded activations; 1 for the last layer."""
    if not (1 <= layer_id <= len(graph.layers)):
        raise GraphError(f"layer id {layer_id} out of range 1..{len(graph.layers)}")
    if layer_id == len(graph.layers):
        return 1.0
    _, cots = graph.backward(acts)
    c = cots[layer_id - 1]
    if c is None:
        if isinstance(acts.values[layer_id - 1], float):
            return 0.0
        return np.zeros_like(acts.values[layer_id - 1])
    return c


def neuron_update(graph: LayerGraph, acts: Activations, layer_id: int,
                  target_id: int, mode: str = "optimize_vars",
                  alpha: float = 1.0, beta: float = 1.0):
    """(d rho_i / d t) * (alpha * t + beta) for one target scalar t.

    The proportional term alpha * t carries the target's own value into the
    step; the bias term beta is the plain chain-rule component.
    """
    if not (1 <= layer_id <= len(graph.layers)):
        raise GraphError(f"layer id {layer_id} out of range 1..{len(graph.layers)}")
    layer = graph.layers[layer_id - 1]
    ins = graph._gather(layer, acts.x, acts.values)
    value = acts.values[layer_id - 1]
    if mode == "optimize_params":
        if not (0 <= target_id < len(layer.params)):
            raise GraphError(f"param id {target_id} out of range for layer {layer_id}")
        t = float(layer.params[target_id])
        d = layer.d_param(ins, value, target_id)
    elif mode == "optimize_vars":
        if not (0 <= target_id < graph.variable_dim):
            raise GraphError(f"variable id {target_id} out of range")
        t = float(acts.x[target_id])
        d = None
        for which, (kind, ref) in enumerate(layer.inputs):
            if kind == "x" and ref == target_id:
                piece = layer.d_input(ins, value, which)
            elif kind == "xall":
                jac = np.asarray(layer.d_input(ins, value, which))
                piece = jac[..., target_id]
            else:
                continue
            d = piece if d is None else d + piece
        if d is None:
            d = 0.0 if isinstance(value, float) else np.zeros_like(value)
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return d * (alpha * t + beta)


def _targets_and_gradient(graph: LayerGraph, acts: Activations, mode: str,
                          factored: bool = False):
    """Current target vector and d rho_N / d target via one reverse sweep."""
    xgrad, cots = graph.backward(acts, factored=factored)
    if mode == "optimize_vars":
        return acts.x, xgrad
    entries = graph.param_gradient(acts, cots)
    t = np.array([layer.params[j] for layer, j, _ in entries])
    g = np.array([g for _, _, g in entries])
    return t, g


def _write_params(graph: LayerGraph, values: np.ndarray):
    k = 0
    for layer in graph.layers:
        for j in layer.opt_params:
            layer.params[j] = values[k]
            k += 1


def assemble_update(graph: LayerGraph, x, config: OptimizerConfig,
                    cost: CostConfig) -> UpdateVector:
    """Functional-derivative step for every optimized scalar.

    delta_t = -eta * u(rho_cost) * (alpha * t + beta) * d rho_N / d t,
    where the chain component sums the sensitivity-weighted partials of
    every layer the target feeds directly.  With ``config.factorized`` the
    chain component of product layers is accumulated factor by factor.
    """
    x = np.asarray(x, dtype=float)
    acts = graph.forward(x)
    u = cost.kernel.u(cost_residual(acts.rho_n, cost))
    t, g = _targets_and_gradient(graph, acts, config.mode, config.factorized)
    delta = (-config.eta * u) * ((config.alpha * t + config.beta) * g)
    if not np.all(np.isfinite(delta)):
        bad = int(np.argmax(~np.isfinite(delta)))
        raise GraphError(f"non-finite update component for target {bad} "
                         f"(graph {graph.name!r}, mode {config.mode})")
    return UpdateVector(delta, config.eta, config.alpha, config.beta)


def step_taylor(graph: LayerGraph, x, eta: float, cost: CostConfig,
                mode: str = "optimize_vars") -> UpdateVector:
    """Chain-rule gradient descent on the squared residual X = rho_cost**2."""
    x = np.asarray(x, dtype=float)
    acts = graph.forward(x)
    rho_c = cost_residual(acts.rho_n, cost)
    chain = cost_residual_chain(acts.rho_n, cost)
    _, g = _targets_and_gradient(graph, acts, mode)
    delta = (-eta * 2.0 * rho_c * chain) * g
    if not np.all(np.isfinite(delta)):
        bad = int(np.argmax(~np.isfinite(delta)))
        raise GraphError(f"non-finite taylor update component for target {bad}")
    return UpdateVector(delta, eta, 0.0, 1.0)


class OptimizationTrace:
    """Per-iteration record of one run.

    Columns are numpy arrays of equal length: iteration, rho_n, rho_cost,
    objective, and either the target components (dimension <= 5) or the
    target 2-norm.  ``meta`` carries the config echo written by the harness.
    """

    def __init__(self, columns: dict, status: str, final_target: np.ndarray,
                 steps: int, note: str = "", meta: dict | None = None):
        self.columns = columns
        self.status = status
        self.final_target = final_target
        self.steps = steps
        self.note = note
        self.meta = dict(meta or {})
        self.min_infnorm = math.inf
        self.first_infnorm_hit = None

    @property
    def column_names(self):
        return list(self.columns.keys())

    @property
    def n_rows(self):
        return len(self.columns["iteration"])

    def final_row(self) -> dict:
        return {k: v[-1] for k, v in self.columns.items()}


class _Recorder:
    def __init__(self, max_rows: int, target_dim: int):
        self.track_components = target_dim <= 5
        self.target_dim = target_dim
        self.iteration = np.zeros(max_rows)
        self.rho_n = np.zeros(max_rows)
        self.rho_cost = np.zeros(max_rows)
        self.objective = np.zeros(max_rows)
        if self.track_components:
            self.targets = np.zeros((max_rows, target_dim))
        else:
            self.target_norm = np.zeros(max_rows)
        self.n = 0

    def record(self, step, rho_n, rho_c, x):
        k = self.n
        self.iteration[k] = step
        self.rho_n[k] = rho_n
        self.rho_cost[k] = rho_c
        self.objective[k] = rho_n
        if self.track_components:
            self.targets[k] = x
        else:
            self.target_norm[k] = math.sqrt(float(np.dot(x, x)))
        self.n = k + 1

    def columns(self) -> dict:
        cols = {
            "iteration": self.iteration[:self.n].copy(),
            "rho_n": self.rho_n[:self.n].copy(),
            "rho_cost": self.rho_cost[:self.n].copy(),
            "objective": self.objective[:self.n].copy(),
        }
        if self.track_components:
            for d in range(self.target_dim):
                cols[f"target_{d + 1}"] = self.targets[:self.n, d].copy()
        else:
            cols["target_norm"] = self.target_norm[:self.n].copy()
        return cols


def run_optimization(problem: BenchmarkProblem, config: OptimizerConfig,
                     cost: CostConfig, initial=None, probe=None,
                     probe_every: int = 1,
                     track_infnorm_below: float | None = None,
                     eval_point=None) -> OptimizationTrace:
    """Iterate updates until the residual or step vanishes or budgets expire.

    The trace records the iterate before each update, so iteration 0 is the
    initial point and a run started at a zero-residual point terminates
    immediately.  Divergence (iterate escaping 1e3 x the domain radius, or a
    non-finite evaluation) flags the trace instead of raising.  Runs are
    deterministic: nothing here consumes randomness, the seed only labels
    the run.

    In parameter mode ``initial`` holds the starting parameter vector and
    ``eval_point`` the fixed variable vector the graph is evaluated at.
    """
    graph = problem.graph
    if initial is None:
        initial = problem.canonical_initials[0]
    x = np.asarray(initial, dtype=float).copy()
    target_dim = x.size
    param_mode = config.mode == "optimize_params"
    if param_mode:
        if eval_point is None:
            raise ValueError("parameter mode needs the fixed eval_point")
        eval_point = np.asarray(eval_point, dtype=float)
    guard = problem.divergence_radius

    rec = _Recorder(config.max_steps + 1, target_dim)
    status = "max_steps"
    note = ""
    min_inf = math.inf
    first_hit = None

    mlpf = config.method == "mlpf"
    eta, alpha, beta = config.eta, config.alpha, config.beta
    kernel_u = cost.kernel.u

    with np.errstate(all="ignore"):
        for step in range(config.max_steps + 1):
            try:
                if param_mode:
                    _write_params(graph, x)
                    acts = graph.forward(eval_point)
                else:
                    acts = graph.forward(x)
                rho_n = acts.rho_n
                rho_c = cost_residual(rho_n, cost)
            except (GraphError, ValueError, ArithmeticError) as exc:
                if step == 0:
                    # nothing recorded yet: the configuration itself is bad
                    raise ValueError(f"initial point not evaluable: {exc}") from exc
                status = "diverged"
                note = f"evaluation error at step {step}: {exc}"
                break

            rec.record(step, rho_n, rho_c, x)
            if track_infnorm_below is not None:
                m = float(np.max(np.abs(x)))
                if m < min_inf:
                    min_inf = m
                if first_hit is None and m < track_infnorm_below:
                    first_hit = step
            if probe is not None and step % probe_every == 0:
                probe(step, x, rho_n)

            if abs(rho_c) < config.cost_tol:
                status = "converged"
                break
            if step == config.max_steps:
                status = "max_steps"
                break

            try:
                if mlpf:
                    u = kernel_u(rho_c)
                    t, g = _targets_and_gradient(graph, acts, config.mode,
                                                 config.factorized)
                    delta = (-eta * u) * ((alpha * t + beta) * g)
                else:
                    chain = cost_residual_chain(rho_n, cost)
                    t, g = _targets_and_gradient(graph, acts, config.mode)
                    delta = (-eta * 2.0 * rho_c * chain) * g
            except (GraphError, ValueError, ArithmeticError) as exc:
                status = "diverged"
                note = f"update error at step {step}: {exc}"
                break

            if not np.all(np.isfinite(delta)):
                status = "diverged"
                note = f"non-finite update at step {step}"
                break
            if float(np.max(np.abs(delta))) < config.step_tol:
                status = "converged"
                note = "step norm below tolerance"
                break
            x = x + delta
            if float(np.max(np.abs(x))) > guard:
                status = "diverged"
                note = f"iterate escaped guard radius {guard:g}"
                break

    trace = OptimizationTrace(rec.columns(), status, x.copy(), steps=rec.n - 1,
                              note=note)
    trace.min_infnorm = min_inf
    trace.first_infnorm_hit = first_hit
    return trace
