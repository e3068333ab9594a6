"""Layered decomposition of continuous objectives with hand-authored partials.

A :class:`LayerGraph` is an ordered list of :class:`LayerNode` objects.
Layer ``i`` may read components of the variable vector ``x`` and the outputs
of layers ``< i``; the last layer produces the scalar objective.  Layer
values are Python floats for scalar stages and 1-D numpy arrays for stages
that carry one value per term (e.g. one residual per data point, one energy
per particle pair).

Every layer carries analytic partial derivatives, so the full gradient of
the final scalar with respect to the variables (or with respect to a layer's
parameters) is assembled by a single reverse sweep over the layers.  There
is no tape and no operator overloading: graphs are built programmatically,
one per benchmark, from the small library of layer constructors below.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GraphError",
    "NonFiniteLayerError",
    "DomainError",
    "Factor",
    "LayerNode",
    "LayerGraph",
    "Activations",
    "eval_forward",
    "eval_with_activations",
    "eval_with_layer_override",
    "partial_wrt_param",
    "partial_wrt_input",
    "fd_gradient",
    "affine_layer",
    "sum_of_squares_layer",
    "unary_layer",
    "product_layer",
    "sum_layer",
    "power_by_param_layer",
    "UnaryMap",
    "IDENT",
    "SIN",
    "COS",
]


class GraphError(ValueError):
    """Base error for graph construction and evaluation problems."""


class NonFiniteLayerError(GraphError):
    """A layer produced a non-finite value (domain violation upstream)."""

    def __init__(self, layer_index: int, layer_name: str, detail: str = ""):
        self.layer_index = layer_index
        self.layer_name = layer_name
        msg = f"layer {layer_index} ({layer_name}) produced a non-finite value"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DomainError(GraphError):
    """An input left the region where a layer is defined."""


def _is_finite(value) -> bool:
    if isinstance(value, float):
        return math.isfinite(value)
    return bool(np.all(np.isfinite(value)))


class Factor:
    """One multiplicative sub-term of a product layer.

    ``g`` maps the factor's input value to the factor value and ``dg`` is its
    derivative.  The product of all factor values equals the layer value.
    """

    __slots__ = ("name", "g", "dg")

    def __init__(self, name: str, g: Callable, dg: Callable):
        self.name = name
        self.g = g
        self.dg = dg


class UnaryMap(Factor):
    """Named scalar map used both as product factors and unary transfers."""


def _ident(u):
    return u


def _one(u):
    if isinstance(u, float):
        return 1.0
    return np.ones_like(u)


IDENT = UnaryMap("ident", _ident, _one)
SIN = UnaryMap("sin", lambda u: math.sin(u) if isinstance(u, float) else np.sin(u),
               lambda u: math.cos(u) if isinstance(u, float) else np.cos(u))
COS = UnaryMap("cos", lambda u: math.cos(u) if isinstance(u, float) else np.cos(u),
               lambda u: -math.sin(u) if isinstance(u, float) else -np.sin(u))


class LayerNode:
    """One differentiable stage of a layered objective.

    Parameters
    ----------
    index : 1-based position in the graph.
    inputs : tuple of sources, each ``("x", k)`` for variable component k,
        ``("xall", 0)`` for the whole variable vector, or ``("layer", j)``
        for the output of layer j (1-based).  Sources may repeat.
    fn : callable(ins, params) -> value.
    d_input : callable(ins, params, value, which) -> partial of the value
        with respect to ``ins[which]`` (scalar, per-component array, or a
        full Jacobian for vector-to-vector stages).
    d_param : optional callable(ins, params, value, j) -> partial with
        respect to ``params[j]``.
    vjp : optional fast path, callable(ins, params, value, cot) returning a
        cotangent per input; derived from ``d_input`` when omitted.
    factors : optional tuple of :class:`Factor` when the layer is a product
        of sub-terms; ``prod(factor values) == value``.
    opt_params : indices of ``params`` exposed as optimization targets in
        parameter mode (empty for the benchmark graphs, whose parameters are
        structural constants).
    """

    __slots__ = ("index", "name", "inputs", "params", "_fn", "_d_input",
                 "_d_param", "_vjp", "factors", "opt_params")

    def __init__(self, index, name, inputs, fn, d_input, params=None,
                 d_param=None, vjp=None, factors=None, opt_params=()):
        self.index = int(index)
        self.name = str(name)
        self.inputs = tuple(inputs)
        self.params = params if params is not None else np.zeros(0)
        self._fn = fn
        self._d_input = d_input
        self._d_param = d_param
        self._vjp = vjp
        self.factors = tuple(factors) if factors else None
        self.opt_params = tuple(opt_params)

    def fn(self, ins):
        return self._fn(ins, self.params)

    def d_input(self, ins, value, which):
        return self._d_input(ins, self.params, value, which)

    def d_param(self, ins, value, j):
        if self._d_param is None:
            raise GraphError(f"layer {self.index} ({self.name}) has no parameter partials")
        return self._d_param(ins, self.params, value, j)

    def vjp(self, ins, value, cot):
        if self._vjp is not None:
            return self._vjp(ins, self.params, value, cot)
        outs = []
        for which in range(len(self.inputs)):
            d = self.d_input(ins, value, which)
            outs.append(_contract(d, cot, ins[which], value))
        return tuple(outs)


def _contract(d, cot, input_value, layer_value):
    """Fold a partial and a cotangent into the input's cotangent."""
    scalar_in = isinstance(input_value, float)
    scalar_out = isinstance(layer_value, float)
    if scalar_out:
        if scalar_in:
            return cot * d
        return cot * d  # d is the per-component partial array
    if scalar_in:
        return float(np.dot(np.ravel(cot), np.ravel(d)))
    d = np.asarray(d)
    if d.ndim == 2:  # full Jacobian (m, n)
        return np.asarray(cot) @ d
    return np.asarray(cot) * d  # elementwise vector stage


class Activations:
    """Per-layer values for one evaluation point."""

    __slots__ = ("x", "values")

    def __init__(self, x: np.ndarray, values: list):
        self.x = x
        self.values = values

    @property
    def rho_n(self) -> float:
        return self.values[-1]

    def __len__(self):
        return len(self.values)


class LayerGraph:
    """Ordered hierarchy of layers; the last layer is the scalar objective."""

    def __init__(self, layers: Sequence[LayerNode], variable_dim: int, name: str = ""):
        layers = list(layers)
        for pos, layer in enumerate(layers, start=1):
            if layer.index != pos:
                raise GraphError(f"layer {layer.name} has index {layer.index}, expected {pos}")
            for src in layer.inputs:
                kind, ref = src
                if kind == "layer" and not (1 <= ref < pos):
                    raise GraphError(
                        f"layer {pos} ({layer.name}) reads layer {ref}; only earlier layers allowed")
                if kind == "x" and not (0 <= ref < variable_dim):
                    raise GraphError(f"layer {pos} ({layer.name}) reads x[{ref}] out of range")
                if kind not in ("layer", "x", "xall"):
                    raise GraphError(f"unknown input source {src!r}")
        self.layers = tuple(layers)
        self.variable_dim = int(variable_dim)
        self.name = name

    # -- forward ---------------------------------------------------------

    def _gather(self, layer: LayerNode, x: np.ndarray, values: list):
        ins = []
        for kind, ref in layer.inputs:
            if kind == "layer":
                ins.append(values[ref - 1])
            elif kind == "x":
                ins.append(float(x[ref]))
            else:
                ins.append(x)
        return ins

    def forward(self, x: np.ndarray) -> Activations:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.variable_dim,):
            raise GraphError(f"expected x of shape ({self.variable_dim},), got {x.shape}")
        values: list = []
        for layer in self.layers:
            ins = self._gather(layer, x, values)
            try:
                v = layer.fn(ins)
            except DomainError:
                raise
            except (ValueError, ArithmeticError) as exc:
                # math.* raises where numpy would produce nan/inf
                raise NonFiniteLayerError(layer.index, layer.name, str(exc)) from None
            if not _is_finite(v):
                raise NonFiniteLayerError(layer.index, layer.name)
            values.append(v)
        if not isinstance(values[-1], float):
            raise GraphError("final layer must produce a scalar")
        return Activations(x, values)

    # -- reverse sweep ----------------------------------------------------

    def backward(self, acts: Activations, factored: bool = False):
        """Return (xgrad, cots): the variable gradient and per-layer
        sensitivities d rho_N / d rho_i accumulated by reverse sweep."""
        n_layers = len(self.layers)
        cots: list = [None] * n_layers
        cots[-1] = 1.0
        xgrad = np.zeros(self.variable_dim)
        for pos in range(n_layers - 1, -1, -1):
            cot = cots[pos]
            if cot is None:
                continue
            layer = self.layers[pos]
            ins = self._gather(layer, acts.x, acts.values)
            if factored and layer.factors is not None:
                in_cots = _factored_vjp(layer, ins, acts.values[pos], cot)
            else:
                in_cots = layer.vjp(ins, acts.values[pos], cot)
            for (kind, ref), c in zip(layer.inputs, in_cots):
                if kind == "layer":
                    prev = cots[ref - 1]
                    cots[ref - 1] = c if prev is None else prev + c
                elif kind == "x":
                    xgrad[ref] += c
                else:
                    xgrad += c
        return xgrad, cots

    def gradient(self, x: np.ndarray, acts: Activations | None = None) -> np.ndarray:
        if acts is None:
            acts = self.forward(x)
        return self.backward(acts)[0]

    def param_gradient(self, acts: Activations, cots: list):
        """Partial of rho_N with respect to each optimizable parameter,
        as a list of (layer, param_index, value)."""
        out = []
        for pos, layer in enumerate(self.layers):
            if not layer.opt_params:
                continue
            cot = cots[pos]
            ins = self._gather(layer, acts.x, acts.values)
            for j in layer.opt_params:
                d = layer.d_param(ins, acts.values[pos], j)
                if cot is None:
                    g = 0.0
                elif isinstance(acts.values[pos], float):
                    g = cot * d
                else:
                    g = float(np.dot(np.ravel(cot), np.ravel(d)))
                out.append((layer, j, g))
        return out


def _factored_vjp(layer: LayerNode, ins, value, cot):
    """Per-factor backward path for product layers.

    Each factor contributes through its own partial weighted by the product
    of the other factor values; the sum over factors recombines to the
    product rule, so this path is algebraically identical to the standard
    one and exists to expose the term-by-term decomposition.
    """
    factors = layer.factors
    vals = [f.g(u) for f, u in zip(factors, ins)]
    outs = []
    for i, (f, u) in enumerate(zip(factors, ins)):
        others = None
        for j, v in enumerate(vals):
            if j == i:
                continue
            others = v if others is None else others * v
        if others is None:
            others = 1.0
        contrib = cot * others * f.dg(u)
        if not isinstance(value, float) and isinstance(u, float):
            contrib = float(np.sum(contrib))
        outs.append(contrib)
    return tuple(outs)


# -- module-level operations ----------------------------------------------


def eval_forward(graph: LayerGraph, x) -> float:
    """Value of the objective rho_N at x."""
    return graph.forward(np.asarray(x, dtype=float)).rho_n


def eval_with_activations(graph: LayerGraph, x) -> Activations:
    """Forward evaluation that records every intermediate layer value."""
    return graph.forward(np.asarray(x, dtype=float))


def eval_with_layer_override(graph: LayerGraph, x, layer_id: int, value) -> float:
    """Re-evaluate the graph with layer ``layer_id`` forced to ``value``.

    Test utility backing the perturbation oracle for layer sensitivities;
    not used by any optimization path.
    """
    x = np.asarray(x, dtype=float)
    _check_layer_id(graph, layer_id)
    values: list = []
    for layer in graph.layers:
        if layer.index == layer_id:
            values.append(value)
            continue
        ins = graph._gather(layer, x, values)
        values.append(layer.fn(ins))
    return values[-1]


def _check_layer_id(graph: LayerGraph, layer_id: int):
    if not (1 <= layer_id <= len(graph.layers)):
        raise GraphError(f"layer id {layer_id} out of range 1..{len(graph.layers)}")


def partial_wrt_param(graph: LayerGraph, layer_id: int, param_id: int, x):
    """Analytic partial of layer ``layer_id`` with respect to its parameter."""
    _check_layer_id(graph, layer_id)
    acts = graph.forward(np.asarray(x, dtype=float))
    layer = graph.layers[layer_id - 1]
    if not (0 <= param_id < len(layer.params)):
        raise GraphError(f"param id {param_id} out of range for layer {layer_id} ({layer.name})")
    ins = graph._gather(layer, acts.x, acts.values)
    d = layer.d_param(ins, acts.values[layer_id - 1], param_id)
    if not _is_finite(d if isinstance(d, float) else np.asarray(d)):
        raise NonFiniteLayerError(layer.index, layer.name, "parameter partial")
    return d


def partial_wrt_input(graph: LayerGraph, layer_id: int, input_id: int, x):
    """Analytic partial of layer ``layer_id`` with respect to one input."""
    _check_layer_id(graph, layer_id)
    acts = graph.forward(np.asarray(x, dtype=float))
    layer = graph.layers[layer_id - 1]
    if not (0 <= input_id < len(layer.inputs)):
        raise GraphError(f"input id {input_id} out of range for layer {layer_id} ({layer.name})")
    ins = graph._gather(layer, acts.x, acts.values)
    d = layer.d_input(ins, acts.values[layer_id - 1], input_id)
    if not _is_finite(d if isinstance(d, float) else np.asarray(d)):
        raise NonFiniteLayerError(layer.index, layer.name, "input partial")
    return d


def fd_gradient(objective: Callable, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient; verification only, never an optimizer path."""
    if h <= 0:
        raise ValueError("h must be > 0")
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        fp = objective(xp)
        fm = objective(xm)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ValueError(f"non-finite objective while differencing component {k}")
        g[k] = (fp - fm) / (2.0 * h)
    return g


# -- layer constructors -----------------------------------------------------


def affine_layer(index, name, inputs, coeffs, const=0.0):
    """value = const + sum_i coeffs[i] * in_i; params = [const, *coeffs]."""
    params = np.array([float(const), *(float(c) for c in coeffs)])

    def fn(ins, p):
        v = float(p[0])
        for k, u in enumerate(ins):
            v = v + p[k + 1] * u
        return v

    def d_input(ins, p, value, which):
        u = ins[which]
        c = float(p[which + 1])
        return c if isinstance(u, float) else np.full_like(u, c)

    def d_param(ins, p, value, j):
        if j == 0:
            return 1.0
        return ins[j - 1]

    return LayerNode(index, name, inputs, fn, d_input, params=params, d_param=d_param)


def sum_of_squares_layer(index, name, inputs):
    """value = sum_i in_i**2 over scalar inputs."""

    def fn(ins, _p):
        v = 0.0
        for u in ins:
            v += u * u
        return v

    def d_input(ins, _p, value, which):
        return 2.0 * ins[which]

    return LayerNode(index, name, inputs, fn, d_input)


def _sign(u):
    if isinstance(u, float):
        return 0.0 if u == 0.0 else math.copysign(1.0, u)
    return np.sign(u)


_UNARY_KINDS = {}


def _register_unary(kind):
    def deco(builder):
        _UNARY_KINDS[kind] = builder
        return builder
    return deco


@_register_unary("sqrt")
def _mk_sqrt(p):
    def fn(u):
        return math.sqrt(u) if isinstance(u, float) else np.sqrt(u)

    def dfn(u, v):
        return 0.5 / v if v != 0.0 else math.inf

    def vjp(u, v, cot):
        if cot == 0.0:
            return 0.0  # exact: zero cotangent kills the singular direction
        return cot * 0.5 / v
    return fn, dfn, vjp


@_register_unary("exp")
def _mk_exp(p):
    def fn(u):
        return math.exp(u) if isinstance(u, float) else np.exp(u)

    def dfn(u, v):
        return v
    return fn, dfn, None


@_register_unary("exp_abs")
def _mk_exp_abs(p):
    # d/du exp(|u|) with the subgradient convention sign(0) = 0
    def fn(u):
        return math.exp(abs(u)) if isinstance(u, float) else np.exp(np.abs(u))

    def dfn(u, v):
        return _sign(u) * v
    return fn, dfn, None


@_register_unary("abs_plus")
def _mk_abs_plus(p):
    c = float(p)

    def fn(u):
        return abs(u) + c if isinstance(u, float) else np.abs(u) + c

    def dfn(u, v):
        return _sign(u)
    return fn, dfn, None


@_register_unary("power")
def _mk_power(p):
    q = float(p)

    def fn(u):
        return u ** q

    def dfn(u, v):
        return q * u ** (q - 1.0)
    return fn, dfn, None


@_register_unary("neg_reciprocal")
def _mk_neg_reciprocal(p):
    def fn(u):
        return -1.0 / u

    def dfn(u, v):
        return v * v  # 1/u**2
    return fn, dfn, None


@_register_unary("sin")
def _mk_sin(p):
    def fn(u):
        return math.sin(u) if isinstance(u, float) else np.sin(u)

    def dfn(u, v):
        return math.cos(u) if isinstance(u, float) else np.cos(u)
    return fn, dfn, None


@_register_unary("cos")
def _mk_cos(p):
    def fn(u):
        return math.cos(u) if isinstance(u, float) else np.cos(u)

    def dfn(u, v):
        return -math.sin(u) if isinstance(u, float) else -np.sin(u)
    return fn, dfn, None


@_register_unary("tanh")
def _mk_tanh(p):
    def fn(u):
        return math.tanh(u) if isinstance(u, float) else np.tanh(u)

    def dfn(u, v):
        return 1.0 - v * v
    return fn, dfn, None


@_register_unary("log")
def _mk_log(p):
    def fn(u):
        return math.log(u) if isinstance(u, float) else np.log(u)

    def dfn(u, v):
        return 1.0 / u
    return fn, dfn, None


@_register_unary("identity")
def _mk_identity(p):
    def fn(u):
        return u

    def dfn(u, v):
        return _one(u)
    return fn, dfn, None


def unary_layer(index, name, source, kind, p=None):
    """Single-input layer applying one of the authored transfer kinds."""
    if kind not in _UNARY_KINDS:
        raise GraphError(f"unknown unary layer kind {kind!r}")
    fn1, dfn1, vjp1 = _UNARY_KINDS[kind](p)

    def fn(ins, _p):
        return fn1(ins[0])

    def d_input(ins, _p, value, which):
        return dfn1(ins[0], value)

    vjp = None
    if vjp1 is not None:
        def vjp(ins, _p, value, cot):
            return (vjp1(ins[0], value, cot),)

    params = np.zeros(0) if p is None else np.array([float(p)])
    return LayerNode(index, name, (source,), fn, d_input, params=params, vjp=vjp)


def product_layer(index, name, inputs, maps=None):
    """value = prod_i g_i(in_i); the maps are the layer's factors."""
    n = len(inputs)
    if maps is None:
        maps = [IDENT] * n
    if len(maps) != n:
        raise GraphError("one map per input required")
    maps = tuple(maps)

    def fn(ins, _p):
        v = maps[0].g(ins[0])
        for m, u in zip(maps[1:], ins[1:]):
            v = v * m.g(u)
        return v

    def d_input(ins, _p, value, which):
        d = maps[which].dg(ins[which])
        for j, (m, u) in enumerate(zip(maps, ins)):
            if j != which:
                d = d * m.g(u)
        return d

    def vjp(ins, _p, value, cot):
        vals = [m.g(u) for m, u in zip(maps, ins)]
        outs = []
        for i in range(n):
            others = None
            for j in range(n):
                if j == i:
                    continue
                others = vals[j] if others is None else others * vals[j]
            if others is None:
                others = 1.0
            c = cot * others * maps[i].dg(ins[i])
            if not isinstance(value, float) and isinstance(ins[i], float):
                c = float(np.sum(c))
            outs.append(c)
        return tuple(outs)

    return LayerNode(index, name, inputs, fn, d_input, vjp=vjp, factors=maps)


def sum_layer(index, name, source):
    """Scalar sum of one vector input."""

    def fn(ins, _p):
        return float(np.sum(ins[0]))

    def d_input(ins, _p, value, which):
        return np.ones_like(ins[0])

    def vjp(ins, _p, value, cot):
        return (np.full_like(ins[0], cot),)

    return LayerNode(index, name, (source,), fn, d_input, vjp=vjp)


def power_by_param_layer(index, name, source, exponents):
    """value[k] = in ** exponents[k] for a scalar input and vector exponents."""
    t = np.asarray(exponents, dtype=float)

    def fn(ins, _p):
        return ins[0] ** t

    def d_input(ins, _p, value, which):
        return t * ins[0] ** (t - 1.0)

    def d_param(ins, _p, value, j):
        # d(u**t_j)/dt_j = u**t_j * log(u)
        out = np.zeros_like(t)
        out[j] = value[j] * math.log(ins[0])
        return out

    return LayerNode(index, name, (source,), fn, d_input, params=t, d_param=d_param)
