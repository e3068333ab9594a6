"""Benchmark problems: Cross-Leg Table, DeVilliers-Glasser 02, LJ-13 cluster.

Each problem is built programmatically as a :class:`~fdopt.graph.LayerGraph`
with a known global minimum, canonical starting points, and a domain box.
The Lennard-Jones helpers (energy, gradient, icosahedron construction, local
minimum search) are written directly against the closed-form potential so
they can serve as independent oracles for the layered graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import (
    COS,
    DomainError,
    Factor,
    IDENT,
    LayerGraph,
    LayerNode,
    SIN,
    affine_layer,
    product_layer,
    sum_layer,
    sum_of_squares_layer,
    power_by_param_layer,
    unary_layer,
)

__all__ = [
    "BenchmarkProblem",
    "ClusterGeometry",
    "PROBLEM_NAMES",
    "LJ13_GLOBAL_MIN_ENERGY",
    "ctl_problem",
    "dvg02_problem",
    "lj13_problem",
    "lj_energy",
    "lj_gradient",
    "icosahedron_coords",
    "relax_cluster",
    "lj_local_minimum_init",
    "golden_section",
    "problem_by_name",
    "LocalMinimumSearchError",
]

PROBLEM_NAMES = ("ctl", "dvg02", "lj13")

# Icosahedral global minimum of the 13-particle cluster in reduced units.
LJ13_GLOBAL_MIN_ENERGY = -44.3268


@dataclass(frozen=True)
class BenchmarkProblem:
    """A named objective with its layered graph and optimization metadata."""

    name: str
    graph: LayerGraph
    domain_box: tuple | None
    global_minimum_location: np.ndarray | None  # None marks a degenerate set
    global_minimum_value: float
    canonical_initials: tuple
    rho_target: float
    divergence_radius: float
    mode: str = "optimize_vars"

    def in_domain(self, x) -> bool:
        if self.domain_box is None:
            return True
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain_box
        return bool(np.all(x >= lo) and np.all(x <= hi))


class LocalMinimumSearchError(RuntimeError):
    """Relaxation failed to deliver a usable non-global minimum."""


# ---------------------------------------------------------------------------
# Cross-Leg Table
# ---------------------------------------------------------------------------

def ctl_problem() -> BenchmarkProblem:
    """Cross-Leg Table in two variables.

    f(x) = -1 / (|exp(|100 - sqrt(x1^2 + x2^2)/pi|) * sin(x1) * sin(x2)| + 1)**0.1

    Layer split: h1 = x1^2 + x2^2, h2 = sqrt(h1), h3 = 100 - h2/pi,
    h4 = exp(|h3|), h5 = h4*sin(x1)*sin(x2), h6 = |h5| + 1, h7 = h6^0.1,
    f = -1/h7.  Global minimum value -1 reached where both sines vanish;
    the basin around the origin is the one tabulated.
    """
    layers = [
        sum_of_squares_layer(1, "h1_radius_sq", (("x", 0), ("x", 1))),
        unary_layer(2, "h2_radius", ("layer", 1), "sqrt"),
        affine_layer(3, "h3_shifted", (("layer", 2),), coeffs=(-1.0 / math.pi,), const=100.0),
        unary_layer(4, "h4_exp_abs", ("layer", 3), "exp_abs"),
        product_layer(5, "h5_sin_product", (("layer", 4), ("x", 0), ("x", 1)),
                      maps=(IDENT, SIN, SIN)),
        unary_layer(6, "h6_abs_plus1", ("layer", 5), "abs_plus", p=1.0),
        unary_layer(7, "h7_root", ("layer", 6), "power", p=0.1),
        unary_layer(8, "f_neg_reciprocal", ("layer", 7), "neg_reciprocal"),
    ]
    graph = LayerGraph(layers, variable_dim=2, name="ctl")
    return BenchmarkProblem(
        name="ctl",
        graph=graph,
        domain_box=(-10.0, 10.0),
        global_minimum_location=np.array([0.0, 0.0]),
        global_minimum_value=-1.0,
        canonical_initials=(np.array([-7.0, -5.0]), np.array([7.0, 5.0]), np.array([7.0, -5.0])),
        rho_target=-1.0,
        divergence_radius=1e3 * 10.0,
    )


# ---------------------------------------------------------------------------
# DeVilliers-Glasser 02
# ---------------------------------------------------------------------------

DVG02_T = 0.1 * np.arange(1, 25, dtype=float)
DVG02_OPTIMUM = np.array([53.81, 1.27, 3.01, 2.13, 0.507])


def _dvg02_targets() -> np.ndarray:
    """Data values generated from the optimum with the same composition
    order as the layer pipeline, so residuals vanish exactly there."""
    t = DVG02_T
    x1, x2, x3, x4, x5 = DVG02_OPTIMUM
    v1 = x2 ** t
    v2 = np.tanh(x3 * t + np.sin(x4 * t))
    v3 = np.cos(t * math.exp(x5))
    return ((x1 * v1) * v2) * v3


def _tanh_mix_layer(index, name, src_a, src_b, t):
    """value = tanh(a*t + sin(b*t)) for scalar inputs a, b and fixed grid t."""
    t = np.asarray(t, dtype=float)

    def fn(ins, _p):
        return np.tanh(ins[0] * t + np.sin(ins[1] * t))

    def d_input(ins, _p, value, which):
        sech2 = 1.0 - value * value
        if which == 0:
            return sech2 * t
        return sech2 * np.cos(ins[1] * t) * t

    def vjp(ins, _p, value, cot):
        sech2 = 1.0 - value * value
        w = cot * sech2
        return (float(np.dot(w, t)), float(np.dot(w, np.cos(ins[1] * t) * t)))

    return LayerNode(index, name, (src_a, src_b), fn, d_input, params=t, vjp=vjp)


def _cos_scaled_exp_layer(index, name, src, t):
    """value = cos(t * exp(u)) for a scalar input u and fixed grid t."""
    t = np.asarray(t, dtype=float)

    def fn(ins, _p):
        return np.cos(t * math.exp(ins[0]))

    def d_input(ins, _p, value, which):
        e = math.exp(ins[0])
        return -np.sin(t * e) * t * e

    def vjp(ins, _p, value, cot):
        e = math.exp(ins[0])
        return (float(np.dot(cot, -np.sin(t * e) * t * e)),)

    return LayerNode(index, name, (src,), fn, d_input, params=t, vjp=vjp)


def _residual_square_layer(index, name, src, targets):
    """value = (u - y)**2 elementwise against the fixed targets y."""
    y = np.asarray(targets, dtype=float)

    def fn(ins, _p):
        r = ins[0] - y
        return r * r

    def d_input(ins, _p, value, which):
        return 2.0 * (ins[0] - y)

    def vjp(ins, _p, value, cot):
        return (cot * (2.0 * (ins[0] - y)),)

    return LayerNode(index, name, (src,), fn, d_input, params=y, vjp=vjp)


def dvg02_problem() -> BenchmarkProblem:
    """DeVilliers-Glasser 02: 5-parameter nonlinear least squares.

    f(x) = sum_i (x1 * x2^t_i * tanh(x3 t_i + sin(x4 t_i)) * cos(t_i e^x5) - y_i)^2
    with t_i = 0.1 i, i = 1..24, and y built from the optimum
    (53.81, 1.27, 3.01, 2.13, 0.507).  Global minimum 0.
    """
    t = DVG02_T
    y = _dvg02_targets()
    layers = [
        power_by_param_layer(1, "g1_power", ("x", 1), t),
        _tanh_mix_layer(2, "g2_tanh_mix", ("x", 2), ("x", 3), t),
        _cos_scaled_exp_layer(3, "g3_cos_scale", ("x", 4), t),
        product_layer(4, "g4_model", (("x", 0), ("layer", 1), ("layer", 2), ("layer", 3))),
        _residual_square_layer(5, "g5_residual_sq", ("layer", 4), y),
        sum_layer(6, "f_sum", ("layer", 5)),
    ]
    graph = LayerGraph(layers, variable_dim=5, name="dvg02")
    return BenchmarkProblem(
        name="dvg02",
        graph=graph,
        domain_box=(-500.0, 500.0),
        global_minimum_location=DVG02_OPTIMUM.copy(),
        global_minimum_value=0.0,
        canonical_initials=(
            np.array([50.0, 50.0, 50.0, 50.0, 1.0]),
            np.array([10.0, 10.0, 10.0, 10.0, 10.0]),
            np.array([0.2, 0.2, 0.2, 0.2, 0.2]),
        ),
        rho_target=0.0,
        divergence_radius=1e3 * 500.0,
    )


# ---------------------------------------------------------------------------
# Lennard-Jones cluster
# ---------------------------------------------------------------------------

DEFAULT_PAIR_FLOOR = 0.3


@dataclass(frozen=True)
class ClusterGeometry:
    """Particle coordinates in reduced units (epsilon = sigma = 1)."""

    coords: np.ndarray  # (n, 3)
    pair_floor: float = DEFAULT_PAIR_FLOOR

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise ValueError(f"coords must be (n, 3), got {coords.shape}")
        object.__setattr__(self, "coords", coords)
        i, j = _pair_indices(coords.shape[0])
        r = np.linalg.norm(coords[i] - coords[j], axis=1)
        if np.any(r < self.pair_floor):
            k = int(np.argmin(r))
            raise DomainError(
                f"pair ({i[k]}, {j[k]}) at distance {r[k]:.6g} below floor {self.pair_floor}")

    @property
    def n_particles(self) -> int:
        return self.coords.shape[0]

    def centered(self) -> "ClusterGeometry":
        """Same cluster with its centroid moved to the origin."""
        return ClusterGeometry(self.coords - self.coords.mean(axis=0), self.pair_floor)

    def as_vector(self) -> np.ndarray:
        return self.coords.ravel().copy()


def _pair_indices(n: int):
    i, j = np.triu_indices(n, k=1)
    return i, j


def _coords_array(geom) -> np.ndarray:
    if isinstance(geom, ClusterGeometry):
        return geom.coords
    coords = np.asarray(geom, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, 3)
    return coords


def lj_energy(geom, pair_floor: float = DEFAULT_PAIR_FLOOR) -> float:
    """Total pair energy sum_pairs 4 eps ((sigma/r)^12 - (sigma/r)^6), reduced units.

    Raises :class:`DomainError` naming the first pair below the floor.
    """
    coords = _coords_array(geom)
    if isinstance(geom, ClusterGeometry):
        pair_floor = geom.pair_floor
    i, j = _pair_indices(coords.shape[0])
    r = np.linalg.norm(coords[i] - coords[j], axis=1)
    if np.any(r < pair_floor):
        k = int(np.argmin(r))
        raise DomainError(
            f"pair ({i[k]}, {j[k]}) at distance {r[k]:.6g} below floor {pair_floor}")
    u6 = r ** -6.0
    return float(np.sum(4.0 * (u6 * u6 - u6)))


_INCIDENCE_CACHE: dict = {}


def _incidence(n: int) -> np.ndarray:
    """Signed particle-by-pair incidence matrix, cached per cluster size."""
    inc = _INCIDENCE_CACHE.get(n)
    if inc is None:
        i, j = _pair_indices(n)
        inc = np.zeros((n, i.size))
        inc[i, np.arange(i.size)] = 1.0
        inc[j, np.arange(i.size)] = -1.0
        _INCIDENCE_CACHE[n] = inc
    return inc


def lj_gradient(coords) -> np.ndarray:
    """Closed-form gradient of the total pair energy; oracle for relaxation."""
    coords = _coords_array(coords)
    n = coords.shape[0]
    i, j = _pair_indices(n)
    diff = coords[i] - coords[j]
    r2 = np.sum(diff * diff, axis=1)
    inv2 = 1.0 / r2
    inv6 = inv2 * inv2 * inv2
    # dE/dr / r = (-48 r^-14 + 24 r^-8) = (24 inv6 - 48 inv6*inv6) * inv2
    w = (24.0 * inv6 - 48.0 * inv6 * inv6) * inv2
    return (_incidence(n) @ (w[:, None] * diff)).ravel()


def icosahedron_coords(radius_scale: float, pair_floor: float = DEFAULT_PAIR_FLOOR) -> ClusterGeometry:
    """Center particle plus 12 icosahedron vertices at the given radius."""
    if radius_scale <= 0:
        raise ValueError(f"radius_scale must be > 0, got {radius_scale}")
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    # cyclic permutations of (0, +-1, +-phi)
    base = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            base.append((0.0, s1, s2 * phi))
            base.append((s1, s2 * phi, 0.0))
            base.append((s2 * phi, 0.0, s1))
    verts = np.array(base)
    verts /= np.linalg.norm(verts[0])
    coords = np.vstack([np.zeros(3), verts * radius_scale])
    return ClusterGeometry(coords, pair_floor)


def golden_section(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Minimize a unimodal scalar function on [a, b]."""
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def relax_cluster(coords, eta: float = 2e-4, gtol: float = 1e-8,
                  max_steps: int = 400_000) -> tuple[np.ndarray, bool]:
    """Plain gradient descent on the pair energy until the gradient is tiny.

    The step is halved whenever a move would raise the energy beyond float
    noise, which keeps the descent plain while surviving the stiff repulsive
    wall; near the minimum the per-step decrease underflows the energy's
    resolution, so exact ties are accepted.  Returns (coordinates,
    converged flag).
    """
    x = _coords_array(coords).ravel().copy()
    e = lj_energy(x)
    step = eta
    for _ in range(max_steps):
        g = lj_gradient(x)
        gnorm = float(np.max(np.abs(g)))
        if gnorm < gtol:
            return x.reshape(-1, 3), True
        trial = x - step * g
        try:
            e_trial = lj_energy(trial, pair_floor=1e-6)
        except DomainError:
            step *= 0.5
            continue
        if e_trial > e + 1e-12 * max(1.0, abs(e)):
            step *= 0.5
            if step < 1e-18:
                return x.reshape(-1, 3), False
            continue
        x, e = trial, e_trial
        step = min(step * 1.1, eta)
    return x.reshape(-1, 3), False


def _packed_cluster(rng, n: int, min_dist: float, radius: float):
    """Sequentially place n points in a ball, keeping pairwise separation."""
    for _ in range(32):
        pts = [np.zeros(3)]
        ok = True
        for _k in range(n - 1):
            for _try in range(4000):
                p = rng.uniform(-radius, radius, 3)
                if np.dot(p, p) > radius * radius:
                    continue
                d2 = min(float(np.sum((p - q) ** 2)) for q in pts)
                if d2 >= min_dist * min_dist:
                    pts.append(p)
                    break
            else:
                ok = False
                break
        if ok:
            return np.array(pts)
    return None


def lj_local_minimum_init(seed: int, n_particles: int = 13,
                          pair_floor: float = DEFAULT_PAIR_FLOOR) -> ClusterGeometry:
    """A reproducible non-icosahedral local minimum of the 13-particle cluster.

    A seed-perturbed random cluster is relaxed by plain gradient descent
    until the gradient max-norm drops below 1e-8, then verified to sit
    strictly above the global basin (energy > global + 0.5).  Raises
    :class:`LocalMinimumSearchError` when the seed lands in the global
    basin or the relaxation stalls; callers retry with the next seed.
    """
    rng = np.random.default_rng(seed)
    pts = _packed_cluster(rng, n_particles, min_dist=0.85, radius=1.7)
    if pts is None:
        raise LocalMinimumSearchError(f"seed {seed}: could not draw an overlap-free cluster")

    relaxed, ok = relax_cluster(pts, gtol=1e-8)
    if not ok:
        raise LocalMinimumSearchError(f"seed {seed}: relaxation did not reach gradient tolerance")
    energy = lj_energy(relaxed)
    if energy <= LJ13_GLOBAL_MIN_ENERGY + 0.5:
        raise LocalMinimumSearchError(
            f"seed {seed}: relaxation reached the global basin (E = {energy:.4f})")
    if energy > -20.0:
        raise LocalMinimumSearchError(
            f"seed {seed}: relaxation ended in a weakly bound state (E = {energy:.4f})")
    centered = relaxed - relaxed.mean(axis=0)
    return ClusterGeometry(centered, pair_floor)


# -- layered graph over the 3n coordinates ----------------------------------

def _pair_distance_layer(index, name, n_particles, pair_floor):
    i, j = _pair_indices(n_particles)
    n_pairs = i.size
    # signed incidence matrix: rows particles, columns pairs
    inc = np.zeros((n_particles, n_pairs))
    inc[i, np.arange(n_pairs)] = 1.0
    inc[j, np.arange(n_pairs)] = -1.0

    def fn(ins, _p):
        coords = ins[0].reshape(n_particles, 3)
        diff = coords[i] - coords[j]
        r = np.sqrt(np.sum(diff * diff, axis=1))
        if np.any(r < pair_floor):
            k = int(np.argmin(r))
            raise DomainError(
                f"pair ({i[k]}, {j[k]}) at distance {r[k]:.6g} below floor {pair_floor}")
        return r

    def d_input(ins, _p, value, which):
        # full Jacobian (n_pairs, 3 n_particles); test path only
        coords = ins[0].reshape(n_particles, 3)
        diff = coords[i] - coords[j]
        unit = diff / value[:, None]
        jac = np.zeros((n_pairs, n_particles * 3))
        for p in range(n_pairs):
            jac[p, 3 * i[p]:3 * i[p] + 3] = unit[p]
            jac[p, 3 * j[p]:3 * j[p] + 3] = -unit[p]
        return jac

    def vjp(ins, _p, value, cot):
        coords = ins[0].reshape(n_particles, 3)
        diff = coords[i] - coords[j]
        w = (cot / value)[:, None] * diff
        return ((inc @ w).ravel(),)

    return LayerNode(index, name, (("xall", 0),), fn, d_input, vjp=vjp)


def _pair_energy_layer(index, name, source):
    """Pair energy 4 ((1/r)^12 - (1/r)^6) with its two-term factorization.

    The layer is the product of factor A = 4 r^-6 and factor B = r^-6 - 1,
    which expands to the repulsive term 4 r^-12 minus the attractive term
    4 r^-6.  Both factors read the same distance layer, one input slot each.
    """
    factor_a = Factor("four_r6", lambda r: 4.0 * r ** -6.0, lambda r: -24.0 * r ** -7.0)
    factor_b = Factor("r6_minus_one", lambda r: r ** -6.0 - 1.0, lambda r: -6.0 * r ** -7.0)

    def fn(ins, _p):
        u6 = ins[0] ** -6.0
        return 4.0 * (u6 * u6 - u6)

    def d_input(ins, _p, value, which):
        # per-slot product-rule partials; the two slots sum to de/dr
        r = ins[which]
        if which == 0:
            return factor_b.g(r) * factor_a.dg(r)
        return factor_a.g(r) * factor_b.dg(r)

    def vjp(ins, _p, value, cot):
        # fused de/dr on the first slot; the shared source accumulates both
        r = ins[0]
        u6 = r ** -6.0
        return (cot * ((24.0 * u6 - 48.0 * u6 * u6) / r), 0.0)

    return LayerNode(index, name, (source, source), fn, d_input, vjp=vjp,
                     factors=(factor_a, factor_b))


def lj_cluster_graph(n_particles: int, pair_floor: float = DEFAULT_PAIR_FLOOR) -> LayerGraph:
    """pair distances -> pair energies -> total energy over 3n coordinates."""
    layers = [
        _pair_distance_layer(1, "pair_distances", n_particles, pair_floor),
        _pair_energy_layer(2, "pair_energies", ("layer", 1)),
        sum_layer(3, "total_energy", ("layer", 2)),
    ]
    return LayerGraph(layers, variable_dim=3 * n_particles, name=f"lj{n_particles}")


def lj13_problem(init: ClusterGeometry | None = None, seed: int = 0) -> BenchmarkProblem:
    """13-particle cluster over 39 coordinates; target is the icosahedral energy."""
    if init is None:
        init = lj_local_minimum_init(seed)
    if init.n_particles != 13:
        raise ValueError(f"lj13 needs 13 particles, got {init.n_particles}")
    graph = lj_cluster_graph(13, init.pair_floor)
    return BenchmarkProblem(
        name="lj13",
        graph=graph,
        domain_box=None,
        global_minimum_location=None,  # any rotation/translation of the icosahedron
        global_minimum_value=LJ13_GLOBAL_MIN_ENERGY,
        canonical_initials=(init.as_vector(),),
        rho_target=LJ13_GLOBAL_MIN_ENERGY,
        divergence_radius=1e3 * 10.0,
    )


def problem_by_name(name: str, **kwargs) -> BenchmarkProblem:
    """Problems addressable by their short names."""
    if name == "ctl":
        return ctl_problem()
    if name == "dvg02":
        return dvg02_problem()
    if name == "lj13":
        return lj13_problem(**kwargs)
    raise ValueError(f"unknown problem {name!r}; choose from {PROBLEM_NAMES}")
