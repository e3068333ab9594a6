"""Acceptance criteria: one function per criterion, shared by tests and CLI.

Each check runs the shipped frozen configuration at its stated tolerance and
returns a :class:`CriterionResult`; ``run_all`` prints one PASS/FAIL line
per criterion.  Nothing here loosens a threshold to force a pass: a
criterion that the implemented method cannot meet reports FAIL with its
measured numbers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .benchmarks import (
    LJ13_GLOBAL_MIN_ENERGY,
    ctl_problem,
    dvg02_problem,
    icosahedron_coords,
    lj13_problem,
    lj_cluster_graph,
    lj_energy,
    lj_local_minimum_init,
    relax_cluster,
)
from .graph import eval_forward, fd_gradient
from .harness import emit_trace, run_experiment
from .kernels import CostConfig, CostKernel, logistic, logistic_derivative
from .optimizer import OptimizerConfig, run_optimization
from .runconfig import PROBLEM_DEFAULTS, RunConfig

__all__ = ["CriterionResult", "run_all", "ALL_CRITERIA"]

LJ_SEED = 0  # frozen trap seed used by the Fig-2 style runs


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _result(name, passed, detail, t0):
    return CriterionResult(name, bool(passed), detail, time.time() - t0)


# -- 1. gradient oracle suite ----------------------------------------------------

def _ctl_points(rng, n):
    pts = []
    while len(pts) < n:
        x = rng.uniform(-10, 10, 2)
        if min(abs(x - np.round(x / np.pi) * np.pi)) >= 1e-3:
            pts.append(x)
    return pts


def _dvg_points(rng, n):
    # x2 > 0 keeps the fractional powers real; moderate x5 keeps the
    # cos(t e^x5) phase resolvable by central differences
    return [np.array([rng.uniform(-60, 60), rng.uniform(0.5, 60),
                      rng.uniform(-60, 60), rng.uniform(-60, 60),
                      rng.uniform(-2.5, 2.5)]) for _ in range(n)]


def _lj_points(rng, n):
    base = icosahedron_coords(1.1).as_vector()
    pts = []
    while len(pts) < n:
        x = base * rng.uniform(0.95, 1.15) + rng.normal(0, 0.03, 39)
        c = x.reshape(-1, 3)
        r = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)
        np.fill_diagonal(r, 1.0)
        if r.min() > 0.6:
            pts.append(x)
    return pts


def check_gradient_oracles() -> CriterionResult:
    t0 = time.time()
    rng = np.random.default_rng(2024)
    suites = {
        "ctl": (ctl_problem().graph, _ctl_points(rng, 100)),
        "dvg02": (dvg02_problem().graph, _dvg_points(rng, 100)),
        "lj13": (lj_cluster_graph(13), _lj_points(rng, 100)),
    }
    worst = {}
    for name, (graph, pts) in suites.items():
        w = 0.0
        for x in pts:
            g = graph.gradient(x)
            gf = fd_gradient(lambda z: eval_forward(graph, z), x, 1e-6)
            w = max(w, float(np.linalg.norm(g - gf) / max(1.0, np.linalg.norm(g))))
        worst[name] = w
    elapsed = time.time() - t0
    ok = all(w < 1e-6 for w in worst.values()) and elapsed < 10.0
    detail = ", ".join(f"{k} worst rel {v:.2e}" for k, v in worst.items())
    return _result("gradient-oracle-suite",
                   ok, f"{detail}; runtime {elapsed:.1f}s (< 10 s)", t0)


# -- 2. kernel exactness -----------------------------------------------------------

def check_kernels() -> CriterionResult:
    t0 = time.time()
    sq = CostKernel("square")
    sg = CostKernel("sigmoid_convex")
    grid = np.linspace(-10.0, 10.0, 2001)
    worst_sq = max(abs(sq.u(float(r)) - (2.0 / 3.0) * float(r) ** 3) for r in grid)
    worst_odd = 0.0
    for r in np.linspace(-100.0, 100.0, 2001):
        r = float(r)
        worst_odd = max(worst_odd,
                        abs(sq.u(-r) + sq.u(r)), abs(sg.u(-r) + sg.u(r)))
    zero_ok = sq.u(0.0) == 0.0 and sg.u(0.0) == 0.0
    # convex-from-sigmoid derivative identity on the grid
    h = 1e-5
    worst_a5 = 0.0
    for r in grid:
        r = float(r)
        stated = math.exp(-r) / (1.0 + math.exp(-r)) ** 2
        fd = (logistic(r + h) - logistic(r - h)) / (2.0 * h)
        worst_a5 = max(worst_a5, abs(fd - stated),
                       abs(logistic_derivative(r) - stated))
    ok = (worst_sq < 4e-16 * (2.0 / 3.0) * 1000.0 and zero_ok
          and worst_odd <= 1e-12 and worst_a5 < 1e-10)
    return _result(
        "kernel-exactness", ok,
        f"square cubic dev {worst_sq:.2e}, oddness {worst_odd:.2e}, "
        f"u(0)=0 {zero_ok}, derivative identity {worst_a5:.2e} (< 1e-10)", t0)


# -- 3. CTL convergence -------------------------------------------------------------

def check_ctl_convergence() -> CriterionResult:
    t0 = time.time()
    base = RunConfig(problem="ctl")
    mlpf_hits = []
    taylor_hits = []
    for k in range(3):
        cfg = replace(base, initial=f"canonical:{k}", label=f"ctl_mlpf_{k}")
        tr, _ = run_experiment(cfg, write=False, track_infnorm_below=1e-3)
        mlpf_hits.append((tr.first_infnorm_hit, tr.min_infnorm))
        tcfg = replace(base, method="taylor", initial=f"canonical:{k}",
                       label=f"ctl_taylor_{k}")
        tt, _ = run_experiment(tcfg, write=False, track_infnorm_below=1e-3)
        taylor_hits.append((tt.first_infnorm_hit, tt.min_infnorm))
    elapsed = time.time() - t0
    mlpf_ok = all(h is not None for h, _ in mlpf_hits)
    taylor_fails = sum(1 for h, _ in taylor_hits if h is None)
    ok = mlpf_ok and taylor_fails >= 1 and elapsed < 120.0
    detail = ("mlpf first-hit steps " + str([h for h, _ in mlpf_hits])
              + ", mlpf min inf-norms " + str([f"{m:.2e}" for _, m in mlpf_hits])
              + f"; taylor unreached initials {taylor_fails}/3"
              + f"; runtime {elapsed:.0f}s (< 120 s)")
    return _result("ctl-convergence", ok, detail, t0)


# -- 4. DVG02 progress ----------------------------------------------------------------

def check_dvg02_progress() -> CriterionResult:
    t0 = time.time()
    cfg = RunConfig(problem="dvg02", initial="canonical:0", label="dvg02_mlpf")
    tr, _ = run_experiment(cfg, write=False)
    f = tr.columns["rho_n"]
    f0, ff = float(f[0]), float(f[-1])
    orders = math.log10(f0 / ff) if ff > 0 else math.inf
    w = 10_000
    cost_tol = PROBLEM_DEFAULTS["dvg02"]["cost_tol"]
    stalled = False
    if len(f) > w:
        prev = f[:-w]
        ratio = np.abs(f[w:] - prev) / np.maximum(np.abs(prev), 1e-300)
        live = np.abs(prev) > cost_tol
        stalled = bool(np.any((ratio < 1e-12) & live))
    elapsed = time.time() - t0
    ok = orders >= 3.0 and not stalled and tr.status != "diverged" and elapsed < 300.0
    return _result(
        "dvg02-progress", ok,
        f"f: {f0:.3e} -> {ff:.3e} ({orders:.2f} orders in {tr.steps} steps), "
        f"stall window found: {stalled}; runtime {elapsed:.0f}s (< 300 s)", t0)


# -- 5/6. LJ-13 ------------------------------------------------------------------------

def _shape_spread(x: np.ndarray) -> float:
    """Max relative deviation of the 12 outer radii about their mean."""
    c = x.reshape(13, 3)
    centered = c - c.mean(axis=0)
    center = int(np.argmin(np.linalg.norm(centered, axis=1)))
    d = np.linalg.norm(c - c[center], axis=1)
    d = np.delete(d, center)
    return float(np.max(np.abs(d - d.mean())) / d.mean())


def check_lj_trap() -> CriterionResult:
    t0 = time.time()
    init = lj_local_minimum_init(LJ_SEED)
    prob = lj13_problem(init)
    cost = CostConfig(kernel=CostKernel("square"), rho_target=LJ13_GLOBAL_MIN_ENERGY)
    cfg = OptimizerConfig(method="taylor", eta=1e-4, max_steps=10_000,
                          cost_tol=1e-9, step_tol=1e-300)
    tr = run_optimization(prob, cfg, cost, initial=init.as_vector())
    e = tr.columns["rho_n"]
    change = abs(float(e[-1]) - float(e[0]))
    ok = change < 1e-6
    return _result("lj13-taylor-trap", ok,
                   f"|dE| over 1e4 steps = {change:.2e} (< 1e-6), "
                   f"E_local = {e[0]:.4f}", t0)


def check_lj_recovery(out_dir: str | None = None) -> CriterionResult:
    t0 = time.time()
    target = LJ13_GLOBAL_MIN_ENERGY
    # cross-check the reference level with the in-repo relaxation oracle
    relaxed, ok_relax = relax_cluster(icosahedron_coords(1.0).coords)
    oracle_gap = abs(lj_energy(relaxed) - target)

    init = lj_local_minimum_init(LJ_SEED)
    prob = lj13_problem(init)
    x0 = init.as_vector()
    defaults = PROBLEM_DEFAULTS["lj13"]

    def run(kernel, use_kdl, eta, max_steps, probe=None, probe_every=1):
        cost = CostConfig(kernel=CostKernel(kernel), rho_target=target,
                          use_kdl=use_kdl, kdl_offset=defaults["kdl_offset"])
        cfg = OptimizerConfig(method="mlpf", eta=eta,
                              max_steps=max_steps, cost_tol=defaults["cost_tol"],
                              step_tol=defaults["step_tol"])
        return run_optimization(prob, cfg, cost, initial=x0,
                                probe=probe, probe_every=probe_every)

    tr_sq = run("square", True, defaults["eta"], 1_000_000)
    e_sq = float(tr_sq.columns["rho_n"][-1])
    within = abs(e_sq - target) <= 0.02 * abs(target)

    shape_hit = [None]

    def probe(step, x, rho_n):
        if shape_hit[0] is None and _shape_spread(x) <= 0.05:
            shape_hit[0] = step

    from .runconfig import VARIANT_OVERRIDES
    eta_sig = VARIANT_OVERRIDES[("lj13", "mlpf-sigmoid-kdl")].get("eta", defaults["eta"])
    tr_sig = run("sigmoid_convex", True, eta_sig, 10_000, probe=probe, probe_every=10)
    e_sig = float(tr_sig.columns["rho_n"][-1])
    shape_ok = shape_hit[0] is not None

    eta_nokdl = VARIANT_OVERRIDES[("lj13", "mlpf-square-nokdl")].get("eta", defaults["eta"])
    tr_plain = run("square", False, eta_nokdl, 1_000_000)
    e_plain = float(tr_plain.columns["rho_n"][-1])
    plain_above = e_plain >= target + 0.05 * abs(target)

    elapsed = time.time() - t0
    ok = (within and shape_ok and plain_above and ok_relax
          and oracle_gap < 1e-3 and elapsed < 600.0)
    detail = (f"square+KDL final E = {e_sq:.4f} (target {target} +- 2%: {within}); "
              f"sigmoid+KDL shape<=5% first hit = {shape_hit[0]} (<= 1e4: {shape_ok}), "
              f"final E = {e_sig:.4f}; square no-KDL final E = {e_plain:.4f} "
              f">= 5% above: {plain_above}; relaxation oracle gap {oracle_gap:.1e}; "
              f"runtime {elapsed:.0f}s (< 600 s)")
    return _result("lj13-mlpf-recovery", ok, detail, t0)


# -- 7. determinism ---------------------------------------------------------------------

def check_determinism(tmp_dir: str | None = None) -> CriterionResult:
    import tempfile
    import os

    t0 = time.time()
    with tempfile.TemporaryDirectory(dir=tmp_dir) as td:
        cfg = RunConfig(problem="ctl", max_steps=2000, label="det", rng_seed=11)
        a, _ = run_experiment(cfg, write=False)
        b, _ = run_experiment(cfg, write=False)
        pa = os.path.join(td, "a.csv")
        pb = os.path.join(td, "b.csv")
        emit_trace(a, pa, "csv")
        emit_trace(b, pb, "csv")
        with open(pa, "rb") as fa, open(pb, "rb") as fb:
            same = fa.read() == fb.read()
    return _result("trace-determinism", same,
                   "repeated run produced byte-identical CSV" if same
                   else "byte difference between repeated runs", t0)


ALL_CRITERIA = (
    ("gradient-oracle-suite", check_gradient_oracles),
    ("kernel-exactness", check_kernels),
    ("ctl-convergence", check_ctl_convergence),
    ("dvg02-progress", check_dvg02_progress),
    ("lj13-taylor-trap", check_lj_trap),
    ("lj13-mlpf-recovery", check_lj_recovery),
    ("trace-determinism", check_determinism),
)


def run_all(out_dir: str | None = None, names=None) -> bool:
    """Execute the acceptance suite; one PASS/FAIL line per criterion."""
    results = []
    for name, fn in ALL_CRITERIA:
        if names and name not in names:
            continue
        try:
            res = fn()
        except Exception as exc:  # an erroring criterion is a failing one
            res = CriterionResult(name, False, f"raised {exc!r}", 0.0)
        results.append(res)
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
    return all(r.passed for r in results)
