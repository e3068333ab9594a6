"""Experiment execution: trace persistence, single runs, method comparisons.

Traces are written as CSV (comment header with the config echo, one row per
kept iteration) or JSON (header object plus a rows array).  Floats are
serialized with ``repr``, which round-trips bit-exactly, so re-reading a
trace reproduces the original numbers and repeated runs with the same
config and seed produce byte-identical files.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .benchmarks import (
    BenchmarkProblem,
    LocalMinimumSearchError,
    lj13_problem,
    lj_local_minimum_init,
    problem_by_name,
)
from .kernels import CostConfig, CostKernel
from .optimizer import OptimizationTrace, OptimizerConfig, run_optimization
from .runconfig import (
    ConfigError,
    RunConfig,
    VARIANT_OVERRIDES,
    apply_problem_defaults,
    default_out_dir,
    emit_config,
    _parse_initial_spec,
)

__all__ = [
    "resolve_problem",
    "resolve_initial",
    "build_run",
    "run_experiment",
    "emit_trace",
    "read_trace",
    "TraceData",
    "compare_methods",
    "CompareCell",
    "DEFAULT_VARIANTS",
    "MAX_PERSISTED_ROWS",
]

MAX_PERSISTED_ROWS = 1_000_000

DEFAULT_VARIANTS = (
    "mlpf-square-nokdl",
    "mlpf-square-kdl",
    "mlpf-sigmoid-kdl",
    "mlpf-conv-kdl",
    "taylor",
)


def resolve_problem(cfg: RunConfig) -> BenchmarkProblem:
    kind, val = _parse_initial_spec(cfg.initial)
    if cfg.problem == "lj13":
        if kind == "seed":
            # retry upward when a seed lands in the global basin
            last_exc: Exception | None = None
            for seed in range(val, val + 32):
                try:
                    return lj13_problem(lj_local_minimum_init(seed))
                except LocalMinimumSearchError as exc:
                    last_exc = exc
            raise ConfigError(f"initial: no usable lj13 seed in {val}..{val + 31}: {last_exc}")
        if kind == "vector":
            from .benchmarks import ClusterGeometry
            return lj13_problem(ClusterGeometry(np.asarray(val).reshape(-1, 3)))
        return lj13_problem(lj_local_minimum_init(0))
    return problem_by_name(cfg.problem)


def resolve_initial(cfg: RunConfig, problem: BenchmarkProblem) -> np.ndarray:
    kind, val = _parse_initial_spec(cfg.initial)
    if kind == "canonical":
        if not (0 <= val < len(problem.canonical_initials)):
            raise ConfigError(
                f"initial: canonical index {val} out of range for {problem.name} "
                f"(has {len(problem.canonical_initials)})")
        return np.asarray(problem.canonical_initials[val], dtype=float).copy()
    if kind == "seed":
        return np.asarray(problem.canonical_initials[0], dtype=float).copy()
    vec = np.asarray(val, dtype=float)
    if vec.size != problem.graph.variable_dim:
        raise ConfigError(
            f"initial: expected {problem.graph.variable_dim} components, got {vec.size}")
    return vec


def build_run(cfg: RunConfig):
    """Resolve a validated config into (problem, optimizer, cost, initial)."""
    cfg = apply_problem_defaults(cfg)
    problem = resolve_problem(cfg)
    initial = resolve_initial(cfg, problem)
    opt = OptimizerConfig(
        method=cfg.method,
        mode=problem.mode,
        eta=cfg.eta,
        alpha=cfg.alpha,
        beta=cfg.beta,
        max_steps=cfg.max_steps,
        cost_tol=cfg.cost_tol,
        step_tol=cfg.step_tol,
        factorized=cfg.factorized,
        rng_seed=cfg.rng_seed,
    )
    cost = CostConfig(
        kernel=CostKernel(cfg.kernel),
        rho_target=problem.rho_target,
        use_kdl=cfg.use_kdl,
        kdl_offset=cfg.kdl_offset,
    )
    return cfg, problem, opt, cost, initial


def _config_echo(cfg: RunConfig) -> dict:
    echo = {}
    for line in emit_config(cfg).splitlines():
        key, _, tok = line.partition(" = ")
        echo[key] = tok
    echo["version"] = __version__
    return echo


def run_experiment(cfg: RunConfig, out_dir: str | None = None,
                   write: bool = True, **run_kwargs) -> tuple[OptimizationTrace, str | None]:
    """Execute one configured run; persist the trace unless ``write`` is off."""
    cfg, problem, opt, cost, initial = build_run(cfg)
    trace = run_optimization(problem, opt, cost, initial=initial, **run_kwargs)
    trace.meta.update(_config_echo(cfg))
    path = None
    if write:
        out_dir = out_dir or cfg.out_dir or default_out_dir()
        os.makedirs(out_dir, exist_ok=True)
        label = cfg.label or f"{cfg.problem}_{cfg.method}"
        path = os.path.join(out_dir, f"{label}.{cfg.trace_format}")
        emit_trace(trace, path, cfg.trace_format, every=cfg.trace_every)
    return trace, path


def _kept_row_indices(n_rows: int, every: int) -> np.ndarray:
    """Stride selection; first and last rows always kept."""
    if every == 0:
        every = max(1, math.ceil(n_rows / MAX_PERSISTED_ROWS))
    idx = np.arange(0, n_rows, every)
    if n_rows and idx[-1] != n_rows - 1:
        idx = np.append(idx, n_rows - 1)
    return idx


def emit_trace(trace: OptimizationTrace, path: str, fmt: str = "csv",
               every: int = 0) -> str:
    """Write a trace; identical traces produce byte-identical files."""
    idx = _kept_row_indices(trace.n_rows, every)
    names = trace.column_names
    cols = [trace.columns[name][idx] for name in names]
    final_target = [repr(float(v)) for v in trace.final_target]
    if fmt == "csv":
        lines = ["# fdopt-trace v1"]
        for key in sorted(trace.meta):
            lines.append(f"# {key} = {trace.meta[key]}")
        lines.append(f"# status = {trace.status}")
        if trace.note:
            lines.append(f"# note = {trace.note}")
        lines.append(f"# steps = {trace.steps}")
        lines.append(f"# final_target = [{', '.join(final_target)}]")
        lines.append(",".join(names))
        for r in range(len(idx)):
            lines.append(",".join(repr(float(col[r])) for col in cols))
        text = "\n".join(lines) + "\n"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif fmt == "json":
        payload = {
            "header": {**trace.meta, "status": trace.status, "note": trace.note,
                       "steps": trace.steps,
                       "final_target": [float(v) for v in trace.final_target]},
            "columns": names,
            "rows": [[float(col[r]) for col in cols] for r in range(len(idx))],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=None, separators=(",", ":"))
            fh.write("\n")
    else:
        raise ValueError(f"unknown trace format {fmt!r}")
    return path


@dataclass
class TraceData:
    """A re-read trace: config echo, columns, terminal info."""

    meta: dict
    columns: dict
    status: str
    note: str
    steps: int
    final_target: np.ndarray


def read_trace(path: str) -> TraceData:
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        header = payload["header"]
        names = payload["columns"]
        rows = np.asarray(payload["rows"], dtype=float)
        cols = {name: rows[:, k] if rows.size else np.zeros(0)
                for k, name in enumerate(names)}
        return TraceData(
            meta={k: v for k, v in header.items()
                  if k not in ("status", "note", "steps", "final_target")},
            columns=cols,
            status=header.get("status", ""),
            note=header.get("note", ""),
            steps=int(header.get("steps", 0)),
            final_target=np.asarray(header.get("final_target", []), dtype=float),
        )
    meta: dict = {}
    status = note = ""
    steps = 0
    final_target = np.zeros(0)
    names: list = []
    data: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    continue
                key, _, tok = body.partition(" = ")
                if key == "status":
                    status = tok
                elif key == "note":
                    note = tok
                elif key == "steps":
                    steps = int(tok)
                elif key == "final_target":
                    final_target = np.asarray(
                        [float(t) for t in tok.strip("[]").split(",") if t.strip()])
                else:
                    meta[key] = tok
                continue
            if not names:
                names = line.split(",")
                if len(names) < 2 or "iteration" not in names:
                    raise ValueError(f"{path}: missing trace column header")
                continue
            data.append([float(t) for t in line.split(",")])
    if not names:
        raise ValueError(f"{path}: not a trace file")
    arr = np.asarray(data, dtype=float) if data else np.zeros((0, len(names)))
    cols = {name: arr[:, k] for k, name in enumerate(names)}
    return TraceData(meta, cols, status, note, steps, final_target)


# ---------------------------------------------------------------------------
# method comparison matrix
# ---------------------------------------------------------------------------

@dataclass
class CompareCell:
    variant: str
    initial_index: int
    status: str
    steps: int
    final_cost: float
    final_objective: float
    trace_path: str | None
    error: str = ""


def make_variant_config(problem: str, variant: str, base: RunConfig | None = None) -> RunConfig:
    """Cell config for the comparison matrix; tuned overrides applied."""
    if base is not None:
        cfg = base
    elif problem == "lj13":
        cfg = RunConfig(problem=problem, initial="seed:0")
    else:
        cfg = RunConfig(problem=problem)
    if variant.startswith("mlpf"):
        cfg = replace(cfg, method="mlpf")
        cfg = replace(cfg, kernel="sigmoid_convex" if "sigmoid" in variant else "square")
        cfg = replace(cfg, use_kdl=not variant.endswith("nokdl"))
        cfg = replace(cfg, factorized="conv" in variant)
    elif variant == "taylor":
        cfg = replace(cfg, method="taylor", use_kdl=False)
    else:
        raise ConfigError(f"unknown comparison variant {variant!r}")
    overrides = VARIANT_OVERRIDES.get((problem, variant), {})
    cfg = replace(cfg, **overrides)
    return replace(cfg, label=f"{problem}_{variant}")


def _run_cell(args):
    cfg, initial_index, out_dir, write = args
    cfg = replace(cfg, initial=f"canonical:{initial_index}"
                  if not cfg.initial.startswith("seed") else cfg.initial,
                  label=f"{cfg.label}_i{initial_index}")
    try:
        trace, path = run_experiment(cfg, out_dir=out_dir, write=write)
        row = trace.final_row()
        return CompareCell(cfg.label, initial_index, trace.status, trace.steps,
                           float(row["rho_cost"]), float(row["objective"]), path)
    except Exception as exc:  # cell failures recorded, remaining cells run
        return CompareCell(cfg.label, initial_index, "error", 0,
                           float("nan"), float("nan"), None, error=str(exc))


def compare_methods(problem: str, initials: list[int] | None = None,
                    variants=DEFAULT_VARIANTS, out_dir: str | None = None,
                    jobs: int = 1, write: bool = True,
                    base: RunConfig | None = None) -> list[CompareCell]:
    """Run the variant-by-initial cross product and collect a summary."""
    if initials is None:
        n = len(problem_by_name(problem).canonical_initials) if problem != "lj13" else 1
        initials = list(range(n))
    tasks = []
    for variant in variants:
        cfg = make_variant_config(problem, variant, base)
        for k in initials:
            tasks.append((cfg, k, out_dir, write))
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell, tasks))
    else:
        cells = [_run_cell(t) for t in tasks]
    return cells


def format_summary(cells: list[CompareCell]) -> str:
    header = f"{'cell':34s} {'init':>4s} {'status':>10s} {'steps':>9s} {'final_cost':>13s} {'final_objective':>16s}"
    lines = [header, "-" * len(header)]
    for c in cells:
        lines.append(f"{c.variant:34s} {c.initial_index:>4d} {c.status:>10s} "
                     f"{c.steps:>9d} {c.final_cost:>13.4e} {c.final_objective:>16.8g}"
                     + (f"  [{c.error}]" if c.error else ""))
    return "\n".join(lines)
