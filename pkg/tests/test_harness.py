"""Config parsing, trace persistence, comparison matrix, CLI surface."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from fdopt.harness import (
    DEFAULT_VARIANTS,
    compare_methods,
    emit_trace,
    format_summary,
    make_variant_config,
    read_trace,
    run_experiment,
)
from fdopt.runconfig import (
    ConfigError,
    RunConfig,
    apply_problem_defaults,
    emit_config,
    parse_config,
)


# -- config parsing --------------------------------------------------------------

def test_minimal_config_gets_frozen_defaults():
    cfg = apply_problem_defaults(parse_config("problem = ctl\nmethod = mlpf\n"))
    assert cfg.kernel == "square"
    assert cfg.initial == "canonical:0"
    assert cfg.eta is not None and cfg.eta > 0
    assert cfg.max_steps == 100_000


def test_config_rejects_negative_eta_naming_field():
    with pytest.raises(ConfigError, match="eta"):
        parse_config("problem = ctl\neta = -1\n").validate()


def test_config_rejects_unknown_key_with_line():
    with pytest.raises(ConfigError, match="line 2.*swiftness"):
        parse_config("problem = ctl\nswiftness = 9\n")


def test_config_rejects_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("problem = ctl\nproblem = dvg02\n")


def test_config_rejects_missing_problem():
    with pytest.raises(ConfigError, match="problem"):
        parse_config("method = mlpf\n")


def test_config_comments_and_blanks_ignored():
    cfg = parse_config("# a comment\n\nproblem = dvg02  # trailing\n")
    assert cfg.problem == "dvg02"


def test_full_lj13_config_round_trips():
    text = "\n".join([
        "problem = lj13",
        "method = mlpf",
        "kernel = sigmoid_convex",
        "use_kdl = true",
        "kdl_offset = 50.0",
        "eta = 0.01",
        "alpha = 1.0",
        "beta = 1.0",
        "max_steps = 10000",
        "cost_tol = 1e-09",
        "step_tol = 1e-300",
        "factorized = false",
        "initial = seed:0",
        "rng_seed = 7",
        "trace_format = json",
        "trace_every = 100",
        "label = lj_sig",
    ])
    cfg = parse_config(text)
    assert parse_config(emit_config(cfg)) == cfg


def test_initial_spec_forms():
    parse_config("problem = ctl\ninitial = canonical:1\n")
    parse_config("problem = ctl\ninitial = -7.0, -5.0\n")
    parse_config("problem = lj13\ninitial = seed:3\n")
    with pytest.raises(ConfigError, match="initial"):
        parse_config("problem = ctl\ninitial = nowhere\n")


# -- traces -----------------------------------------------------------------------

def small_trace():
    cfg = RunConfig(problem="ctl", max_steps=200, label="t")
    trace, _ = run_experiment(cfg, write=False)
    return trace


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_trace_round_trip_bit_exact(tmp_path, fmt):
    trace = small_trace()
    path = str(tmp_path / f"t.{fmt}")
    emit_trace(trace, path, fmt, every=1)
    back = read_trace(path)
    assert back.status == trace.status
    assert back.steps == trace.steps
    for k, col in trace.columns.items():
        assert np.array_equal(back.columns[k], col), k
    assert np.array_equal(back.final_target, trace.final_target)


def test_trace_csv_constant_column_count(tmp_path):
    trace = small_trace()
    path = str(tmp_path / "t.csv")
    emit_trace(trace, path, "csv", every=1)
    widths = set()
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or "," not in line:
                continue
            widths.add(len(line.split(",")))
    assert len(widths) == 1


def test_trace_subsampling_keeps_first_and_last(tmp_path):
    trace = small_trace()
    path = str(tmp_path / "t.csv")
    emit_trace(trace, path, "csv", every=37)
    back = read_trace(path)
    it = back.columns["iteration"]
    assert it[0] == trace.columns["iteration"][0]
    assert it[-1] == trace.columns["iteration"][-1]


def test_identical_runs_byte_identical_csv(tmp_path):
    cfg = RunConfig(problem="ctl", max_steps=500, label="det")
    pa = str(tmp_path / "a.csv")
    pb = str(tmp_path / "b.csv")
    ta, _ = run_experiment(cfg, write=False)
    tb, _ = run_experiment(cfg, write=False)
    emit_trace(ta, pa, "csv")
    emit_trace(tb, pb, "csv")
    assert open(pa, "rb").read() == open(pb, "rb").read()


def test_lj13_trace_objective_matches_recomputed_energy(tmp_path):
    from fdopt.benchmarks import lj_energy

    cfg = RunConfig(problem="lj13", max_steps=50, initial="seed:0", label="lj")
    trace, _ = run_experiment(cfg, write=False)
    path = str(tmp_path / "lj.csv")
    emit_trace(trace, path, "csv")
    back = read_trace(path)
    recomputed = lj_energy(back.final_target.reshape(13, 3))
    assert abs(back.columns["objective"][-1] - recomputed) <= 1e-9 * abs(recomputed)


def test_run_experiment_writes_trace(tmp_path):
    cfg = RunConfig(problem="ctl", max_steps=100, label="smoke",
                    out_dir=str(tmp_path))
    trace, path = run_experiment(cfg)
    assert os.path.exists(path)
    assert read_trace(path).meta["problem"] == "ctl"


def test_dvg02_from_exact_optimum_converges_at_step_zero():
    from fdopt.benchmarks import DVG02_OPTIMUM

    vec = ", ".join(repr(float(v)) for v in DVG02_OPTIMUM)
    cfg = RunConfig(problem="dvg02", initial=vec, max_steps=100)
    trace, _ = run_experiment(cfg, write=False)
    assert trace.status == "converged"
    assert trace.steps == 0


# -- comparison matrix --------------------------------------------------------------

def test_empty_initials_empty_summary():
    cells = compare_methods("ctl", initials=[], write=False)
    assert cells == []
    assert "cell" in format_summary(cells)


def test_variant_configs_cover_matrix():
    cfgs = [make_variant_config("lj13", v) for v in DEFAULT_VARIANTS]
    kinds = {(c.method, c.kernel, c.use_kdl, c.factorized) for c in cfgs}
    assert ("mlpf", "square", False, False) in kinds
    assert ("mlpf", "square", True, False) in kinds
    assert ("mlpf", "sigmoid_convex", True, False) in kinds
    assert ("mlpf", "square", True, True) in kinds
    assert any(c.method == "taylor" for c in cfgs)


def test_compare_cells_survive_failures(tmp_path):
    # an out-of-range canonical index fails its cell, others still run
    cells = compare_methods("ctl", initials=[0, 17], variants=("taylor",),
                            write=False,
                            base=RunConfig(problem="ctl", max_steps=20))
    statuses = {c.initial_index: c.status for c in cells}
    assert statuses[17] == "error"
    assert statuses[0] != "error"


def test_compare_summary_statuses_match(tmp_path):
    cells = compare_methods("ctl", initials=[0], variants=("taylor",),
                            write=False,
                            base=RunConfig(problem="ctl", max_steps=20))
    assert cells[0].status == "max_steps"


# -- CLI -------------------------------------------------------------------------

def _cli(*args):
    return subprocess.run([sys.executable, "-m", "fdopt.cli", *args],
                          capture_output=True, text=True)


def test_cli_list_problems():
    r = _cli("list-problems")
    assert r.returncode == 0
    assert "ctl" in r.stdout and "dvg02" in r.stdout and "lj13" in r.stdout


def test_cli_run_minimal(tmp_path):
    r = _cli("run", "--problem", "ctl", "--max-steps", "50",
             "--out", str(tmp_path), "--label", "clirun")
    assert r.returncode == 0, r.stderr
    assert "status:" in r.stdout
    assert (tmp_path / "clirun.csv").exists()


def test_cli_rejects_bad_eta(tmp_path):
    r = _cli("run", "--problem", "ctl", "--eta", "-3")
    assert r.returncode == 1


def test_cli_rejects_unknown_problem():
    r = _cli("run", "--problem", "branin")
    assert r.returncode == 1


def test_cli_config_file_round_trip(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("problem = ctl\nmax_steps = 30\nlabel = filecfg\n")
    r = _cli("run", "--config", str(cfg_path), "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "filecfg.csv").exists()


def test_cli_show_config():
    r = _cli("show-config", "--problem", "dvg02")
    assert r.returncode == 0
    assert "eta = " in r.stdout


def test_compare_parallel_jobs_match_serial():
    base = RunConfig(problem="ctl", max_steps=300)
    serial = compare_methods("ctl", initials=[0, 1], variants=("taylor",),
                             write=False, base=base)
    parallel = compare_methods("ctl", initials=[0, 1], variants=("taylor",),
                               write=False, base=base, jobs=2)
    key = lambda c: (c.variant, c.initial_index)
    for a, b in zip(sorted(serial, key=key), sorted(parallel, key=key)):
        assert (a.variant, a.initial_index, a.status, a.steps) == \
            (b.variant, b.initial_index, b.status, b.steps)
        assert a.final_cost == b.final_cost


def test_out_dir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("FDOPT_OUT", str(tmp_path / "envruns"))
    cfg = RunConfig(problem="ctl", max_steps=20, label="envvar")
    _, path = run_experiment(cfg)
    assert path == str(tmp_path / "envruns" / "envvar.csv")
    assert os.path.exists(path)


@pytest.mark.slow
def test_lj13_matrix_final_energy_ordering():
    # square+KDL <= sigmoid+KDL <= taylor on final objective, reduced budget
    base = RunConfig(problem="lj13", initial="seed:0", max_steps=20_000)
    cells = compare_methods(
        "lj13", initials=[0], write=False, base=base,
        variants=("mlpf-square-kdl", "mlpf-sigmoid-kdl", "taylor"))
    by = {c.variant.split("_", 1)[1].rsplit("_", 1)[0]: c.final_objective for c in cells}
    assert by["mlpf-square-kdl"] <= by["mlpf-sigmoid-kdl"] + 1e-9
    assert by["mlpf-sigmoid-kdl"] <= by["taylor"] + 1e-9
