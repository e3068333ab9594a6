"""Produce small real trace files for the frontend tests.

The frontend consumes the optimizer only through its trace-file interface,
so its fixtures are generated by the actual harness.
"""

import os
import sys

from fdopt.harness import emit_trace, run_experiment
from fdopt.runconfig import RunConfig


def main(out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    specs = [
        RunConfig(problem="ctl", max_steps=400, label="ctl_mlpf_short"),
        RunConfig(problem="ctl", method="taylor", max_steps=400, label="ctl_taylor_short"),
        RunConfig(problem="lj13", max_steps=300, initial="seed:0",
                  label="lj13_square_kdl_short"),
        RunConfig(problem="lj13", max_steps=300, initial="seed:0", use_kdl=False,
                  eta=1e-3, label="lj13_square_short_nokdl"),
    ]
    for cfg in specs:
        trace, _ = run_experiment(cfg, write=False)
        trace.meta["label"] = cfg.label
        path = os.path.join(out_dir, f"{cfg.label}.csv")
        emit_trace(trace, path, "csv", every=1)
        print("wrote", path)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "frontend/test/fixtures")
