"""Run a small comparison matrix and inspect the persisted traces.

Uses reduced step budgets so the script finishes in seconds; the shipped
configs under configs/ carry the full-length study settings.
"""

import os
import tempfile

from fdopt.harness import compare_methods, format_summary, read_trace
from fdopt.runconfig import RunConfig


def main():
    out = tempfile.mkdtemp(prefix="fdopt-demo-")
    base = RunConfig(problem="ctl", max_steps=2_000)
    cells = compare_methods("ctl", initials=[0, 1], base=base,
                            variants=("mlpf-square-nokdl", "taylor"), out_dir=out)
    print(format_summary(cells))

    print(f"\ntraces written under {out}:")
    for cell in cells:
        if not cell.trace_path:
            continue
        data = read_trace(cell.trace_path)
        print(f"  {os.path.basename(cell.trace_path):34s} "
              f"rows={len(data.columns['iteration'])} status={data.status} "
              f"final objective={data.columns['objective'][-1]:.6g}")

    print("\nrender them with the frontend, e.g.:")
    print(f"  node frontend/dist/cli.js {out}/*.csv --ref -1 --out ctl.svg")


if __name__ == "__main__":
    main()
