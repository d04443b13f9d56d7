"""Run every CLI command with default parameters into one output directory.

    python3 scripts/reproduce_figures.py [OUT_DIR] [--n-traj N]
"""
import argparse
import sys
import time

from ddforge import cli

ap = argparse.ArgumentParser()
ap.add_argument("out", nargs="?", default="out")
ap.add_argument("--n-traj", type=int, default=2000)
args = ap.parse_args()

status = 0
for cmd in ("swap", "decay", "filters", "optimize", "pmme", "robustness"):
    t0 = time.perf_counter()
    code = cli.main([cmd, "--out", args.out, "--n-traj", str(args.n_traj)])
    print(f"{cmd:<11} exit {code}  {time.perf_counter() - t0:6.1f} s", file=sys.stderr)
    status = status or code
sys.exit(status)
