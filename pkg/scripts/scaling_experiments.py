"""Demand-scaling experiments on the all-BPR fixtures.

For each fixture this sweeps total demand, then reports how fast the PoA
excess decays, how SO drifts from being an equilibrium, where C/T^(beta+1)
settles, and how far apart the NE and SO path distributions are.
CSV files land in ``--out-dir``.
"""
import argparse
import math
import sys
from pathlib import Path

from congestlab import fixtures
from congestlab.formats import write_sweep_csv
from congestlab.network import normalize_demands
from congestlab.scaling import (
    SweepSpec,
    TooFewPointsError,
    decay_exponent,
    limit_ratio,
    log_grid,
    noise_filtered,
    run_sweep,
    spread,
    top_decade,
)
from congestlab.solver import SolveOptions

CASES = {
    "twolink_bpr_b1": (lambda: fixtures.two_link_bpr(1.0), 1.0),
    "twolink_bpr_b4": (lambda: fixtures.two_link_bpr(4.0), 4.0),
    "diamond": (lambda: fixtures.diamond((0.7, 0.3)), 4.0),
}


def report(name, build, beta, grid, out_dir):
    inst = build()
    _, dist = normalize_demands(inst)
    rows = run_sweep(inst, SweepSpec(dist, grid, SolveOptions(rel_gap_tol=1e-10), beta), keep_profiles=False)
    top = top_decade(rows)
    excess = [(r.poa - 1) * r.t**beta for r in noise_filtered(top)]
    eps = [r.eps_so * r.t**beta for r in top]
    try:
        slope = f"{decay_exponent(rows):.3f}"
    except TooFewPointsError:
        slope = "n/a (PoA excess below rounding)"
    L = limit_ratio(inst, dist, beta)
    print(f"[{name}] beta={beta:g}")
    print(f"  decay exponent          {slope}")
    print(f"  (poa-1) t^b max/min     {spread(excess) if excess else math.inf:.3g} over {len(excess)} rows")
    print(f"  eps_so t^b max/min      {spread(eps):.3g}")
    print(f"  ratio_ne / L at max t   {rows[-1].ratio_ne / L:.8f}  (L = {L:.8g})")
    print(f"  distribution gap        {rows[0].dist_gap:.3e} -> {rows[-1].dist_gap:.3e}")
    if out_dir:
        write_sweep_csv(rows, Path(out_dir) / f"{name}.csv")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--hi", type=float, default=1e4)
    ap.add_argument("--out-dir", default=None)
    args = ap.parse_args()
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    grid = log_grid(10.0, args.hi, args.points)
    for name, (build, beta) in CASES.items():
        report(name, build, beta, grid, args.out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
