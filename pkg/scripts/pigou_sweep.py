"""Pigou game: solver PoA against the closed form over a demand sweep.

    python scripts/pigou_sweep.py --beta 4 --out results/pigou_b4.csv
"""
import argparse
import sys

from congestlab import fixtures
from congestlab.formats import format_float, write_sweep_csv
from congestlab.network import Distribution
from congestlab.scaling import SweepSpec, decay_exponent, log_grid, pigou_formula_check, pigou_poa, run_sweep
from congestlab.solver import SolveOptions


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=4.0)
    ap.add_argument("--lo", type=float, default=0.1)
    ap.add_argument("--hi", type=float, default=1e4)
    ap.add_argument("--points", type=int, default=21)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    spec = SweepSpec(Distribution((1.0,)), log_grid(args.lo, args.hi, args.points), SolveOptions(rel_gap_tol=1e-10), args.beta)
    rows = run_sweep(fixtures.pigou(args.beta), spec)
    print(f"{'t':>12} {'poa':>20} {'closed form':>20} {'rel err':>10}")
    for r in rows:
        exact = pigou_poa(args.beta, r.t)
        print(f"{r.t:12.5g} {format_float(r.poa):>20} {format_float(exact):>20} {abs(r.poa / exact - 1):10.2e}")
    print(f"decay exponent (upper half): {decay_exponent(rows):.4f}")
    alternate, derived, _ = pigou_formula_check(1.0, 1.0)
    print(f"alternate closed form at beta=1, t=1: {alternate:.6f}; derived: {derived:.6f}")
    if args.out:
        write_sweep_csv(rows, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
