"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 solver did not converge,
3 invalid instance, 4 oracle disagreement.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import formats
from .metrics import epsilon_of_profile, l_upper_bound, price_of_anarchy
from .network import Distribution, normalize_demands, validate_instance
from .oracle import MAX_ORACLE_PATHS, PathOverflowError, brute_force, enumerate_paths
from .scaling import (
    LimitGameError,
    SweepSpec,
    TooFewPointsError,
    decay_exponent,
    limit_ratio,
    log_grid,
    pigou_beta,
    pigou_formula_check,
    pigou_poa,
    run_sweep,
    saturation_point,
)
from .solver import Objective, SolveOptions, solve

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED, EXIT_INVALID, EXIT_ORACLE = 0, 1, 2, 3, 4

log = logging.getLogger("congestlab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Invalid(Exception):
    pass


def _load(path: str, validate: bool = True):
    try:
        return formats.load_instance(path, validate=validate)
    except formats.InstanceValidationError as exc:
        for v in exc.violations:
            print(f"violation: {v}", file=sys.stderr)
        raise _Invalid from exc
    except (formats.InstanceParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise _Invalid from exc


def _options(args, objective=Objective.UE) -> SolveOptions:
    return SolveOptions(
        objective=objective,
        rel_gap_tol=args.gap,
        max_iters=args.max_iters,
        variant=args.variant,
    )


def _fmt(v: float) -> str:
    return formats.format_float(v)


def cmd_validate(args) -> int:
    instance = _load(args.instance, validate=False)
    problems = validate_instance(instance)
    if problems:
        for p in problems:
            print(f"violation: {p}", file=sys.stderr)
        return EXIT_INVALID
    print(f"ok: {instance.network.num_nodes} nodes, {instance.network.num_arcs} arcs, {len(instance.od_pairs)} OD pairs")
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = _load(args.instance)
    res = solve(instance, _options(args, Objective(args.objective)))
    net = instance.network
    print("arc,tail,head,flow,travel_time")
    for a, f in zip(net.arcs, res.profile.link_flows):
        print(f"{a.id},{net.node_names[a.tail]},{net.node_names[a.head]},{_fmt(f)},{_fmt(a.cost.value(float(f)))}")
    print(
        f"objective={_fmt(res.objective_value)} social_cost={_fmt(res.social_cost)} "
        f"relative_gap={_fmt(res.relative_gap)} iterations={res.iterations}",
        file=sys.stderr,
    )
    if not res.converged:
        print(f"error: no convergence within {args.max_iters} iterations", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_poa(args) -> int:
    instance = _load(args.instance)
    rep = price_of_anarchy(instance, _options(args))
    print("c_ne,c_so,poa,ne_gap,so_gap")
    print(",".join(_fmt(v) for v in (rep.c_ne, rep.c_so, rep.poa, rep.ne_gap, rep.so_gap)))
    beta = pigou_beta(instance)
    if beta is not None:
        exact = pigou_poa(beta, instance.total_demand)
        print(f"pigou closed form poa={_fmt(exact)} rel_err={_fmt(abs(rep.poa / exact - 1))}", file=sys.stderr)
    if not (rep.ne.converged and rep.so.converged):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _t_grid(spec: str) -> tuple[float, ...]:
    if spec.startswith("log:"):
        try:
            lo, hi, n = spec[4:].split(":")
            return log_grid(float(lo), float(hi), int(n))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad log grid {spec!r}; expected log:LO:HI:N") from exc
    try:
        return tuple(float(v) for v in spec.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad demand grid {spec!r}") from exc


def _lambda(spec: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in spec.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad distribution {spec!r}") from exc


def cmd_sweep(args) -> int:
    instance = _load(args.instance)
    if args.lam is not None:
        if len(args.lam) != len(instance.od_pairs):
            print(f"error: --lambda needs {len(instance.od_pairs)} entries", file=sys.stderr)
            return EXIT_USAGE
        dist = Distribution.from_shares(args.lam)
    else:
        _, dist = normalize_demands(instance)
    spec = SweepSpec(dist, args.t_grid, _options(args), args.beta)
    rows = run_sweep(instance, spec, jobs=args.jobs)

    summary_out = sys.stdout if args.out else sys.stderr
    if args.out:
        formats.write_sweep_csv(rows, args.out)
    else:
        sys.stdout.write(formats.sweep_csv(rows))

    def say(key, value):
        print(f"# {key}: {value}", file=summary_out)

    sat = saturation_point(rows, args.saturation_tol)
    say(f"saturation_point(tol={args.saturation_tol:g})", "none" if sat is None else _fmt(sat))
    try:
        say("decay_exponent", _fmt(decay_exponent(rows, args.tail)))
    except TooFewPointsError as exc:
        say("decay_exponent", f"n/a ({exc})")
    try:
        say("l_upper_bound", _fmt(l_upper_bound(instance)))
    except (TypeError, PathOverflowError) as exc:
        say("l_upper_bound", f"n/a ({exc})")
    try:
        say("limit_ratio", _fmt(limit_ratio(instance, dist, args.beta)))
    except (LimitGameError, TypeError) as exc:
        say("limit_ratio", f"n/a ({exc})")
    alternate, derived, disagree = pigou_formula_check(1.0, 1.0)
    say("pigou_formula_check(beta=1,t=1)", f"alternate={_fmt(alternate)} derived={_fmt(derived)} disagree={disagree}")
    beta = pigou_beta(instance)
    if beta is not None:
        worst = max(abs(r.poa / pigou_poa(beta, r.t) - 1) for r in rows if r.ok)
        say("pigou_closed_form_max_rel_err", _fmt(worst))
    failed = [r for r in rows if not r.ok]
    for r in failed:
        print(f"row t={_fmt(r.t)} flagged: {r.error}", file=sys.stderr)
    return EXIT_NOT_CONVERGED if failed else EXIT_OK


def cmd_eps_check(args) -> int:
    instance = _load(args.instance)
    res = solve(instance, _options(args, Objective(args.objective)))
    floor = args.floor if args.floor is not None else 1e-6 * instance.total_demand
    eps = epsilon_of_profile(instance, res.profile, floor)
    eps_marginal = epsilon_of_profile(instance, res.profile, floor, costs="marginal")
    print("objective,relative_gap,eps_travel,eps_marginal")
    print(f"{res.objective.value},{_fmt(res.relative_gap)},{_fmt(eps)},{_fmt(eps_marginal)}")
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_oracle_compare(args) -> int:
    instance = _load(args.instance)
    try:
        paths = enumerate_paths(instance, MAX_ORACLE_PATHS)
        if paths.total > MAX_ORACLE_PATHS:
            raise PathOverflowError(f"{paths.total} paths exceed the oracle limit {MAX_ORACLE_PATHS}")
    except PathOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    worst = 0.0
    print("objective,frank_wolfe,oracle,rel_diff")
    converged = True
    for obj in (Objective.UE, Objective.SO):
        res = solve(instance, replace(_options(args, obj), rel_gap_tol=min(args.gap, 1e-8)))
        converged &= res.converged
        _, val = brute_force(instance, paths, obj, args.grid)
        diff = abs(res.objective_value - val) / max(abs(val), 1e-300)
        worst = max(worst, diff)
        print(f"{obj.value},{_fmt(res.objective_value)},{_fmt(val)},{_fmt(diff)}")
    if not converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK if worst <= 1e-4 else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="congestlab", description="Equilibrium, system optimum and demand-scaling experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(p, gap=1e-4):
        p.add_argument("--gap", type=float, default=gap, help="relative gap tolerance")
        p.add_argument("--max-iters", type=int, default=5000)
        p.add_argument("--variant", choices=("away", "classic"), default="away")
        p.add_argument("instance")

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="solve UE or SO, print link flows")
    p.add_argument("--objective", choices=("ue", "so"), default="ue")
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("poa", help="price of anarchy at the file's demands")
    solver_flags(p)
    p.set_defaults(func=cmd_poa)

    p = sub.add_parser("sweep", help="scale total demand and tabulate PoA and cost ratios")
    p.add_argument("--lambda", dest="lam", type=_lambda, default=None, help="OD shares, comma separated")
    p.add_argument("--t-grid", type=_t_grid, default=log_grid(10.0, 1e4, 13), help="log:LO:HI:N or comma list")
    p.add_argument("--beta", type=float, default=4.0, help="scaling exponent")
    p.add_argument("--saturation-tol", type=float, default=0.01)
    p.add_argument("--tail", type=float, default=0.5, help="fraction of rows used for the decay fit")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    solver_flags(p, gap=1e-8)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eps-check", help="epsilon of the solved profile as an approximate equilibrium")
    p.add_argument("--objective", choices=("ue", "so"), default="so")
    p.add_argument("--floor", type=float, default=None, help="path-flow floor (default 1e-6 T)")
    solver_flags(p, gap=1e-8)
    p.set_defaults(func=cmd_eps_check)

    p = sub.add_parser("oracle-compare", help="Frank-Wolfe vs brute force on a tiny instance")
    p.add_argument("--grid", type=int, default=24)
    solver_flags(p, gap=1e-8)
    p.set_defaults(func=cmd_oracle_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except _Invalid:
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
