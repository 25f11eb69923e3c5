"""Brute-force and analytic reference solvers for tiny instances.

Nothing here touches the Frank-Wolfe code: paths are enumerated explicitly,
the convex programs are minimized by grid search plus pairwise refinement,
and two-arc games are solved by bisection on the equalization condition.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .costs import CostSpec
from .network import Instance, Path
from .solver import Objective

MAX_ORACLE_PATHS = 6


class PathOverflowError(ValueError):
    pass


class TooManyPathsError(ValueError):
    pass


@dataclass(frozen=True)
class PathSet:
    paths: tuple[tuple[Path, ...], ...]
    """Simple paths per OD pair, in enumeration order."""

    @property
    def total(self) -> int:
        return sum(len(p) for p in self.paths)


def enumerate_paths(instance: Instance, max_paths: int = 100) -> PathSet:
    """Depth-first enumeration of simple paths, lower arc ids explored first."""
    net = instance.network
    per_od = []
    for k, od in enumerate(instance.od_pairs):
        found: list[Path] = []
        stack: list[int] = []
        on_path = {od.origin}

        def dfs(u: int) -> None:
            for a in net.out_arcs[u]:
                v = net.arcs[a].head
                if v in on_path:
                    continue
                stack.append(a)
                if v == od.destination:
                    found.append(tuple(stack))
                    if len(found) > max_paths:
                        raise PathOverflowError(f"OD {k} has more than {max_paths} simple paths")
                else:
                    on_path.add(v)
                    dfs(v)
                    on_path.discard(v)
                stack.pop()

        dfs(od.origin)
        if not found:
            raise ValueError(f"OD {k} has no path")
        per_od.append(tuple(found))
    return PathSet(tuple(per_od))


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, row = -1, []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + parts - 1 - prev - 1)
        rows.append(row)
    return np.array(rows, dtype=float).reshape(-1, parts)


def _objective_fn(instance: Instance, incidence: np.ndarray, objective: Objective):
    arcs = instance.network.arcs
    if Objective(objective) is Objective.UE:
        per_arc = [np.vectorize(a.cost.integral, otypes=[float]) for a in arcs]
    else:
        per_arc = [np.vectorize(lambda x, c=a.cost: x * c.value(x), otypes=[float]) for a in arcs]

    def f(path_flows: np.ndarray) -> np.ndarray:
        link = np.atleast_2d(path_flows) @ incidence.T
        link = np.maximum(link, 0.0)
        return sum(fn(link[:, a]) for a, fn in enumerate(per_arc))

    return f


def brute_force(
    instance: Instance,
    path_set: PathSet,
    objective: Objective,
    grid: int = 24,
) -> tuple[dict[Path, float], float]:
    """Minimize the Beckmann (UE) or total-cost (SO) program over explicit path flows.

    Grid search over each OD simplex with ``grid`` subdivisions, then pairwise
    exchange refinement halving the step 40 times.
    """
    if path_set.total > MAX_ORACLE_PATHS:
        raise TooManyPathsError(f"{path_set.total} paths exceed the oracle limit {MAX_ORACLE_PATHS}")
    flat: list[Path] = [p for paths in path_set.paths for p in paths]
    owner = [k for k, paths in enumerate(path_set.paths) for _ in paths]
    incidence = np.zeros((instance.network.num_arcs, len(flat)))
    for j, p in enumerate(flat):
        for a in p:
            incidence[a, j] += 1.0
    fn = _objective_fn(instance, incidence, objective)
    demands = [od.demand for od in instance.od_pairs]

    blocks = []
    for k, paths in enumerate(path_set.paths):
        blocks.append(_compositions(grid, len(paths)) / grid * demands[k])
    candidates = blocks[0]
    for b in blocks[1:]:
        candidates = np.hstack(
            [np.repeat(candidates, len(b), axis=0), np.tile(b, (len(candidates), 1))]
        )
    values = fn(candidates)
    x = candidates[int(np.argmin(values))].copy()
    best = float(fn(x)[0])

    pairs = [(i, j) for i in range(len(flat)) for j in range(len(flat)) if i != j and owner[i] == owner[j]]
    step = max(demands) / grid if demands else 0.0
    for _ in range(41):
        for _ in range(500):
            improved = False
            for i, j in pairs:
                move = min(step, x[j])
                if move <= 0:
                    continue
                trial = x.copy()
                trial[i] += move
                trial[j] -= move
                val = float(fn(trial)[0])
                if val < best:
                    x, best, improved = trial, val, True
            if not improved:
                break
        step *= 0.5
    return {p: float(x[j]) for j, p in enumerate(flat)}, best


def two_link_analytic(
    spec_a: CostSpec, spec_b: CostSpec, t: float, objective: Objective
) -> tuple[float, float, float]:
    """Split ``t`` over two parallel arcs by equalizing (marginal) costs.

    Returns ``(x_a, x_b, social cost)``. When costs tie over an interval of
    splits the midpoint of that interval is returned.
    """
    if not t > 0:
        raise ValueError("demand must be positive")
    if Objective(objective) is Objective.UE:
        ca, cb = spec_a.value, spec_b.value
    else:
        ca, cb = spec_a.marginal, spec_b.marginal

    def h(x):
        return ca(x) - cb(t - x)

    def boundary(pred) -> float:
        # smallest x in [0, t] with pred(h(x)) true; pred must be monotone in x
        if pred(h(0.0)):
            return 0.0
        if not pred(h(t)):
            return t
        lo, hi = 0.0, t
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if pred(h(mid)):
                hi = mid
            else:
                lo = mid
        return hi

    first_nonneg = boundary(lambda v: v >= 0)
    first_pos = boundary(lambda v: v > 0)
    x = 0.5 * (first_nonneg + first_pos)
    xa, xb = x, t - x
    cost = xa * spec_a.value(xa) + xb * spec_b.value(xb)
    return xa, xb, cost
