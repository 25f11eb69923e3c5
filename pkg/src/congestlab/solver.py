"""Frank-Wolfe traffic assignment for user equilibrium and system optimum.

Both programs share one loop: evaluate subproblem arc costs (travel times for
UE, marginal costs for SO), load every OD pair onto its Dijkstra shortest path,
then move toward that all-or-nothing point with an exact line search.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .network import FlowProfile, Instance, Network, Path, aggregate, validate_instance


class Objective(str, enum.Enum):
    UE = "ue"
    SO = "so"


class SolverError(RuntimeError):
    pass


class DisconnectedODError(SolverError):
    pass


@dataclass(frozen=True)
class SolveOptions:
    objective: Objective = Objective.UE
    rel_gap_tol: float = 1e-4
    max_iters: int = 5000
    line_search_tol: float = 1e-10
    record_paths: bool = True
    variant: str = "away"
    """``"away"`` (away steps from the path registry) or ``"classic"`` Frank-Wolfe."""

    def __post_init__(self):
        object.__setattr__(self, "objective", Objective(self.objective))
        if self.variant not in ("away", "classic"):
            raise ValueError(f"unknown Frank-Wolfe variant {self.variant!r}")
        if not (self.rel_gap_tol > 0 and self.line_search_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class SolveResult:
    profile: FlowProfile
    objective_value: float
    social_cost: float
    relative_gap: float
    iterations: int
    od_min_costs: np.ndarray
    converged: bool
    objective: Objective
    trace: list[tuple[float, float]] = field(default_factory=list)
    """``(objective value, relative gap)`` before each step."""


def shortest_path(network: Network, arc_costs: Sequence[float], origin: int) -> tuple[np.ndarray, np.ndarray]:
    """Dijkstra from ``origin``.

    Returns ``(dist, pred)``; ``dist`` is ``inf`` for unreachable nodes and
    ``pred[v]`` is the arc entering ``v`` on the chosen path (-1 if none).
    Ties pop the lower node id first and predecessors change only on strict
    improvement, so the tree is deterministic.
    """
    costs = np.asarray(arc_costs, dtype=float)
    if costs.shape != (network.num_arcs,):
        raise ValueError(f"expected {network.num_arcs} arc costs, got shape {costs.shape}")
    if not np.all(np.isfinite(costs)) or np.any(costs < 0):
        raise ValueError("arc costs must be finite and nonnegative")
    dist = np.full(network.num_nodes, math.inf)
    pred = np.full(network.num_nodes, -1, dtype=np.int64)
    done = np.zeros(network.num_nodes, dtype=bool)
    dist[origin] = 0.0
    heap = [(0.0, origin)]
    out_arcs, heads = network.out_arcs, network.heads
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for a in out_arcs[u]:
            v = heads[a]
            nd = d + costs[a]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = a
                heapq.heappush(heap, (nd, int(v)))
    return dist, pred


def trace_path(network: Network, pred: np.ndarray, origin: int, destination: int) -> Path:
    path = []
    v = destination
    while v != origin:
        a = int(pred[v])
        if a < 0:
            raise DisconnectedODError(f"no path {origin}->{destination}")
        path.append(a)
        v = network.arcs[a].tail
    return tuple(reversed(path))


def all_or_nothing(
    instance: Instance, arc_costs: Sequence[float]
) -> tuple[np.ndarray, list[tuple[int, Path]], np.ndarray]:
    """Load each OD pair's full demand on one shortest path.

    Returns ``(link_flows, used_paths, od_costs)`` where ``used_paths`` holds
    ``(od index, path)`` for every OD pair with positive demand and
    ``od_costs[k]`` is the shortest-path cost of OD ``k``.
    """
    net = instance.network
    by_origin: dict[int, list[int]] = {}
    for k, od in enumerate(instance.od_pairs):
        by_origin.setdefault(od.origin, []).append(k)
    flows = np.zeros(net.num_arcs)
    used: list[tuple[int, Path]] = []
    od_costs = np.zeros(len(instance.od_pairs))
    for origin in sorted(by_origin):
        dist, pred = shortest_path(net, arc_costs, origin)
        for k in by_origin[origin]:
            od = instance.od_pairs[k]
            od_costs[k] = dist[od.destination]
            if od.demand <= 0:
                continue
            if not math.isfinite(dist[od.destination]):
                raise DisconnectedODError(f"OD {k} ({od.origin}->{od.destination}) has no path")
            path = trace_path(net, pred, od.origin, od.destination)
            used.append((k, path))
            flows[list(path)] += od.demand
    return flows, used, od_costs


def line_search(derivative: Callable[[float], float], tol: float = 1e-10) -> float:
    """Minimizer on ``[0, 1]`` of a convex function given its derivative.

    Bisection on the sign of the derivative until the bracket is narrower than
    ``tol``, then one secant step inside the final bracket.
    """
    d0 = derivative(0.0)
    if d0 >= 0:
        return 0.0
    d1 = derivative(1.0)
    if d1 <= 0:
        return 1.0
    lo, hi, dlo, dhi = 0.0, 1.0, d0, d1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        dm = derivative(mid)
        if dm == 0.0:
            return mid
        if dm < 0:
            lo, dlo = mid, dm
        else:
            hi, dhi = mid, dm
    step = lo - dlo * (hi - lo) / (dhi - dlo)
    return min(max(step, lo), hi)


def arc_values(instance: Instance, flows: np.ndarray) -> np.ndarray:
    return np.array([a.cost.value(float(x)) for a, x in zip(instance.network.arcs, flows)])


def arc_marginals(instance: Instance, flows: np.ndarray) -> np.ndarray:
    return np.array([a.cost.marginal(float(x)) for a, x in zip(instance.network.arcs, flows)])


def arc_integrals(instance: Instance, flows: np.ndarray) -> np.ndarray:
    return np.array([a.cost.integral(float(x)) for a, x in zip(instance.network.arcs, flows)])


def subproblem_costs(instance: Instance, flows: np.ndarray, objective: Objective) -> np.ndarray:
    """Arc costs whose all-or-nothing loading is the Frank-Wolfe direction."""
    if Objective(objective) is Objective.UE:
        return arc_values(instance, flows)
    return arc_marginals(instance, flows)


def beckmann_value(instance: Instance, profile: FlowProfile | np.ndarray) -> float:
    flows = profile.link_flows if isinstance(profile, FlowProfile) else np.asarray(profile, float)
    return math.fsum(arc_integrals(instance, flows))


def total_cost(instance: Instance, profile: FlowProfile | np.ndarray) -> float:
    flows = profile.link_flows if isinstance(profile, FlowProfile) else np.asarray(profile, float)
    return math.fsum(flows * arc_values(instance, flows))


def objective_value(instance: Instance, flows: np.ndarray, objective: Objective) -> float:
    if Objective(objective) is Objective.UE:
        return beckmann_value(instance, flows)
    return total_cost(instance, flows)


def _gap(instance: Instance, flows: np.ndarray, costs: np.ndarray, od_costs: np.ndarray) -> float:
    current = math.fsum(costs * flows)
    best = math.fsum(instance.demands * od_costs)
    if best == 0.0:
        # free shortest paths: optimal only if the current flows are free too
        return 0.0 if current == 0.0 else math.inf
    return (current - best) / best


def relative_gap(instance: Instance, profile: FlowProfile | np.ndarray, objective: Objective) -> float:
    """``(sum_a c_a f_a - sum_k d_k pi_k) / sum_k d_k pi_k`` under the subproblem costs."""
    flows = profile.link_flows if isinstance(profile, FlowProfile) else np.asarray(profile, float)
    costs = subproblem_costs(instance, flows, objective)
    _, _, od_costs = all_or_nothing(instance, costs)
    return _gap(instance, flows, costs, od_costs)


def solve(instance: Instance, options: SolveOptions = SolveOptions()) -> SolveResult:
    problems = validate_instance(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    T = instance.total_demand
    if not T > 0:
        raise ValueError("total demand must be positive")
    obj = options.objective
    arcs = instance.network.arcs

    flows, used, _ = all_or_nothing(instance, subproblem_costs(instance, np.zeros(len(arcs)), obj))
    registry: dict[Path, float] = {}
    od_of_path: dict[Path, int] = {}
    for k, path in used:
        registry[path] = instance.od_pairs[k].demand
        od_of_path[path] = k

    trace: list[tuple[float, float]] = []
    iterations = 0
    demands = instance.demands
    while True:
        costs = subproblem_costs(instance, flows, obj)
        target, used, od_costs = all_or_nothing(instance, costs)
        gap = _gap(instance, flows, costs, od_costs)
        trace.append((objective_value(instance, flows, obj), gap))
        if gap <= options.rel_gap_tol or iterations >= options.max_iters:
            break

        fw_dir = target - flows
        away = _away_vertex(instance, registry, od_of_path, costs) if options.variant == "away" else None
        if away is not None:
            away_flows, worst, max_step = away
            away_dir = flows - away_flows
        use_away = away is not None and -float(costs @ away_dir) > -float(costs @ fw_dir)
        if use_away:
            direction, max_step = away_dir * max_step, max_step
        else:
            direction, max_step = fw_dir, 1.0
        cost_fn = arc_values if obj is Objective.UE else arc_marginals

        def slope(mu):
            return math.fsum(cost_fn(instance, np.maximum(flows + mu * direction, 0.0)) * direction)

        mu = line_search(slope, options.line_search_tol)
        iterations += 1
        if mu == 0.0:
            # no descent along the chosen direction: the gap is rounding noise
            break
        if use_away:
            step = mu * max_step
            worst_paths = set(worst.values())
            for p in registry:
                if p not in worst_paths:
                    registry[p] *= 1.0 + step
            for k, path in worst.items():
                f = registry[path]
                binding = mu == 1.0 and f < demands[k] and f / (demands[k] - f) == max_step
                left = f * (1.0 + step) - step * demands[k]
                registry[path] = 0.0 if binding or left < 0 else left
            for p in [p for p, f in registry.items() if f <= 0.0]:
                del registry[p]
        else:
            for p in registry:
                registry[p] *= 1.0 - mu
            for k, path in used:
                registry[path] = registry.get(path, 0.0) + mu * demands[k]
                od_of_path[path] = k
        flows = aggregate(registry, len(arcs))

    registry, od_of_path = _prune(instance, registry, od_of_path)
    flows = aggregate(registry, len(arcs))
    costs = subproblem_costs(instance, flows, obj)
    _, _, od_costs = all_or_nothing(instance, costs)
    final_gap = _gap(instance, flows, costs, od_costs)
    profile = FlowProfile(registry if options.record_paths else {}, flows, od_of_path if options.record_paths else {})
    return SolveResult(
        profile=profile,
        objective_value=objective_value(instance, flows, obj),
        social_cost=total_cost(instance, flows),
        relative_gap=final_gap,
        iterations=iterations,
        od_min_costs=od_costs,
        converged=final_gap <= options.rel_gap_tol,
        objective=obj,
        trace=trace,
    )


def _away_vertex(instance, registry, od_of_path, costs):
    """All-or-nothing point on each OD's costliest used path, or None if no OD can move.

    Returns ``(link_flows, worst path per OD, max step)``; the max step keeps
    the worst path's flow nonnegative along ``x + step * (x - vertex)``.
    """
    worst: dict[int, Path] = {}
    worst_cost: dict[int, float] = {}
    for path, f in registry.items():
        if f <= 0:
            continue
        k = od_of_path[path]
        c = math.fsum(costs[a] for a in path)
        if k not in worst or c > worst_cost[k] or (c == worst_cost[k] and path < worst[k]):
            worst[k], worst_cost[k] = path, c
    vertex = np.zeros(instance.network.num_arcs)
    max_step = math.inf
    for k, path in worst.items():
        d = instance.od_pairs[k].demand
        vertex[list(path)] += d
        f = registry[path]
        if f < d:
            max_step = min(max_step, f / (d - f))
    if not math.isfinite(max_step):
        return None
    return vertex, worst, max_step


def _prune(instance, registry, od_of_path):
    """Drop dust paths below ``1e-12 * T`` and rescale each OD back to its demand."""
    floor = 1e-12 * instance.total_demand
    kept = {p: f for p, f in registry.items() if f >= floor}
    for k, od in enumerate(instance.od_pairs):
        paths = [p for p in kept if od_of_path[p] == k]
        if not paths:
            continue
        total = math.fsum(kept[p] for p in paths)
        for p in paths:
            kept[p] *= od.demand / total
    return kept, {p: od_of_path[p] for p in kept}
