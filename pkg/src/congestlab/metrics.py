"""Social cost, price of anarchy, approximate-equilibrium epsilon and the L bound."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .costs import BPR
from .network import FlowProfile, Instance
from .solver import Objective, SolveOptions, SolveResult, all_or_nothing, arc_marginals, arc_values, solve, total_cost


@dataclass
class PoaReport:
    c_ne: float
    c_so: float
    poa: float
    ne_gap: float
    so_gap: float
    ne: SolveResult | None = field(default=None, repr=False)
    so: SolveResult | None = field(default=None, repr=False)


def social_cost(instance: Instance, profile: FlowProfile | np.ndarray) -> float:
    """``sum_a f_a * tau_a(f_a)``."""
    return total_cost(instance, profile)


def price_of_anarchy(instance: Instance, options: SolveOptions = SolveOptions()) -> PoaReport:
    """Solve UE and SO with the same tolerances and report ``C_NE / C_SO``."""
    ne = solve(instance, replace(options, objective=Objective.UE))
    so = solve(instance, replace(options, objective=Objective.SO))
    c_ne, c_so = ne.social_cost, so.social_cost
    if c_so > 0:
        poa = c_ne / c_so
    else:
        # zero-cost optimum: every profile is optimal only if NE is free too
        poa = 1.0 if c_ne == 0 else math.inf
    return PoaReport(c_ne, c_so, poa, ne.relative_gap, so.relative_gap, ne, so)


def epsilon_of_profile(
    instance: Instance,
    profile: FlowProfile,
    flow_floor: float | None = None,
    costs: str = "travel",
) -> float:
    """Smallest ``eps`` such that every used path costs at most ``(1 + eps)`` times the cheapest.

    Used means registered with flow above ``flow_floor`` (default ``1e-6 * T``).
    The cheapest cost is a fresh shortest-path computation over the whole
    network. ``costs="marginal"`` measures the same quantity under marginal
    costs, which vanishes at a system optimum.
    """
    if flow_floor is None:
        flow_floor = 1e-6 * instance.total_demand
    if costs == "travel":
        arc_c = arc_values(instance, profile.link_flows)
    elif costs == "marginal":
        arc_c = arc_marginals(instance, profile.link_flows)
    else:
        raise ValueError(f"costs must be 'travel' or 'marginal', got {costs!r}")
    _, _, pi = all_or_nothing(instance, arc_c)
    eps = 0.0
    for path, f in profile.path_flows.items():
        if f <= flow_floor:
            continue
        k = profile.od_of_path[path]
        c = math.fsum(arc_c[a] for a in path)
        if pi[k] > 0:
            eps = max(eps, c / pi[k] - 1.0)
        elif c > 0:
            return math.inf
    return eps


def l_upper_bound(instance: Instance, max_paths: int = 1000) -> float:
    """Sum over all simple OD paths and their arcs of the BPR coefficient ``alpha t0 / u**beta``."""
    from .oracle import enumerate_paths

    for arc in instance.network.arcs:
        if not isinstance(arc.cost, BPR):
            raise TypeError(f"arc {arc.id} has a non-BPR cost ({type(arc.cost).__name__})")
    path_set = enumerate_paths(instance, max_paths)
    arcs = instance.network.arcs
    return math.fsum(arcs[a].cost.gamma for paths in path_set.paths for p in paths for a in p)
