"""Routing-game instances: directed network, arc costs, OD demands, flow profiles."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .costs import CostSpec

Path = tuple[int, ...]


@dataclass(frozen=True)
class Arc:
    id: int
    tail: int
    head: int
    cost: CostSpec


@dataclass(frozen=True)
class Network:
    """Directed graph with dense integer node and arc ids.

    ``node_names`` is a side table for reporting; it defaults to ``str(i)``.
    """

    num_nodes: int
    arcs: tuple[Arc, ...]
    node_names: tuple[str, ...] = ()
    allow_self_loops: bool = False

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if not self.node_names:
            object.__setattr__(self, "node_names", tuple(str(i) for i in range(self.num_nodes)))
        elif len(self.node_names) != self.num_nodes:
            raise ValueError("node_names must have one entry per node")

    @property
    def nodes(self) -> range:
        return range(self.num_nodes)

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    @cached_property
    def out_arcs(self) -> tuple[tuple[int, ...], ...]:
        """Outgoing arc ids per node, ascending."""
        out: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for arc in self.arcs:
            if 0 <= arc.tail < self.num_nodes:
                out[arc.tail].append(arc.id)
        return tuple(tuple(sorted(a)) for a in out)

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([a.tail for a in self.arcs], dtype=np.int64)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([a.head for a in self.arcs], dtype=np.int64)

    def reachable(self, origin: int) -> set[int]:
        seen = {origin}
        queue = deque([origin])
        while queue:
            u = queue.popleft()
            for a in self.out_arcs[u]:
                v = self.arcs[a].head
                if 0 <= v < self.num_nodes and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    @classmethod
    def build(
        cls,
        num_nodes: int,
        arcs: Sequence[tuple[int, int, CostSpec]],
        node_names: Sequence[str] = (),
        allow_self_loops: bool = False,
    ) -> Network:
        """Assign dense arc ids in list order."""
        return cls(
            num_nodes,
            tuple(Arc(i, t, h, c) for i, (t, h, c) in enumerate(arcs)),
            tuple(node_names),
            allow_self_loops,
        )


@dataclass(frozen=True)
class ODPair:
    origin: int
    destination: int
    demand: float


@dataclass(frozen=True)
class Instance:
    network: Network
    od_pairs: tuple[ODPair, ...]

    def __post_init__(self):
        object.__setattr__(self, "od_pairs", tuple(self.od_pairs))

    @property
    def demands(self) -> np.ndarray:
        return np.array([od.demand for od in self.od_pairs], dtype=float)

    @property
    def total_demand(self) -> float:
        return math.fsum(od.demand for od in self.od_pairs)

    def with_demands(self, demands: Sequence[float]) -> Instance:
        if len(demands) != len(self.od_pairs):
            raise ValueError(f"expected {len(self.od_pairs)} demands, got {len(demands)}")
        return replace(
            self,
            od_pairs=tuple(replace(od, demand=float(d)) for od, d in zip(self.od_pairs, demands)),
        )


@dataclass(frozen=True)
class Distribution:
    """Shares of total demand per OD pair; sums to one."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ValueError("empty distribution")
        if any(v < 0 or not math.isfinite(v) for v in w):
            raise ValueError(f"distribution weights must be finite and nonnegative: {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"distribution weights sum to {math.fsum(w)}, not 1")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @classmethod
    def from_shares(cls, shares: Sequence[float]) -> Distribution:
        """Normalize arbitrary nonnegative shares."""
        total = math.fsum(shares)
        if not total > 0:
            raise ValueError("shares must have a positive sum")
        return cls(tuple(s / total for s in shares))


@dataclass
class FlowProfile:
    """Path flows plus the aggregated link flows ``f_a = sum_{s contains a} f_s``."""

    path_flows: dict[Path, float]
    link_flows: np.ndarray
    od_of_path: dict[Path, int] = field(default_factory=dict)

    def od_flow(self, k: int) -> float:
        return math.fsum(f for p, f in self.path_flows.items() if self.od_of_path[p] == k)

    def paths_of(self, k: int) -> list[Path]:
        return [p for p in self.path_flows if self.od_of_path[p] == k]


def aggregate(path_flows: Mapping[Path, float], num_arcs: int) -> np.ndarray:
    """Link flows induced by path flows (0/1 path membership)."""
    contributions: list[list[float]] = [[] for _ in range(num_arcs)]
    for path, flow in path_flows.items():
        for a in path:
            contributions[a].append(flow)
    return np.array([math.fsum(c) for c in contributions], dtype=float)


def validate_instance(instance: Instance) -> list[str]:
    """Every problem with ``instance``; empty when it is well formed."""
    net = instance.network
    problems: list[str] = []
    ids = [a.id for a in net.arcs]
    if ids != list(range(len(ids))):
        problems.append("arc ids are not dense 0..|A|-1 in order")
    for arc in net.arcs:
        for end, node in (("tail", arc.tail), ("head", arc.head)):
            if not 0 <= node < net.num_nodes:
                problems.append(f"arc {arc.id}: dangling {end} node id {node}")
        if arc.tail == arc.head and not net.allow_self_loops:
            problems.append(f"arc {arc.id}: self-loop at node {arc.tail}")
        try:
            c0 = arc.cost.value(0.0)
        except Exception as exc:  # noqa: BLE001 - any failure is a violation
            problems.append(f"arc {arc.id}: cost spec fails at 0 ({exc})")
        else:
            if not (math.isfinite(c0) and c0 >= 0):
                problems.append(f"arc {arc.id}: cost spec invalid at 0 (value {c0})")
    for k, od in enumerate(instance.od_pairs):
        bad_node = False
        for end, node in (("origin", od.origin), ("destination", od.destination)):
            if not 0 <= node < net.num_nodes:
                problems.append(f"od {k}: dangling {end} node id {node}")
                bad_node = True
        if not (math.isfinite(od.demand) and od.demand >= 0):
            problems.append(f"od {k}: negative demand {od.demand}")
        if od.origin == od.destination:
            problems.append(f"od {k}: origin equals destination ({od.origin})")
        elif not bad_node and od.destination not in net.reachable(od.origin):
            problems.append(f"od {k}: disconnected OD pair {od.origin}->{od.destination}")
    return problems


def normalize_demands(instance: Instance) -> tuple[float, Distribution]:
    """Total demand ``T`` and the shares ``d_k / T``."""
    T = instance.total_demand
    if not T > 0:
        raise ValueError("total demand is zero; cannot normalize")
    return T, Distribution(tuple(od.demand / T for od in instance.od_pairs))


def scale_instance(instance: Instance, distribution: Distribution, T: float) -> Instance:
    """Same network and costs with demands ``lambda_k * T``."""
    if T < 0:
        raise ValueError("total demand must be nonnegative")
    if len(distribution) != len(instance.od_pairs):
        raise ValueError(
            f"distribution has {len(distribution)} entries, instance has {len(instance.od_pairs)} OD pairs"
        )
    return instance.with_demands([w * T for w in distribution.weights])
