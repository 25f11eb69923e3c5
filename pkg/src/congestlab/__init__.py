"""Non-atomic routing games: equilibria, system optima and demand-scaling experiments."""
from .costs import BPR, Affine, Constant, LimitCost, LimitMarker, Polynomial, RecursivePiecewise
from .network import Arc, Distribution, FlowProfile, Instance, Network, ODPair
from .solver import Objective, SolveOptions, SolveResult, solve

__all__ = [
    "Affine",
    "Arc",
    "BPR",
    "Constant",
    "Distribution",
    "FlowProfile",
    "Instance",
    "LimitCost",
    "LimitMarker",
    "Network",
    "ODPair",
    "Objective",
    "Polynomial",
    "RecursivePiecewise",
    "SolveOptions",
    "SolveResult",
    "solve",
]
