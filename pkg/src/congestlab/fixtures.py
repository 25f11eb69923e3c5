"""Small reference games used by tests, scripts and the shipped JSON fixtures."""
from __future__ import annotations

from .costs import BPR, Affine, Constant, Polynomial
from .network import Instance, Network, ODPair


def pigou(beta: float = 4.0, demand: float = 1.0) -> Instance:
    """Two parallel arcs ``x**beta`` and constant 1."""
    net = Network.build(2, [(0, 1, Polynomial(((1.0, beta),))), (0, 1, Constant(1.0))], ("o", "t"))
    return Instance(net, (ODPair(0, 1, demand),))


def pigou_bpr(demand: float = 1.0) -> Instance:
    """Both arcs ``BPR(t0=1, u=1, alpha=1, beta=1)``, i.e. ``1 + x``."""
    net = Network.build(2, [(0, 1, BPR(1.0, 1.0, 1.0, 1.0)), (0, 1, BPR(1.0, 1.0, 1.0, 1.0))], ("o", "t"))
    return Instance(net, (ODPair(0, 1, demand),))


def two_link(demand: float = 3.0) -> Instance:
    """Parallel arcs ``x`` and ``x + 1``."""
    net = Network.build(2, [(0, 1, Affine(1.0, 0.0)), (0, 1, Affine(1.0, 1.0))], ("o", "t"))
    return Instance(net, (ODPair(0, 1, demand),))


def two_link_bpr(beta: float = 4.0, demand: float = 1.0) -> Instance:
    """Parallel BPR arcs ``x**beta + 1`` and ``x**beta + 2``."""
    arcs = [(0, 1, BPR(1.0, 1.0, 1.0, beta)), (0, 1, BPR(2.0, 1.0, 0.5, beta))]
    return Instance(Network.build(2, arcs, ("o", "t")), (ODPair(0, 1, demand),))


def monomial_pair(beta: float = 4.0, demand: float = 1.0) -> Instance:
    """Parallel monomials ``x**beta`` and ``2 x**beta``; equilibrium is always optimal."""
    arcs = [(0, 1, Polynomial(((1.0, beta),))), (0, 1, Polynomial(((2.0, beta),)))]
    return Instance(Network.build(2, arcs, ("o", "t")), (ODPair(0, 1, demand),))


def three_path(demand: float = 4.0) -> Instance:
    """Three routes o->t: a direct quadratic arc, a two-arc detour via m, a direct linear arc."""
    arcs = [
        (0, 2, Polynomial(((1.0, 2.0), (1.0, 0.0)))),
        (0, 1, Affine(1.0, 0.0)),
        (1, 2, Affine(0.5, 1.0)),
        (0, 2, Affine(3.0, 0.0)),
    ]
    return Instance(Network.build(3, arcs, ("o", "m", "t")), (ODPair(0, 2, demand),))


def diamond(demands: tuple[float, float] = (7.0, 3.0)) -> Instance:
    """4-node all-BPR (beta = 4) diamond with a cross arc and OD pairs s->t, a->t."""
    arcs = [
        (0, 1, BPR(1.0, 1.0, 1.0, 4.0)),
        (0, 2, BPR(2.0, 1.0, 0.5, 4.0)),
        (1, 3, BPR(1.5, 2.0, 0.15, 4.0)),
        (2, 3, BPR(1.0, 1.0, 1.0, 4.0)),
        (1, 2, BPR(0.5, 1.0, 1.0, 4.0)),
    ]
    net = Network.build(4, arcs, ("s", "a", "b", "t"))
    return Instance(net, (ODPair(0, 3, demands[0]), ODPair(1, 3, demands[1])))


def two_od_parallel(demands: tuple[float, float] = (1.0, 0.0)) -> Instance:
    """Two OD pairs with two parallel arcs each: ``2x+1, 3x+1`` on top and ``4x^2+1, 5x^2+1`` below.

    Only one OD pair carries demand at a time.
    """
    arcs = [
        (0, 1, Polynomial(((2.0, 1.0), (1.0, 0.0)))),
        (0, 1, Polynomial(((3.0, 1.0), (1.0, 0.0)))),
        (2, 3, Polynomial(((4.0, 2.0), (1.0, 0.0)))),
        (2, 3, Polynomial(((5.0, 2.0), (1.0, 0.0)))),
    ]
    net = Network.build(4, arcs, ("o1", "t1", "o2", "t2"))
    return Instance(net, (ODPair(0, 1, demands[0]), ODPair(2, 3, demands[1])))


def broken() -> Instance:
    """Negative demand plus an OD pair with no route."""
    net = Network.build(3, [(0, 1, Affine(1.0, 0.0)), (2, 1, Constant(1.0))], ("o", "t", "x"))
    return Instance(net, (ODPair(0, 1, -1.0), ODPair(0, 2, 1.0)))


SHIPPED = {
    "pigou_b1": lambda: pigou(1.0),
    "pigou_b4": lambda: pigou(4.0),
    "pigou_bpr": pigou_bpr,
    "twolink": two_link,
    "twolink_bpr": lambda: two_link_bpr(4.0),
    "twolink_bpr_b1": lambda: two_link_bpr(1.0),
    "monomial_pair": monomial_pair,
    "three_path": three_path,
    "diamond": diamond,
    "two_od_parallel": two_od_parallel,
    "broken": broken,
}
