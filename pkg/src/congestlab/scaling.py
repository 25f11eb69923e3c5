"""Demand-scaling experiments: PoA sweeps, decay fits, the limit game, Pigou closed forms."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .costs import LimitMarker, Polynomial, limit_cost
from .metrics import epsilon_of_profile, price_of_anarchy
from .network import Arc, Distribution, FlowProfile, Instance, Network, scale_instance
from .solver import Objective, SolveOptions, solve

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepSpec:
    distribution: Distribution
    t_values: tuple[float, ...]
    options: SolveOptions = SolveOptions()
    beta_ref: float = 4.0

    def __post_init__(self):
        t = tuple(float(v) for v in self.t_values)
        if not t:
            raise ValueError("empty demand grid")
        if any(v <= 0 for v in t) or any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("demand grid must be positive and strictly increasing")
        object.__setattr__(self, "t_values", t)


@dataclass
class SweepRow:
    t: float
    c_ne: float
    c_so: float
    poa: float
    ratio_ne: float
    ratio_so: float
    eps_so: float
    ne_gap: float
    so_gap: float
    dist_gap: float = math.nan
    error: str | None = None
    ne_profile: FlowProfile | None = field(default=None, repr=False, compare=False)
    so_profile: FlowProfile | None = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.error is None


CSV_FIELDS = ("t", "c_ne", "c_so", "poa", "ratio_ne", "ratio_so", "eps_so", "ne_gap", "so_gap")


def log_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    """``n`` log-spaced points from ``lo`` to ``hi`` inclusive."""
    if n < 2:
        return (float(lo),)
    return tuple(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n))


def sweep_point(instance: Instance, spec: SweepSpec, t: float, keep_profiles: bool = False) -> SweepRow:
    scaled = scale_instance(instance, spec.distribution, t)
    try:
        rep = price_of_anarchy(scaled, spec.options)
    except Exception as exc:  # noqa: BLE001 - recorded on the row, sweep continues
        nan = math.nan
        return SweepRow(t, nan, nan, nan, nan, nan, nan, nan, nan, error=f"{type(exc).__name__}: {exc}")
    scale = t ** (spec.beta_ref + 1.0)
    error = None
    if not (rep.ne.converged and rep.so.converged):
        error = "not converged"
    return SweepRow(
        t=t,
        c_ne=rep.c_ne,
        c_so=rep.c_so,
        poa=rep.poa,
        ratio_ne=rep.c_ne / scale,
        ratio_so=rep.c_so / scale,
        eps_so=epsilon_of_profile(scaled, rep.so.profile),
        ne_gap=rep.ne_gap,
        so_gap=rep.so_gap,
        dist_gap=distribution_gap(rep.ne.profile, rep.so.profile, t),
        error=error,
        ne_profile=rep.ne.profile if keep_profiles else None,
        so_profile=rep.so.profile if keep_profiles else None,
    )


def run_sweep(instance: Instance, spec: SweepSpec, jobs: int = 1, keep_profiles: bool = False) -> list[SweepRow]:
    """One row per demand level, in ``t`` order; each point solves cold."""
    if len(spec.distribution) != len(instance.od_pairs):
        raise ValueError("distribution length does not match the OD pairs")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(sweep_point, instance, spec, t, keep_profiles) for t in spec.t_values]
            return [f.result() for f in futures]
    return [sweep_point(instance, spec, t, keep_profiles) for t in spec.t_values]


def pigou_poa(beta: float, t: float) -> float:
    """Exact PoA of the two-arc game (``x**beta``, constant 1) with demand ``t``.

    Selfish flow fills the monomial arc up to ``min(t, 1)``. The optimum fills
    it up to ``x* = (beta + 1)**(-1/beta)``, where marginal cost reaches 1.
    """
    if not (beta > 0 and t > 0):
        raise ValueError("beta and t must be positive")
    x_star = (beta + 1.0) ** (-1.0 / beta)
    c_ne = min(t, 1.0) ** (beta + 1.0) + max(t - 1.0, 0.0)
    if t <= x_star:
        c_so = t ** (beta + 1.0)
    else:
        c_so = t - x_star * beta / (beta + 1.0)
    return c_ne / c_so


def pigou_poa_alternate(beta: float, t: float) -> float:
    """Alternate closed form ``T / (T - (b+1)**(-1/b) + (b+1)**-1)``.

    It is wrong: at b=1, t=1 it gives 1.0 where the exact PoA is 4/3. Kept so
    sweeps can report the disagreement with :func:`pigou_poa`.
    """
    return t / (t - (beta + 1.0) ** (-1.0 / beta) + 1.0 / (beta + 1.0))


def pigou_formula_check(beta: float = 1.0, t: float = 1.0) -> tuple[float, float, bool]:
    """``(alternate, derived, disagree)`` for the Pigou closed forms; logs the comparison."""
    alternate, derived = pigou_poa_alternate(beta, t), pigou_poa(beta, t)
    disagree = not math.isclose(alternate, derived, rel_tol=1e-9)
    log.warning(
        "pigou closed form at beta=%g t=%g: alternate=%.17g derived=%.17g -> %s",
        beta, t, alternate, derived, "DISAGREE (alternate denominator is wrong)" if disagree else "agree",
    )
    return alternate, derived, disagree


class LimitGameError(ValueError):
    pass


@dataclass(frozen=True)
class LimitGame:
    """Monomial game ``gamma_a x**beta`` with demands equal to the distribution (T = 1)."""

    instance: Instance
    beta: float

    @property
    def gammas(self) -> tuple[float, ...]:
        return tuple(a.cost.coefficients[0][0] for a in self.instance.network.arcs)


def build_limit_game(instance: Instance, distribution: Distribution, beta_ref: float) -> LimitGame:
    arcs = []
    for arc in instance.network.arcs:
        lim = limit_cost(arc.cost, beta_ref)
        if lim is LimitMarker.INFINITE:
            raise LimitGameError(f"arc {arc.id} grows faster than x**{beta_ref}; limit game undefined")
        gamma = 0.0 if lim is LimitMarker.ZERO else lim.gamma
        arcs.append(Arc(arc.id, arc.tail, arc.head, Polynomial(((gamma, beta_ref),))))
    net = instance.network
    limit_net = Network(net.num_nodes, tuple(arcs), net.node_names, net.allow_self_loops)
    limit_inst = scale_instance(Instance(limit_net, instance.od_pairs), distribution, 1.0)
    return LimitGame(limit_inst, float(beta_ref))


def limit_ratio(
    instance: Instance,
    distribution: Distribution,
    beta_ref: float,
    options: SolveOptions = SolveOptions(rel_gap_tol=1e-10),
) -> float:
    """Equilibrium cost of the limit game, the asymptote of ``C / T**(beta + 1)``."""
    game = build_limit_game(instance, distribution, beta_ref)
    return solve(game.instance, replace(options, objective=Objective.UE)).social_cost


class TooFewPointsError(ValueError):
    pass


def noise_filtered(rows: Sequence[SweepRow]) -> list[SweepRow]:
    """Rows whose PoA excess clears ten times the combined solver gaps."""
    return [r for r in rows if r.ok and r.poa - 1.0 > 10.0 * (abs(r.ne_gap) + abs(r.so_gap))]


def decay_exponent(rows: Sequence[SweepRow], tail_fraction: float = 0.5) -> float:
    """Least-squares slope of ``log(poa - 1)`` against ``log t`` over the last rows."""
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    n_tail = max(1, math.ceil(len(rows) * tail_fraction))
    tail = noise_filtered(list(rows)[-n_tail:])
    if len(tail) < 4:
        raise TooFewPointsError(f"only {len(tail)} tail rows above the solver noise floor")
    x = np.log([r.t for r in tail])
    y = np.log([r.poa - 1.0 for r in tail])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def saturation_point(rows: Sequence[SweepRow], tol: float = 0.01) -> float | None:
    """Smallest ``t`` from which every later row has ``poa <= 1 + tol``."""
    found = None
    for r in reversed(rows):
        if r.ok and r.poa <= 1.0 + tol:
            found = r.t
        else:
            break
    return found


def distribution_gap(ne_profile: FlowProfile, so_profile: FlowProfile, t: float) -> float:
    """``max_s |f_ne(s) - f_so(s)| / t`` over the union of registered paths."""
    paths = set(ne_profile.path_flows) | set(so_profile.path_flows)
    if not paths:
        return 0.0
    return max(abs(ne_profile.path_flows.get(p, 0.0) - so_profile.path_flows.get(p, 0.0)) for p in paths) / t


def top_decade(rows: Sequence[SweepRow]) -> list[SweepRow]:
    """Rows with ``t`` within a factor 10 of the largest ``t``."""
    if not rows:
        return []
    t_max = max(r.t for r in rows)
    return [r for r in rows if r.t >= t_max / 10.0 * (1 - 1e-12)]


def spread(values: Sequence[float]) -> float:
    """``max / min`` of positive values (``inf`` if any is nonpositive)."""
    vals = list(values)
    if not vals:
        raise ValueError("no values")
    lo = min(vals)
    return max(vals) / lo if lo > 0 else math.inf


def pigou_beta(instance: Instance) -> float | None:
    """Exponent ``beta`` if ``instance`` is the Pigou game (``x**beta`` vs constant 1), else None."""
    from .costs import Constant

    arcs = instance.network.arcs
    if len(instance.od_pairs) != 1 or len(arcs) != 2:
        return None
    od = instance.od_pairs[0]
    if any((a.tail, a.head) != (od.origin, od.destination) for a in arcs):
        return None
    mono, const = arcs
    if isinstance(mono.cost, Constant):
        mono, const = const, mono
    if not (isinstance(const.cost, Constant) and const.cost.level == 1.0):
        return None
    if not (isinstance(mono.cost, Polynomial) and len(mono.cost.coefficients) == 1):
        return None
    c, p = mono.cost.coefficients[0]
    return p if c == 1.0 and p > 0 else None
