import math

import pytest
from scipy import optimize

from congestlab import fixtures
from congestlab.costs import BPR, Polynomial
from congestlab.network import Distribution, Instance, Network, ODPair
from congestlab.scaling import (
    LimitGameError,
    SweepRow,
    SweepSpec,
    TooFewPointsError,
    build_limit_game,
    decay_exponent,
    distribution_gap,
    limit_ratio,
    log_grid,
    pigou_beta,
    pigou_formula_check,
    pigou_poa,
    pigou_poa_alternate,
    run_sweep,
    saturation_point,
    spread,
    top_decade,
)
from congestlab.solver import Objective, SolveOptions, solve

ONE = Distribution((1.0,))
TIGHT = SolveOptions(rel_gap_tol=1e-10)

# 1-D dense grid plus bounded scalar minimization of x**(b+1) + (t - x), frozen
PIGOU_ORACLE = {
    1.0: {0.5: 1.0, 1.0: 1.3333333333333333, 2.0: 1.1428571428571428, 10.0: 1.0256410256410255,
          100.0: 1.0025062656641603, 1e4: 1.0000250006250155},
    2.0: {0.5: 1.0, 1.0: 1.6257523845831854, 2.0: 1.2383135547194857, 10.0: 1.0400308043227497,
          100.0: 1.0038638738519878, 1e4: 1.000038491489068},
    4.0: {0.5: 1.0, 1.0: 2.1505017648768776, 2.0: 1.365180485757271, 10.0: 1.0565231701623206,
          100.0: 1.0053786980572448, 1e4: 1.0000535021715735},
}


def _pigou_oracle(beta, t):
    c_ne = min(t, 1.0) ** (beta + 1) + max(t - 1.0, 0.0)
    res = optimize.minimize_scalar(
        lambda x: x ** (beta + 1) + (t - x), bounds=(0.0, t), method="bounded", options={"xatol": 1e-12}
    )
    return c_ne / min(res.fun, t, t ** (beta + 1))


@pytest.mark.parametrize("beta", sorted(PIGOU_ORACLE))
def test_frozen_pigou_values_match_oracle(beta):
    for t, poa in PIGOU_ORACLE[beta].items():
        assert _pigou_oracle(beta, t) == pytest.approx(poa, rel=1e-9)


@pytest.mark.parametrize("beta", sorted(PIGOU_ORACLE))
def test_pigou_closed_form(beta):
    # the numerical oracle resolves C_SO to ~1e-7 absolute at t = 1e4
    for t, poa in PIGOU_ORACLE[beta].items():
        assert pigou_poa(beta, t) == pytest.approx(poa, rel=1e-9)


def test_pigou_examples():
    assert pigou_poa(1.0, 1.0) == pytest.approx(4 / 3, rel=1e-15)
    assert pigou_poa(4.0, 2.0) == pytest.approx(2 / (2 - 5 ** -0.25 * 0.8), rel=1e-15)
    assert pigou_poa(4.0, 1e4) - 1 == pytest.approx(5.35e-5, rel=1e-3)
    with pytest.raises(ValueError):
        pigou_poa(0.0, 1.0)


def test_alternate_pigou_formula_disagrees():
    assert pigou_poa_alternate(1.0, 1.0) == 1.0
    alternate, derived, disagree = pigou_formula_check(1.0, 1.0)
    assert disagree and derived == pytest.approx(4 / 3)


def test_run_sweep_pigou():
    rows = run_sweep(fixtures.pigou(4.0), SweepSpec(ONE, (0.5, 1.0, 10.0, 100.0), TIGHT))
    assert [r.t for r in rows] == [0.5, 1.0, 10.0, 100.0]
    for r in rows:
        assert r.ok
        assert r.poa == pytest.approx(PIGOU_ORACLE[4.0][r.t], rel=2e-3)
        assert r.poa == pytest.approx(pigou_poa(4.0, r.t), rel=1e-9)


def test_run_sweep_two_link_single_row():
    (row,) = run_sweep(fixtures.two_link(), SweepSpec(ONE, (3.0,), TIGHT, beta_ref=1.0))
    assert row.poa == pytest.approx(6 / 5.875, abs=1e-6)
    assert row.ratio_ne == pytest.approx(6 / 9, rel=1e-8)
    assert row.dist_gap == pytest.approx(1 / 12, rel=1e-7)


def test_well_designed_game_has_no_anarchy():
    rows = run_sweep(fixtures.monomial_pair(4.0), SweepSpec(ONE, log_grid(0.1, 1e4, 6), TIGHT))
    assert all(abs(r.poa - 1) <= 5e-4 for r in rows)


def test_sweep_parallel_matches_sequential():
    spec = SweepSpec(ONE, (1.0, 10.0, 100.0), TIGHT)
    seq = run_sweep(fixtures.two_link_bpr(4.0), spec)
    par = run_sweep(fixtures.two_link_bpr(4.0), spec, jobs=2)
    assert [(r.t, r.c_ne, r.c_so) for r in seq] == [(r.t, r.c_ne, r.c_so) for r in par]


def test_sweep_spec_rejects_bad_grids():
    for grid in ((), (1.0, 1.0), (-1.0, 2.0)):
        with pytest.raises(ValueError):
            SweepSpec(ONE, grid)


def test_build_limit_game():
    game = build_limit_game(fixtures.diamond(), Distribution((0.7, 0.3)), 4.0)
    expected = [a.cost.gamma for a in fixtures.diamond().network.arcs]
    assert game.gammas == pytest.approx(expected, rel=1e-15)
    assert game.instance.demands.tolist() == [0.7, 0.3]
    assert build_limit_game(fixtures.pigou(4.0), ONE, 4.0).gammas == (1.0, 0.0)
    with pytest.raises(LimitGameError):
        build_limit_game(fixtures.two_od_parallel((1.0, 1.0)), Distribution((0.5, 0.5)), 1.0)


def test_limit_ratio_examples():
    assert limit_ratio(fixtures.pigou(4.0), ONE, 4.0) == 0.0
    assert limit_ratio(fixtures.two_link_bpr(4.0), ONE, 4.0) == pytest.approx(0.0625, rel=1e-9)
    net = Network.build(2, [(0, 1, BPR(10.0, 100.0, 0.15, 4.0))])
    single = Instance(net, (ODPair(0, 1, 1.0),))
    assert limit_ratio(single, ONE, 4.0) == pytest.approx(1.5e-8, rel=1e-12)


def _row(t, poa, gap=0.0):
    nan = math.nan
    return SweepRow(t, nan, nan, poa, nan, nan, nan, gap, gap)


def test_decay_exponent_pigou():
    rows = run_sweep(fixtures.pigou(4.0), SweepSpec(ONE, log_grid(10.0, 1e4, 13), TIGHT))
    assert decay_exponent(rows) == pytest.approx(-1.0, abs=0.15)


def test_decay_exponent_two_link_linear():
    rows = run_sweep(fixtures.two_link_bpr(1.0), SweepSpec(ONE, log_grid(10.0, 1e3, 9), TIGHT, beta_ref=1.0))
    assert decay_exponent(rows) <= -1 + 0.3


def test_decay_exponent_synthetic_and_noise():
    rows = [_row(t, 1 + 3 * t**-2.5) for t in log_grid(1, 1e3, 10)]
    assert decay_exponent(rows, tail_fraction=1.0) == pytest.approx(-2.5, abs=1e-9)
    with pytest.raises(TooFewPointsError):
        decay_exponent([_row(t, 1 + 1e-12, gap=1e-10) for t in log_grid(1, 1e3, 10)])


def test_saturation_point():
    rows = [_row(float(i + 1), p) for i, p in enumerate((1.11, 1.13, 1.02, 1.002, 1.0005))]
    assert saturation_point(rows, 0.01) == 4.0
    assert saturation_point(rows[:3], 0.01) is None


def test_distribution_gap():
    inst = fixtures.two_link(3.0)
    ne = solve(inst, SolveOptions(Objective.UE, 1e-10)).profile
    so = solve(inst, SolveOptions(Objective.SO, 1e-10)).profile
    assert distribution_gap(ne, so, 3.0) == pytest.approx(abs(2 / 3 - 1.75 / 3), rel=1e-8)
    assert distribution_gap(ne, ne, 3.0) == 0.0
    big = fixtures.two_link_bpr(4.0, 1e3)
    ne = solve(big, SolveOptions(Objective.UE, 1e-10)).profile
    so = solve(big, SolveOptions(Objective.SO, 1e-10)).profile
    assert distribution_gap(ne, so, 1e3) <= 5e-3


def test_helpers():
    assert log_grid(10, 1e4, 4) == pytest.approx((10, 100, 1e3, 1e4))
    rows = [_row(t, 1.0) for t in (1.0, 50.0, 100.0, 1e3)]
    assert [r.t for r in top_decade(rows)] == [100.0, 1e3]
    assert spread([2.0, 4.0, 8.0]) == 4.0
    assert spread([0.0, 1.0]) == math.inf


def test_pigou_detection():
    assert pigou_beta(fixtures.pigou(2.5)) == 2.5
    assert pigou_beta(fixtures.two_link()) is None
    mono = Network.build(2, [(0, 1, Polynomial(((2.0, 4.0),))), (0, 1, Polynomial(((1.0, 0.0),)))])
    assert pigou_beta(Instance(mono, (ODPair(0, 1, 1.0),))) is None
