"""Closed-form arithmetic and qualitative properties of the capacity model."""

import dataclasses

import numpy as np
import pytest

from skyfed.capacity import (
    CapacityError,
    ModelParams,
    federation_utility,
    inflation_crossover,
    level0_volume,
    level1_volume,
    provision,
    yearly_outlay,
)


def test_level0_arithmetic():
    p = ModelParams(R=1.0)
    assert level0_volume(p, 5) == 5.0
    assert level0_volume(p, 0) == 0.0
    assert level0_volume(p, 4) == 2 * level0_volume(p, 2)


def test_level1_arithmetic_exact():
    p = ModelParams(R=1.0, rho=0.1)
    # .1 + .2 + .3 + .4 + .5
    assert level1_volume(p, 5) == pytest.approx(1.5, abs=0)
    assert level1_volume(p, 1) == pytest.approx(0.1, abs=0)
    assert level1_volume(p, 0) == 0.0


def test_out_of_range_year():
    p = ModelParams(horizon=10)
    with pytest.raises(CapacityError):
        level0_volume(p, 11)
    with pytest.raises(CapacityError):
        level1_volume(p, -1)


def test_param_validation():
    with pytest.raises(CapacityError):
        ModelParams(rho=0.0)
    with pytest.raises(CapacityError):
        ModelParams(price_decline=1.0)
    with pytest.raises(CapacityError):
        ModelParams(depreciation_years=0)


def test_inflation_crossover_and_monotone_ratio():
    p = ModelParams(R=1.0, rho=0.1, P=10, horizon=20)
    assert inflation_crossover(p) == 2
    ratios = [
        p.P * level1_volume(p, t) / level0_volume(p, t) for t in range(1, 21)
    ]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_projection_first_year_and_invariants():
    p = ModelParams(R=2.0, rho=0.1, P=10, p0=3.0, horizon=8)
    proj = yearly_outlay(p)
    first = proj.rows[0]
    assert first.capacity_bought == pytest.approx(
        level0_volume(p, 1) + p.P * level1_volume(p, 1)
    )
    assert first.outlay == pytest.approx(first.capacity_bought * p.p0)
    lvl0 = [r.level0_cum for r in proj.rows]
    lvl1 = [r.level1_cum for r in proj.rows]
    assert lvl0 == sorted(lvl0) and lvl1 == sorted(lvl1)
    for r in proj.rows:
        assert r.outlay == pytest.approx(r.capacity_bought * r.unit_price)
    total = sum(r.capacity_bought for r in proj.rows)
    final_demand = lvl0[-1] + p.P * lvl1[-1]
    assert total >= final_demand - 1e-9


def test_peak_shift_on_sweep():
    """Adding data inflation never moves the outlay peak earlier; >= 100
    parameter points."""
    count = 0
    for R in (0.5, 1.0, 2.0, 5.0):
        for decline in (0.3, 0.45, 0.6, 0.75):
            for dep in (2, 3, 4):
                for rho in (0.05, 0.1, 0.2):
                    base = ModelParams(
                        R=R, rho=rho, P=0, price_decline=decline,
                        depreciation_years=dep, horizon=15,
                    )
                    inflated = dataclasses.replace(base, P=10)
                    assert (
                        yearly_outlay(inflated).peak_year()
                        >= yearly_outlay(base).peak_year()
                    )
                    count += 1
    assert count >= 100


def test_monthly_steps_agree_on_cumulative_volumes():
    p = ModelParams(R=1.0, rho=0.1, P=10, horizon=6)
    yearly = yearly_outlay(p, step_years=1.0)
    monthly = yearly_outlay(p, step_years=1.0 / 12.0)
    # every 12th monthly row lands on a year boundary with the same volumes
    for k, row in enumerate(yearly.rows):
        mrow = monthly.rows[(k + 1) * 12 - 1]
        assert mrow.year == pytest.approx(row.year)
        assert mrow.level0_cum == pytest.approx(row.level0_cum)
        assert mrow.level1_cum == pytest.approx(row.level1_cum)


def test_non_recursive_replacement_flag():
    p = ModelParams(R=1.0, rho=0.1, P=0, horizon=12, recursive_replacement=False)
    q = dataclasses.replace(p, recursive_replacement=True)
    flat = yearly_outlay(p)
    compound = yearly_outlay(q)
    # recursive replacement can only buy more, never less
    for a, b in zip(flat.rows, compound.rows):
        assert b.capacity_bought >= a.capacity_bought - 1e-12


def test_provision_rule():
    rng = np.random.default_rng(3)
    assert provision(1.0) == (6.0, (2, 3))
    assert provision(0.0)[0] == 0.0
    assert provision(10.0)[0] == 60.0
    for x in rng.uniform(0, 1e6, 50):
        amount, (a, b) = provision(float(x))
        assert amount == pytest.approx(6 * x) and (a, b) == (2, 3)
    with pytest.raises(CapacityError):
        provision(-1.0)


def test_federation_utility():
    assert federation_utility(1) == 0
    assert federation_utility(2) == 2
    assert federation_utility(10) == 90
    with pytest.raises(CapacityError):
        federation_utility(-1)


def test_csv_deterministic():
    p = ModelParams()
    a = yearly_outlay(p).to_csv()
    b = yearly_outlay(p).to_csv()
    assert a == b
    assert a.splitlines()[0] == "year,level0_cum,level1_cum,capacity_bought,unit_price,outlay"
