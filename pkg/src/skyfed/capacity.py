"""Archive economics: level-0/level-1 storage growth, the data-inflation
effect, yearly hardware outlay under a steady price decline, the 6x
provisioning rule, and the n(n-1) federation-utility count.

All functions are deterministic pure functions of their parameters."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    R: float = 1.0  # level-0 arrival rate, TB/year
    rho: float = 0.1  # derived-product size as a fraction of level 0
    P: int = 10  # number of derived products
    price_decline: float = 0.6  # fractional price improvement per year
    p0: float = 1.0  # price per TB in year 1, arbitrary currency
    depreciation_years: int = 3
    horizon: int = 10
    recursive_replacement: bool = True

    def __post_init__(self):
        if not 0 < self.rho <= 1:
            raise CapacityError(f"rho {self.rho} outside (0, 1]")
        if not 0 <= self.price_decline < 1:
            raise CapacityError(f"price_decline {self.price_decline} outside [0, 1)")
        if self.depreciation_years < 1:
            raise CapacityError("depreciation_years must be >= 1")
        if self.R < 0 or self.P < 0 or self.p0 < 0 or self.horizon < 0:
            raise CapacityError("R, P, p0 and horizon must be non-negative")


@dataclass(frozen=True)
class ProjectionRow:
    year: float
    level0_cum: float
    level1_cum: float
    capacity_bought: float
    unit_price: float
    outlay: float


@dataclass(frozen=True)
class Projection:
    params: ModelParams
    rows: tuple[ProjectionRow, ...] = field(default=())

    def peak_year(self) -> float:
        """Year of maximum outlay (earliest such year on ties)."""
        best = max(self.rows, key=lambda r: (r.outlay, -r.year))
        return best.year

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["year", "level0_cum", "level1_cum", "capacity_bought", "unit_price", "outlay"]
        )
        for r in self.rows:
            w.writerow(
                [r.year, r.level0_cum, r.level1_cum, r.capacity_bought, r.unit_price, r.outlay]
            )
        return buf.getvalue()


def level0_volume(params: ModelParams, t: float) -> float:
    """Raw archive volume after t years: arrival rate times elapsed time."""
    if not 0 <= t <= params.horizon:
        raise CapacityError(f"t {t} outside [0, {params.horizon}]")
    return params.R * t


def level1_volume(params: ModelParams, t: float) -> float:
    """One derived product's cumulative volume: every year reprocesses the
    full raw archive at fraction rho, and every edition stays published, so
    after t years the product holds rho*R*(1 + 2 + ... + t) = rho*R*t(t+1)/2."""
    if not 0 <= t <= params.horizon:
        raise CapacityError(f"t {t} outside [0, {params.horizon}]")
    return params.rho * params.R * t * (t + 1) / 2.0


def _demand(params: ModelParams, t: float) -> float:
    return level0_volume(params, t) + params.P * level1_volume(params, t)


def yearly_outlay(params: ModelParams, step_years: float = 1.0) -> Projection:
    """Project hardware purchases over the horizon.

    Each step buys the demand growth since the last step plus replacement of
    capacity bought one depreciation period ago; with recursive replacement
    on (the default), replacement purchases are themselves replaced when
    they age out. Unit price declines by `price_decline` per year from p0."""
    if step_years <= 0:
        raise CapacityError("step_years must be positive")
    n_steps = int(round(params.horizon / step_years))
    bought: list[float] = []
    rows: list[ProjectionRow] = []
    dep_steps = int(round(params.depreciation_years / step_years))
    prev_demand = 0.0
    for k in range(1, n_steps + 1):
        t = k * step_years
        demand = _demand(params, t)
        replacement = 0.0
        if k - dep_steps >= 1:
            if params.recursive_replacement:
                replacement = bought[k - dep_steps - 1]
            else:
                # replace only the original growth purchase, not prior replacements
                told = (k - dep_steps) * step_years
                tprev = told - step_years
                replacement = max(0.0, _demand(params, told) - _demand(params, tprev))
        growth = max(0.0, demand - prev_demand)
        capacity = growth + replacement
        unit_price = params.p0 * (1.0 - params.price_decline) ** (t - 1.0)
        rows.append(
            ProjectionRow(
                year=t,
                level0_cum=level0_volume(params, t),
                level1_cum=level1_volume(params, t),
                capacity_bought=capacity,
                unit_price=unit_price,
                outlay=capacity * unit_price,
            )
        )
        bought.append(capacity)
        prev_demand = demand
    return Projection(params=params, rows=tuple(rows))


def provision(requirement: float) -> tuple[float, tuple[int, int]]:
    """Capacity to buy for a given working requirement: six times it.

    Factor 2 keeps redundant copies; factor 3 holds the production version,
    the one being built, and intermediates."""
    if requirement < 0:
        raise CapacityError("requirement must be non-negative")
    safety, versions = 2, 3
    return float(requirement) * safety * versions, (safety, versions)


def federation_utility(n: int) -> int:
    """Ordered dataset-pair comparisons enabled by federating n datasets."""
    if n < 0:
        raise CapacityError("dataset count must be non-negative")
    return n * (n - 1)


def inflation_crossover(params: ModelParams) -> int | None:
    """First year where derived products outweigh the raw archive, if any."""
    for t in range(1, params.horizon + 1):
        if params.P * level1_volume(params, t) > level0_volume(params, t):
            return t
    return None
