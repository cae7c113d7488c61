"""GDP interpolation, discounting, and present-value accounting.

Losses are GDP fractions per year; multiplying by that year's GDP gives a
currency loss, and discounting runs at a constant rate from a base year
with the end-of-year convention (the base year itself is undiscounted).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ValidationError
from .grids import GdpTrajectory


@dataclass(frozen=True)
class DiscountSpec:
    """Constant annual discount rate from a base year."""

    rate: float = 0.04
    base_year: int = 2020

    def __post_init__(self):
        if self.rate <= -1.0:
            raise ValidationError("DiscountSpec: rate must exceed -100%")

    def factor(self, years) -> np.ndarray:
        """1 / (1+r)^(t - base) for each year t."""
        years = np.asarray(years, dtype=np.int64)
        return (1.0 + self.rate) ** -(years - self.base_year).astype(np.float64)


def interpolate_gdp(traj: GdpTrajectory) -> GdpTrajectory:
    """Linearly interpolate a sparse GDP path (say, five-year points) to an
    annual one over the same span."""
    if traj.years.size < 2:
        raise ValidationError(
            f"interpolate_gdp[{traj.region}]: need at least two points"
        )
    years = np.arange(traj.years[0], traj.years[-1] + 1, dtype=np.int64)
    values = np.interp(years, traj.years, traj.values)
    return GdpTrajectory(traj.region, years, values)


def gdp_on(traj: GdpTrajectory, years) -> np.ndarray:
    """Annual GDP values for the requested years, interpolating sparse
    trajectories; errors on a coverage gap."""
    years = np.asarray(years, dtype=np.int64)
    if years.size == 0:
        raise ValidationError("gdp_on: no years requested")
    if years[0] < traj.years[0] or years[-1] > traj.years[-1]:
        raise ValidationError(
            f"gdp_on[{traj.region}]: years {years[0]}..{years[-1]} outside "
            f"GDP coverage {traj.years[0]}..{traj.years[-1]}"
        )
    annual = traj if traj.years.size == (traj.years[-1] - traj.years[0] + 1) else interpolate_gdp(traj)
    idx = years - annual.years[0]
    return annual.values[idx]


@dataclass(frozen=True)
class PresentValue:
    """A discounted total plus the metadata that makes it comparable."""

    value: float
    rate: float
    base_year: int
    window: tuple[int, int]
    variant: str = ""


def pv_rows(
    losses: Mapping[int, float],
    gdp: GdpTrajectory,
    discount: DiscountSpec,
    window: tuple[int, int],
) -> list[tuple[int, float, float, float]]:
    """Per-year accounting rows (year, fraction, currency, discounted).

    The loss mapping and the GDP path must both cover every year of the
    inclusive window.
    """
    start, end = int(window[0]), int(window[1])
    if end < start:
        raise ValidationError(f"pv_rows: empty window {start}..{end}")
    years = np.arange(start, end + 1)
    missing = [int(y) for y in years if int(y) not in losses]
    if missing:
        raise ValidationError(f"pv_rows: losses missing years {missing[:5]}")
    fractions = np.array([losses[int(y)] for y in years], dtype=np.float64)
    gdp_values = gdp_on(gdp, years)
    currency = fractions * gdp_values
    discounted = currency * discount.factor(years)
    return [
        (int(y), float(f), float(c), float(d))
        for y, f, c, d in zip(years, fractions, currency, discounted)
    ]


def present_value(
    losses: Mapping[int, float],
    gdp: GdpTrajectory,
    discount: DiscountSpec,
    window: tuple[int, int],
    variant: str = "",
) -> PresentValue:
    """Discounted sum of yearly currency losses over the window."""
    rows = pv_rows(losses, gdp, discount, window)
    total = float(np.sum([r[3] for r in rows]))
    return PresentValue(
        value=total,
        rate=discount.rate,
        base_year=discount.base_year,
        window=(int(window[0]), int(window[1])),
        variant=variant,
    )


def avoided_losses(reference: PresentValue, policy: PresentValue) -> float:
    """Present value saved by the policy path: reference minus policy.

    Both sides must have been discounted the same way over the same window;
    comparing mismatched accountings is refused.
    """
    if (
        reference.rate != policy.rate
        or reference.base_year != policy.base_year
        or reference.window != policy.window
    ):
        raise ValidationError(
            "avoided_losses: discounting metadata differs between the two sides"
        )
    return reference.value - policy.value
