"""Social cost of carbon under the four variability treatments.

A 1 GtC pulse perturbs the global warming path by a three-exponential
response curve.  For each year the engine prices baseline and perturbed
warming through the damage function, multiplies the marginal fraction by
GDP, discounts back to the pulse year, sums, and converts the total from
dollars per GtC to dollars per tonne of CO2.

The variability variants never need the perturbed field itself: projecting
a global anomaly g through a fitted pattern p scales every cell linearly,
so each spatial mean square is g^2 times a fixed slope statistic.  Those
statistics come precomputed in a PatternFactors table.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .climatology import SCOPES, PatternFactors
from .damages import DamageParams
from .economics import DiscountSpec, gdp_on
from .errors import ValidationError
from .grids import GdpTrajectory, GlobalSeries
from .regions import RegionalParams, harmonize_regions
from .sectors import HEMISPHERES, MonthlyCoefficients

TONNES_C_PER_GTC = 1.0e9
CO2_PER_C = 12.0 / 44.0   # dollars per tC -> dollars per tCO2


@dataclass(frozen=True)
class PulseResponse:
    """Three-exponential global temperature response to a 1 GtC pulse.

    response(t) = -(a1+a2+a3) + a1 e^{-(t-t0)/tau1}
                 + a2 e^{-(t-t0)/tau2} + a3 e^{-(t-t0)/tau3}

    in millikelvin per GtC; the response is zero at the pulse year t0 by
    construction and tends to -(a1+a2+a3) as t grows.
    """

    a1: float
    a2: float
    a3: float
    tau1: float
    tau2: float
    tau3: float
    t0: int = 2020

    def __post_init__(self):
        if min(self.tau1, self.tau2, self.tau3) <= 0.0:
            raise ValidationError("PulseResponse: time scales must be positive")

    @property
    def asymptote_mk(self) -> float:
        """Long-run warming per GtC, millikelvin."""
        return -(self.a1 + self.a2 + self.a3)


# Placeholder coefficients with the right shape (fast rise, gentle decline
# to about 1.75 mK per GtC).  Calibrate against a carbon-cycle emulator
# before quantitative use; every run reports the values it used.
DEFAULT_PULSE = PulseResponse(a1=-1.7, a2=-0.6, a3=0.55, tau1=2.5, tau2=12.0, tau3=80.0)


def pulse_response(years, pulse: PulseResponse) -> np.ndarray:
    """Warming added by the pulse in each year, degC per GtC."""
    years = np.asarray(years, dtype=np.float64)
    if np.any(years < pulse.t0):
        raise ValidationError(
            f"pulse_response: year before the pulse year {pulse.t0}"
        )
    s = years - pulse.t0
    mk = (
        -(pulse.a1 + pulse.a2 + pulse.a3)
        + pulse.a1 * np.exp(-s / pulse.tau1)
        + pulse.a2 * np.exp(-s / pulse.tau2)
        + pulse.a3 * np.exp(-s / pulse.tau3)
    )
    return mk * 1.0e-3


@dataclass(frozen=True)
class SccResult:
    """Social cost of carbon and how it was computed.

    value is in dollars per tonne CO2 (for whatever currency unit
    gdp_scale established); per_tc is the same total per tonne of carbon.
    breakdown, when present, maps sector or region names to their share of
    value.
    """

    value: float
    per_tc: float
    variant: str
    rate: float
    scenario: str = ""
    breakdown: dict[str, float] | None = None


def _variant_factor(
    variant: str,
    factors: PatternFactors | None,
    scope: str = "GLOBAL",
    month: int | None = None,
) -> float:
    """Multiplier turning the squared global anomaly into the variant's
    mean square under pattern scaling (1.0 when no pattern applies)."""
    if variant == "none" or factors is None:
        if variant in ("svar", "stvar"):
            raise ValidationError(
                f"variant {variant!r} needs a fitted scaling pattern"
            )
        return 1.0
    k = factors.scope_index(scope)
    if variant == "tvar":
        if month is None:
            f = float(np.mean(factors.mean_month[k] ** 2))
        else:
            f = float(factors.mean_month[k, month - 1] ** 2)
    elif variant == "svar":
        f = float(factors.meansq_annual_mean[k])
    elif variant == "stvar":
        if month is None:
            f = float(np.mean(factors.meansq_month[k]))
        else:
            f = float(factors.meansq_month[k, month - 1])
    else:
        raise ValidationError(f"unknown variant {variant!r}")
    if not np.isfinite(f):
        raise ValidationError(f"pattern carries no cells for scope {scope!r}")
    return f


def _marginal_meansq(
    series: GlobalSeries,
    years: np.ndarray,
    delta: np.ndarray,
    variant: str,
    factors: PatternFactors | None,
    scope: str = "GLOBAL",
    month: int | None = None,
) -> np.ndarray:
    """Perturbed minus baseline mean square of warming, per year."""
    sub = series.year_slice(int(years[0]), int(years[-1]))
    if variant == "tvar" and factors is None and series.frequency == "monthly":
        # no pattern, but the series itself resolves months
        vals = sub.values if month is None else sub.values[:, [month - 1]]
        base = (vals ** 2).mean(axis=1)
        pert = ((vals + delta[:, None]) ** 2).mean(axis=1)
        return pert - base
    g = sub.annual_values()
    factor = _variant_factor(variant, factors, scope, month)
    return ((g + delta) ** 2 - g ** 2) * factor


def _common_setup(series, horizon, pulse, rate):
    start, end = int(horizon[0]), int(horizon[1])
    if end < start:
        raise ValidationError(f"scc: empty horizon {start}..{end}")
    if start < pulse.t0:
        raise ValidationError(
            f"scc: horizon starts {start}, before the pulse year {pulse.t0}"
        )
    years = np.arange(start, end + 1, dtype=np.int64)
    delta = pulse_response(years, pulse)
    discount = DiscountSpec(rate=rate, base_year=pulse.t0)
    return years, delta, discount.factor(years)


def scc(
    series: GlobalSeries,
    *,
    variant: str,
    gdp: GdpTrajectory,
    rate: float,
    params: DamageParams = DamageParams(),
    pulse: PulseResponse = DEFAULT_PULSE,
    factors: PatternFactors | None = None,
    horizon: tuple[int, int] = (2020, 2100),
    gdp_scale: float = 1.0,
    scenario: str = "",
) -> SccResult:
    """Aggregate social cost of carbon for one variant and discount rate.

    Parameters
    ----------
    series : GlobalSeries
        Baseline global anomaly path covering the horizon.
    variant : {"none", "tvar", "svar", "stvar"}
        The spatial variants need ``factors``; "tvar" uses them too when
        given, or falls back to a monthly series, or degenerates to "none".
    gdp : GdpTrajectory
        Global GDP; sparse paths are interpolated to annual.
    rate : float
        Constant discount rate; discounting starts at the pulse year.
    gdp_scale : float
        Dollars per GDP unit (1e9 when GDP is in billions).
    """
    years, delta, disc = _common_setup(series, horizon, pulse, rate)
    dmsq = _marginal_meansq(series, years, delta, variant, factors)
    marginal = params.alpha * dmsq * gdp_on(gdp, years) * gdp_scale
    total = float(np.sum(marginal * disc))
    per_tc = total / TONNES_C_PER_GTC
    return SccResult(
        value=per_tc * CO2_PER_C,
        per_tc=per_tc,
        variant=variant,
        rate=rate,
        scenario=scenario,
    )


def scc_by_sector(
    series: GlobalSeries,
    *,
    variant: str,
    gdp: GdpTrajectory,
    rate: float,
    coeffs: MonthlyCoefficients,
    params: DamageParams = DamageParams(),
    pulse: PulseResponse = DEFAULT_PULSE,
    factors: PatternFactors | None = None,
    horizon: tuple[int, int] = (2020, 2100),
    gdp_scale: float = 1.0,
    scenario: str = "",
) -> SccResult:
    """SCC split over sectors via the monthly, hemisphere-aware
    coefficients.

    The pulse increment lands on the annual global series; the pattern's
    per-month hemisphere statistics distribute it over the 24 slots.  The
    reported value is the sum over sectors, which differs slightly from the
    aggregate ``scc`` because the monthly coefficients weight months
    unevenly.
    """
    years, delta, disc = _common_setup(series, horizon, pulse, rate)
    n_years = years.size
    dmsq = np.empty((n_years, 12, len(HEMISPHERES)))
    for h, hemi in enumerate(HEMISPHERES):
        scope = hemi if factors is not None else "GLOBAL"
        for month in range(1, 13):
            dmsq[:, month - 1, h] = _marginal_meansq(
                series, years, delta, variant, factors, scope, month
            )
    c2 = params.c * params.c
    # (years, month, hemi) x (month, sector, hemi) -> (years, sector)
    frac = np.einsum("tlh,ljh->tj", dmsq, coeffs.coeff) / c2
    currency = frac * (gdp_on(gdp, years) * gdp_scale)[:, None]
    per_sector = currency.T @ disc / TONNES_C_PER_GTC * CO2_PER_C
    breakdown = {s: float(v) for s, v in zip(coeffs.sectors, per_sector)}
    total = float(per_sector.sum())
    return SccResult(
        value=total,
        per_tc=total / CO2_PER_C,
        variant=variant,
        rate=rate,
        scenario=scenario,
        breakdown=breakdown,
    )


def scc_by_region(
    series: GlobalSeries,
    *,
    variant: str,
    gdp: GdpTrajectory,
    regional_params: dict[str, RegionalParams],
    regional_gdp: dict[str, GdpTrajectory],
    rate: float,
    params: DamageParams = DamageParams(),
    pulse: PulseResponse = DEFAULT_PULSE,
    factors: PatternFactors | None = None,
    horizon: tuple[int, int] = (2020, 2100),
    gdp_scale: float = 1.0,
    scenario: str = "",
) -> SccResult:
    """SCC split over regions, harmonized year by year so the regional
    currency losses sum exactly to the aggregate ones.

    All regional damage functions read the same global warming moments;
    what differs is each region's quadratic coefficient and GDP path.
    """
    if set(regional_params) != set(regional_gdp):
        missing = set(regional_params) ^ set(regional_gdp)
        raise ValidationError(f"scc_by_region: region mismatch {sorted(missing)}")
    years, delta, disc = _common_setup(series, horizon, pulse, rate)
    dmsq = _marginal_meansq(series, years, delta, variant, factors)
    global_frac = params.alpha * dmsq
    global_gdp_t = gdp_on(gdp, years) * gdp_scale
    regions = sorted(regional_params)
    gdp_t = {r: gdp_on(regional_gdp[r], years) * gdp_scale for r in regions}

    totals = dict.fromkeys(regions, 0.0)
    for i, year in enumerate(years):
        fractions = {
            r: regional_params[r].alpha_fit / 100.0 * dmsq[i] for r in regions
        }
        scaled = harmonize_regions(
            fractions,
            {r: gdp_t[r][i] for r in regions},
            global_frac[i],
            global_gdp_t[i],
        )
        for r in regions:
            totals[r] += scaled[r] * disc[i]

    breakdown = {
        r: totals[r] / TONNES_C_PER_GTC * CO2_PER_C for r in regions
    }
    total = float(np.sum(global_frac * global_gdp_t * disc))
    per_tc = total / TONNES_C_PER_GTC
    return SccResult(
        value=per_tc * CO2_PER_C,
        per_tc=per_tc,
        variant=variant,
        rate=rate,
        scenario=scenario,
        breakdown=breakdown,
    )
