"""Regional damage functions refit to a pure quadratic.

The source regional functions have a linear and a quadratic term in
warming (coefficients in percent of GDP).  A damage engine built around
warming moments wants the pure quadratic form, so the linear term is folded
into an adjusted quadratic coefficient by least squares over a 0..6 degC
evaluation grid.  With a plain (unweighted) grid T_k the fit has the closed
form

    alpha_fit = alpha + gamma * sum(T^3) / sum(T^4)

since only the quadratic basis column is being fit to gamma*T + alpha*T^2.
Regions with gamma = 0 come back unchanged.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .climatology import WarmingMoments
from .errors import ComputationError, ValidationError

REGIONS = (
    "US", "WEU", "JAPAN", "RUSSIA", "EURASIA", "CHINA",
    "INDIA", "MEAST", "AFRICA", "LAM", "OHI", "OASIA",
)

# (gamma, alpha): percent of GDP per degC and per degC^2
_RICE_COEFFS = {
    "US":      (0.0,    0.1414),
    "WEU":     (0.0,    0.1591),
    "JAPAN":   (0.0,    0.1617),
    "RUSSIA":  (0.0,    0.1151),
    "EURASIA": (0.0,    0.1305),
    "CHINA":   (0.0785, 0.1259),
    "INDIA":   (0.4385, 0.1689),
    "MEAST":   (0.2780, 0.1586),
    "AFRICA":  (0.3410, 0.1983),
    "LAM":     (0.0609, 0.1345),
    "OHI":     (0.0,    0.1564),
    "OASIA":   (0.1755, 0.1734),
}

DEFAULT_FIT_GRID = np.arange(0.0, 7.0)


@dataclass(frozen=True)
class RegionalParams:
    """One region's damage coefficients, percent of GDP units."""

    region: str
    gamma: float       # % GDP per degC
    alpha: float       # % GDP per degC^2
    alpha_fit: float   # % GDP per degC^2, linear term folded in

    def loss_fraction(self, mean_sq: float, ref_mean_sq: float = 0.0) -> float:
        """GDP fraction lost at the given warming mean square."""
        return self.alpha_fit / 100.0 * (mean_sq - ref_mean_sq)


def fit_quadratic(gamma: float, alpha: float, grid=None) -> float:
    """Fold gamma*T + alpha*T^2 into a pure quadratic over the grid.

    Least squares with basis {T^2} alone; closed form
    alpha + gamma * sum(T^3)/sum(T^4).
    """
    grid = DEFAULT_FIT_GRID if grid is None else np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValidationError("fit_quadratic: empty evaluation grid")
    s4 = float(np.sum(grid ** 4))
    if s4 == 0.0:
        raise ComputationError("fit_quadratic: degenerate all-zero grid")
    return alpha + gamma * float(np.sum(grid ** 3)) / s4


def builtin_regional_params(grid=None) -> dict[str, RegionalParams]:
    """The bundled 12-region table with refit quadratic coefficients."""
    out = {}
    for region in REGIONS:
        gamma, alpha = _RICE_COEFFS[region]
        out[region] = RegionalParams(
            region=region,
            gamma=gamma,
            alpha=alpha,
            alpha_fit=fit_quadratic(gamma, alpha, grid),
        )
    return out


def load_regional_params(path, grid=None) -> dict[str, RegionalParams]:
    """Read a (region,gamma,alpha) CSV and refit; percent-of-GDP units."""
    path = Path(path)
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["region", "gamma", "alpha"]:
            raise ValidationError(f"{path.name}: bad header {header}")
        for row in reader:
            if len(row) != 3:
                raise ValidationError(f"{path.name}: expected 3 columns")
            region = row[0].strip()
            if region in out:
                raise ValidationError(f"{path.name}: duplicate region {region}")
            gamma, alpha = float(row[1]), float(row[2])
            out[region] = RegionalParams(
                region, gamma, alpha, fit_quadratic(gamma, alpha, grid)
            )
    if not out:
        raise ValidationError(f"{path.name}: empty regional table")
    return out


def regional_damage(
    params: RegionalParams,
    m: WarmingMoments,
    reference: WarmingMoments | None = None,
) -> float:
    """One region's loss fraction at the given warming moments."""
    ref_sq = 0.0
    if reference is not None:
        if reference.variant != m.variant:
            raise ValidationError(
                f"regional_damage: reference variant {reference.variant!r} "
                f"does not match {m.variant!r}"
            )
        ref_sq = reference.mean_sq
    return params.loss_fraction(m.mean_sq, ref_sq)


def harmonize_regions(
    regional_fractions: dict[str, float],
    regional_gdp: dict[str, float],
    global_fraction: float,
    global_gdp: float,
) -> dict[str, float]:
    """Scale regional currency losses to sum exactly to the global loss.

    Regional functions and the aggregate one are calibrated independently,
    so their currency losses need a common scale before regional shares are
    reported.  Every region's loss is multiplied by the same factor, which
    preserves the ratios between regions.

    Parameters
    ----------
    regional_fractions : region -> GDP fraction lost
        Must cover every region in ``regional_gdp`` and vice versa.
    regional_gdp : region -> GDP (any currency unit, all the same)
    global_fraction, global_gdp : the aggregate loss to match.

    Returns
    -------
    dict region -> currency loss, summing to global_fraction * global_gdp.
    """
    if set(regional_fractions) != set(regional_gdp):
        missing = set(regional_fractions) ^ set(regional_gdp)
        raise ValidationError(f"harmonize_regions: region mismatch {sorted(missing)}")
    if not regional_fractions:
        raise ValidationError("harmonize_regions: no regions")
    currency = {r: regional_fractions[r] * regional_gdp[r] for r in regional_fractions}
    total = sum(currency.values())
    target = global_fraction * global_gdp
    if total == 0.0:
        if target == 0.0:
            return {r: 0.0 for r in currency}
        raise ComputationError(
            "harmonize_regions: regional losses sum to zero but the global "
            "loss does not"
        )
    scale = target / total
    return {r: v * scale for r, v in currency.items()}
