"""Sector-level damage coefficients at seasonal and monthly resolution.

The aggregate quadratic splits into 15 enumerative sectors.  Each sector's
calibration impact is spread over the four seasons by fixed weights, and
each season's coefficient is spread over its three months and the two
hemispheres by GDP share.  Seasons are meteorological and hemisphere-aware:
what is summer in the north is winter in the south, so the southern month
map is the northern one shifted by two seasons.

Sign convention: impacts are stored as the GDP fraction LOST at the
calibration warming, so benefits (time use) are negative.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .climatology import WarmingMoments
from .damages import DamageParams
from .errors import ValidationError
from .grids import MONTHS_PER_YEAR

SECTORS = (
    "Agriculture",
    "Forestry",
    "Energy",
    "Water",
    "Coastal defense",
    "Dryland",
    "Wetland",
    "Ecosystem",
    "Health",
    "Air pollution",
    "Time use",
    "Settlements",
    "Catastrophe",
    "Migration",
    "Amenity",
)

SEASONS = ("spring", "summer", "fall", "winter")

HEMISPHERES = ("NH", "SH")

# Percent of GDP lost at the 2.5 degC calibration point, per source study
# and their average; negative entries are benefits.
_IMPACT_PCT = {
    "fankhauser": (0.20, 0.01, 0.12, 0.24, 0.00, 0.07, 0.16, 0.21, 0.26,
                   0.08, -0.29, 0.17, 0.01, 0.02, 0.33),
    "berz":       (0.17, 0.01, 0.12, 0.24, 0.03, 0.09, 0.16, 0.24, 0.35,
                   0.08, -0.29, 0.17, 0.03, 0.09, 0.33),
    "tol":        (0.22, 0.01, 0.12, 0.24, 0.04, 0.05, 0.16, 0.16, 0.51,
                   0.08, -0.29, 0.17, 0.68, 0.04, 0.33),
    "nordhaus":   (0.06, 0.01, 0.12, 0.24, 0.06, 0.09, 0.16, 0.19, 0.40,
                   0.08, -0.29, 0.17, 0.36, 0.07, 0.33),
    "average":    (0.16, 0.01, 0.12, 0.24, 0.03, 0.08, 0.16, 0.20, 0.38,
                   0.08, -0.29, 0.17, 0.27, 0.06, 0.33),
}

# Fraction of each sector's impact felt in (spring, summer, fall, winter).
_SEASON_WEIGHTS = {
    "Agriculture":     (0.25, 0.50, 0.25, 0.00),
    "Forestry":        (0.25, 0.50, 0.25, 0.00),
    "Energy":          (0.00, 0.50, 0.00, 0.50),
    "Water":           (0.00, 1.00, 0.00, 0.00),
    "Coastal defense": (0.25, 0.25, 0.25, 0.25),
    "Dryland":         (0.25, 0.25, 0.25, 0.25),
    "Wetland":         (0.25, 0.25, 0.25, 0.25),
    "Ecosystem":       (0.25, 0.25, 0.25, 0.25),
    "Health":          (0.00, 0.50, 0.00, 0.50),
    "Air pollution":   (0.00, 1.00, 0.00, 0.00),
    "Time use":        (0.00, 0.50, 0.00, 0.50),
    "Settlements":     (0.25, 0.25, 0.25, 0.25),
    "Catastrophe":     (0.25, 0.25, 0.25, 0.25),
    "Migration":       (0.25, 0.25, 0.25, 0.25),
    "Amenity":         (0.00, 0.50, 0.00, 0.50),
}

# 2005 hemisphere GDP, billion US dollars, used to split coefficients
NH_GDP_BUSD = 77_800.0
SH_GDP_BUSD = 9_470.0
WORLD_GDP_BUSD = 87_270.0
NH_GDP_SHARE = NH_GDP_BUSD / WORLD_GDP_BUSD
SH_GDP_SHARE = SH_GDP_BUSD / WORLD_GDP_BUSD

# Calendar month -> season index (spring=0, summer=1, fall=2, winter=3).
# North: DJF winter, MAM spring, JJA summer, SON fall; south shifted by two.
_NH_MONTH_SEASON = (3, 3, 0, 0, 0, 1, 1, 1, 2, 2, 2, 3)
_SH_MONTH_SEASON = tuple((s + 2) % 4 for s in _NH_MONTH_SEASON)
MONTH_SEASON = {"NH": _NH_MONTH_SEASON, "SH": _SH_MONTH_SEASON}


@dataclass(frozen=True)
class SectorCalibration:
    """Sector impacts (GDP fraction at the calibration warming, losses
    positive) and their seasonal spread weights."""

    sectors: tuple[str, ...]
    impacts: np.ndarray          # (nsec,) GDP fraction
    season_weights: np.ndarray   # (nsec, 4), rows sum to 1

    def __post_init__(self):
        impacts = np.asarray(self.impacts, dtype=np.float64)
        weights = np.asarray(self.season_weights, dtype=np.float64)
        n = len(self.sectors)
        if len(set(self.sectors)) != n:
            raise ValidationError("SectorCalibration: duplicate sector name")
        if impacts.shape != (n,):
            raise ValidationError("SectorCalibration: impacts shape mismatch")
        if weights.shape != (n, len(SEASONS)):
            raise ValidationError("SectorCalibration: weights shape mismatch")
        if not (np.all(np.isfinite(impacts)) and np.all(np.isfinite(weights))):
            raise ValidationError("SectorCalibration: non-finite entry")
        if np.any(weights < 0.0):
            raise ValidationError("SectorCalibration: negative season weight")
        if np.any(np.abs(weights.sum(axis=1) - 1.0) > 1e-9):
            raise ValidationError("SectorCalibration: season weights must sum to 1")
        object.__setattr__(self, "sectors", tuple(self.sectors))
        impacts = impacts.copy()
        weights = weights.copy()
        impacts.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "impacts", impacts)
        object.__setattr__(self, "season_weights", weights)

    @property
    def total_impact(self) -> float:
        return float(self.impacts.sum())


def builtin_calibration(study: str = "average") -> SectorCalibration:
    """The bundled 15-sector table for one source study or their average."""
    if study not in _IMPACT_PCT:
        raise ValidationError(
            f"unknown study {study!r}; choose from {sorted(_IMPACT_PCT)}"
        )
    impacts = np.array(_IMPACT_PCT[study]) / 100.0
    weights = np.array([_SEASON_WEIGHTS[s] for s in SECTORS])
    return SectorCalibration(SECTORS, impacts, weights)


def load_calibration(path) -> SectorCalibration:
    """Read a sector table: columns sector,impact,spring,summer,fall,winter
    with the impact in percent of GDP (losses positive)."""
    path = Path(path)
    sectors, impacts, weights = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["sector", "impact", "spring", "summer", "fall", "winter"]:
            raise ValidationError(f"{path.name}: bad header {header}")
        for row in reader:
            if len(row) != 6:
                raise ValidationError(f"{path.name}: expected 6 columns")
            sectors.append(row[0].strip())
            impacts.append(float(row[1]) / 100.0)
            weights.append([float(v) for v in row[2:6]])
    if not sectors:
        raise ValidationError(f"{path.name}: empty calibration")
    return SectorCalibration(tuple(sectors), np.array(impacts), np.array(weights))


def seasonal_params(calibration: SectorCalibration) -> np.ndarray:
    """Seasonal damage coefficients, shape (nsec, 4): impact x season weight.

    Rows sum back to the sector impacts; columns are the per-season damage
    shares of GDP at the calibration warming.
    """
    return calibration.impacts[:, None] * calibration.season_weights


@dataclass(frozen=True)
class MonthlyCoefficients:
    """Monthly, hemisphere-split sector coefficients.

    coeff[month, sector, hemisphere] is the GDP fraction lost at the
    calibration warming in that slot; NH is index 0.  Summing over months
    and hemispheres recovers the sector impacts exactly, because each
    season appears in three months at weight 1/3 and the two GDP shares
    sum to one.
    """

    sectors: tuple[str, ...]
    coeff: np.ndarray            # (12, nsec, 2)
    nh_share: float
    sh_share: float

    def __post_init__(self):
        coeff = np.asarray(self.coeff, dtype=np.float64)
        if coeff.shape != (MONTHS_PER_YEAR, len(self.sectors), len(HEMISPHERES)):
            raise ValidationError("MonthlyCoefficients: coeff shape mismatch")
        if not np.all(np.isfinite(coeff)):
            raise ValidationError("MonthlyCoefficients: non-finite coefficient")
        coeff = coeff.copy()
        coeff.flags.writeable = False
        object.__setattr__(self, "sectors", tuple(self.sectors))
        object.__setattr__(self, "coeff", coeff)

    def sector_totals(self) -> np.ndarray:
        return self.coeff.sum(axis=(0, 2))

    @property
    def total(self) -> float:
        return float(self.coeff.sum())


def monthly_params(
    calibration: SectorCalibration,
    nh_share: float = NH_GDP_SHARE,
    sh_share: float = SH_GDP_SHARE,
) -> MonthlyCoefficients:
    """Spread seasonal coefficients over months and hemispheres.

    Each hemisphere gets its GDP share of a season's coefficient, split
    evenly over the season's three months, with the southern season
    calendar shifted by half a year.
    """
    if nh_share < 0.0 or sh_share < 0.0:
        raise ValidationError("monthly_params: negative GDP share")
    if abs(nh_share + sh_share - 1.0) > 1e-12:
        raise ValidationError("monthly_params: GDP shares must sum to 1")
    seasonal = seasonal_params(calibration)            # (nsec, 4)
    shares = (nh_share, sh_share)
    coeff = np.empty((MONTHS_PER_YEAR, len(calibration.sectors), 2))
    for h, hemi in enumerate(HEMISPHERES):
        season_of = MONTH_SEASON[hemi]
        for month in range(MONTHS_PER_YEAR):
            coeff[month, :, h] = shares[h] * seasonal[:, season_of[month]] / 3.0
    return MonthlyCoefficients(calibration.sectors, coeff, nh_share, sh_share)


def monthly_damage(
    coeffs: MonthlyCoefficients,
    moments_by: dict[tuple[int, str], WarmingMoments],
    params: DamageParams = DamageParams(),
    references: dict[tuple[int, str], WarmingMoments] | None = None,
) -> np.ndarray:
    """Losses per (month, sector), GDP fraction.

    Parameters
    ----------
    coeffs : MonthlyCoefficients
    moments_by : mapping (month 1..12, "NH"|"SH") -> WarmingMoments
        One entry per slot; all entries must share a variant.
    params : DamageParams
        Supplies the calibration warming c that normalizes the quadratic.
    references : same mapping shape, optional
        Reference-window moments subtracted slot by slot; zero if omitted.

    Returns
    -------
    ndarray, shape (12, nsec)
    """
    c2 = params.c * params.c
    variants = set()
    delta = np.empty((MONTHS_PER_YEAR, len(HEMISPHERES)))
    for h, hemi in enumerate(HEMISPHERES):
        for month in range(1, MONTHS_PER_YEAR + 1):
            key = (month, hemi)
            if key not in moments_by:
                raise ValidationError(f"monthly_damage: missing moments for {key}")
            m = moments_by[key]
            variants.add(m.variant)
            ref_sq = 0.0
            if references is not None:
                if key not in references:
                    raise ValidationError(f"monthly_damage: missing reference for {key}")
                ref = references[key]
                variants.add(ref.variant)
                ref_sq = ref.mean_sq
            delta[month - 1, h] = m.mean_sq - ref_sq
    if len(variants) != 1:
        raise ValidationError(
            f"monthly_damage: mixed variants {sorted(variants)} across slots"
        )
    return np.einsum("ljh,lh->lj", coeffs.coeff, delta) / c2
