"""Climate damage functions with explicit temperature variability.

The package turns gridded or global temperature scenarios into warming
moments (mean, mean square, variance over space and time), prices them
through quadratic damage functions at aggregate, sectoral, and regional
resolution, and aggregates to present values and the social cost of carbon.
"""
from .climatology import (
    PatternFactors,
    PatternScaler,
    RollingClimatology,
    VARIANTS,
    WarmingMoments,
    anomalize,
    global_mean,
    moments,
    moments_from_stats,
    pattern_factors,
)
from .damages import DamageParams, DamageResult, damage, decompose
from .economics import (
    DiscountSpec,
    PresentValue,
    avoided_losses,
    interpolate_gdp,
    present_value,
    pv_rows,
)
from .errors import ComputationError, ValidationError
from .grids import (
    GdpTrajectory,
    GlobalSeries,
    GridField,
    area_weights,
    load_gdp,
    load_global_series,
    load_grid,
    save_gdp,
    save_global_series,
    save_grid,
)
from .regions import (
    REGIONS,
    RegionalParams,
    builtin_regional_params,
    fit_quadratic,
    harmonize_regions,
    load_regional_params,
    regional_damage,
)
from .scc import (
    CO2_PER_C,
    DEFAULT_PULSE,
    PulseResponse,
    SccResult,
    pulse_response,
    scc,
    scc_by_region,
    scc_by_sector,
)
from .sectors import (
    SECTORS,
    MonthlyCoefficients,
    SectorCalibration,
    builtin_calibration,
    load_calibration,
    monthly_damage,
    monthly_params,
    seasonal_params,
)

__version__ = "0.1.0"

__all__ = [
    "CO2_PER_C",
    "ComputationError",
    "DEFAULT_PULSE",
    "DamageParams",
    "DamageResult",
    "DiscountSpec",
    "GdpTrajectory",
    "GlobalSeries",
    "GridField",
    "MonthlyCoefficients",
    "PatternFactors",
    "PatternScaler",
    "PresentValue",
    "PulseResponse",
    "REGIONS",
    "RegionalParams",
    "RollingClimatology",
    "SECTORS",
    "SccResult",
    "SectorCalibration",
    "VARIANTS",
    "ValidationError",
    "WarmingMoments",
    "anomalize",
    "area_weights",
    "avoided_losses",
    "builtin_calibration",
    "builtin_regional_params",
    "damage",
    "decompose",
    "fit_quadratic",
    "global_mean",
    "harmonize_regions",
    "interpolate_gdp",
    "load_calibration",
    "load_gdp",
    "load_global_series",
    "load_grid",
    "load_regional_params",
    "moments",
    "moments_from_stats",
    "monthly_damage",
    "monthly_params",
    "pattern_factors",
    "present_value",
    "pulse_response",
    "pv_rows",
    "regional_damage",
    "save_gdp",
    "save_global_series",
    "save_grid",
    "scc",
    "scc_by_region",
    "scc_by_sector",
    "seasonal_params",
    "__version__",
]
