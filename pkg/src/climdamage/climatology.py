"""Anomalies, area means, pattern scaling, rolling climatologies, and the
warming moments (mean, mean square, variance) that damage functions consume.

The moment reductions are the heart of the package: a damage function that
reads the mean square of warming instead of the squared mean picks up the
variance of the temperature distribution for free, since

    E[T^2] = E[T]^2 + var(T)

holds under any weighting.  The four reduction variants differ only in which
dimensions (space, time within the window, both, or neither) the expectation
runs over.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator

from .errors import ComputationError, ValidationError
from .grids import (
    MONTHS_PER_YEAR,
    GlobalSeries,
    GridField,
    cell_weights,
    hemisphere_rows,
)

VARIANTS = ("none", "tvar", "svar", "stvar")

# which dimensions the mean square averages over, per variant
DOMAIN_BY_VARIANT = {
    "none": "none",
    "tvar": "temporal",
    "svar": "spatial",
    "stvar": "spatiotemporal",
}

SCOPES = ("GLOBAL", "NH", "SH")

# Work is split into fixed-size latitude chunks regardless of how many
# threads run them, so results are byte-identical for any n_jobs.
_LAT_CHUNK = 16


def _run_chunks(tasks, n_jobs: int) -> None:
    if n_jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(lambda t: t(), tasks))
    else:
        for task in tasks:
            task()


def anomalize(field: GridField, base_start: int, base_end: int) -> GridField:
    """Subtract the per-cell, per-calendar-month mean over the base years.

    Parameters
    ----------
    field : GridField
        Absolute or already-anomalized temperatures.
    base_start, base_end : int
        Inclusive reference years; must lie inside the field's coverage.

    Returns
    -------
    GridField
        Same grid, values expressed relative to the base period.
    """
    if base_end < base_start:
        raise ValidationError("anomalize: base period end before start")
    if base_start < field.years[0] or base_end > field.years[-1]:
        raise ValidationError(
            f"anomalize: base period {base_start}..{base_end} outside data "
            f"coverage {field.years[0]}..{field.years[-1]}"
        )
    i0 = field.year_index(base_start)
    i1 = field.year_index(base_end) + 1
    clim = field.values[i0:i1].mean(axis=0)
    return field.with_values(
        field.values - clim[None, :, :, :],
        base_period=(base_start, base_end),
    )


def global_mean(
    field: GridField,
    frequency: str = "monthly",
    hemisphere: str = "GLOBAL",
) -> GlobalSeries:
    """Area-weighted mean series over the unmasked cells of one hemisphere
    (or the globe).  Annual values average the twelve monthly means."""
    w = field.cell_weights(hemisphere)
    monthly = np.einsum("ymij,ij->ym", np.nan_to_num(field.values), w)
    if frequency == "monthly":
        return GlobalSeries(field.years, monthly, "monthly")
    if frequency == "annual":
        return GlobalSeries(field.years, monthly.mean(axis=1), "annual")
    raise ValidationError(f"global_mean: unknown frequency {frequency!r}")


def _annual_overlap(field: GridField, series: GlobalSeries) -> tuple[np.ndarray, np.ndarray]:
    """Annual regressor values and the field-year indices they pair with."""
    start = max(int(field.years[0]), int(series.years[0]))
    end = min(int(field.years[-1]), int(series.years[-1]))
    if end < start:
        raise ValidationError("field and global series share no years")
    g = series.year_slice(start, end).annual_values()
    idx = np.arange(field.year_index(start), field.year_index(end) + 1)
    return g, idx


class PatternScaler(BaseEstimator):
    """Per-cell, per-calendar-month linear response to global annual warming.

    ``fit`` regresses each cell-month anomaly series on the annual global
    mean series by ordinary least squares (intercept included, slope
    retained); ``transform`` projects a global series back onto the grid by
    multiplying it into the fitted slopes.

    Fitted attributes
    -----------------
    slopes_ : ndarray, shape (12, nlat, nlon)
        Local warming per degree of global warming; NaN on masked cells.
    residual_variance_ : ndarray, shape (12, nlat, nlon)
        Unbiased residual variance of each cell-month regression.
    lats_, lons_, mask_ : grid geometry copied from the training field.

    Parameters
    ----------
    min_years : int, default 3
        Fewest overlapping years accepted for the regression; with fewer
        than three years the residual variance is undefined.
    n_jobs : int, default 1
        Threads fitting latitude chunks in parallel; any value produces
        identical output.
    """

    def __init__(self, min_years: int = 3, n_jobs: int = 1):
        self.min_years = min_years
        self.n_jobs = n_jobs

    def fit(self, field: GridField, series: GlobalSeries) -> "PatternScaler":
        if self.min_years < 3:
            raise ValidationError("PatternScaler: min_years must be at least 3")
        g, idx = _annual_overlap(field, series)
        n = g.size
        if n < self.min_years:
            raise ValidationError(
                f"PatternScaler: only {n} overlapping years, need {self.min_years}"
            )
        gc = g - g.mean()
        sxx = float(gc @ gc)
        if sxx == 0.0:
            raise ComputationError(
                "PatternScaler: global series is constant over the "
                "overlap (zero-variance regressor)"
            )
        v = field.values[idx]                      # (n, 12, nlat, nlon)
        nlat = field.lats.size
        slopes = np.empty((MONTHS_PER_YEAR, nlat, field.lons.size))
        residual_variance = np.empty_like(slopes)

        def make_task(rows):
            def task():
                sub = v[:, :, rows, :]
                vbar = sub.mean(axis=0)
                s = np.einsum("y,ymij->mij", gc, sub - vbar) / sxx
                # residuals against the full line a + b*g, intercept from means
                resid = sub - (vbar[None] + s[None] * gc[:, None, None, None])
                slopes[:, rows, :] = s
                residual_variance[:, rows, :] = (
                    np.einsum("ymij,ymij->mij", resid, resid) / (n - 2)
                )
            return task

        tasks = [
            make_task(slice(i, min(i + _LAT_CHUNK, nlat)))
            for i in range(0, nlat, _LAT_CHUNK)
        ]
        _run_chunks(tasks, int(self.n_jobs))

        self.slopes_ = slopes
        self.residual_variance_ = residual_variance
        self.lats_ = field.lats
        self.lons_ = field.lons
        self.mask_ = field.mask
        self.n_years_ = n
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "slopes_"):
            raise ValidationError("PatternScaler: not fitted")

    def transform(self, series: GlobalSeries, years: tuple[int, int] | None = None) -> GridField:
        """Project a global series onto the grid: value = global x slope.

        Parameters
        ----------
        series : GlobalSeries
            Global annual (or monthly, annualized) anomaly series.
        years : (start, end), optional
            Inclusive window to project; defaults to the whole series, and
            must lie inside its coverage.
        """
        self._check_fitted()
        if years is None:
            years = (int(series.years[0]), int(series.years[-1]))
        sub = series.year_slice(years[0], years[1])
        g = sub.annual_values()
        values = g[:, None, None, None] * self.slopes_[None]
        return GridField(
            years=sub.years,
            lats=self.lats_,
            lons=self.lons_,
            values=values,
            mask=self.mask_,
            kind="anomaly",
        )

    def to_field(self) -> GridField:
        """Pack the fitted slopes as a single-pseudo-year pattern grid."""
        self._check_fitted()
        return GridField(
            years=np.array([0]),
            lats=self.lats_,
            lons=self.lons_,
            values=self.slopes_[None],
            mask=self.mask_,
            kind="pattern",
        )

    @classmethod
    def from_field(cls, field: GridField) -> "PatternScaler":
        """Rebuild a fitted scaler from a persisted pattern grid."""
        if field.kind != "pattern":
            raise ValidationError("from_field: grid is not a scaling pattern")
        if field.n_years != 1:
            raise ValidationError("from_field: pattern must carry one pseudo-year")
        scaler = cls()
        scaler.slopes_ = field.values[0]
        scaler.residual_variance_ = np.full_like(field.values[0], np.nan)
        scaler.lats_ = field.lats
        scaler.lons_ = field.lons
        scaler.mask_ = field.mask
        scaler.n_years_ = 0
        return scaler


class RollingClimatology(BaseEstimator):
    """Centered moving average along the year axis, kept separate per cell
    and per calendar month.

    With an odd window of w years the output loses (w-1)/2 years on each
    side; data through 2100 and the default 31-year window leave 2085 as the
    last usable year.

    Parameters
    ----------
    window : int, default 31
        Odd number of years averaged per output year.
    n_jobs : int, default 1
        Threads smoothing latitude chunks in parallel; output does not
        depend on the value.
    """

    def __init__(self, window: int = 31, n_jobs: int = 1):
        self.window = window
        self.n_jobs = n_jobs

    def fit(self, data=None, y=None) -> "RollingClimatology":
        # stateless; present so the transformer composes in pipelines
        return self

    def transform(self, data):
        """Smooth a GridField or GlobalSeries; returns the same type with
        the year axis trimmed to fully covered windows."""
        w = int(self.window)
        if w < 1 or w % 2 == 0:
            raise ValidationError(f"RollingClimatology: window {w} must be odd")
        if isinstance(data, GridField):
            n, values = data.n_years, data.values
        elif isinstance(data, GlobalSeries):
            n, values = data.n_years, data.values
        else:
            raise ValidationError("RollingClimatology: expected GridField or GlobalSeries")
        if w > n:
            raise ValidationError(
                f"RollingClimatology: window {w} longer than record ({n} years)"
            )
        half = (w - 1) // 2
        years = data.years[half:n - half]
        if isinstance(data, GridField):
            nlat = data.lats.size
            smoothed = np.empty((n - w + 1, MONTHS_PER_YEAR, nlat, data.lons.size))

            def make_task(rows):
                def task():
                    smoothed[:, :, rows, :] = sliding_window_view(
                        values[:, :, rows, :], w, axis=0
                    ).mean(axis=-1)
                return task

            tasks = [
                make_task(slice(i, min(i + _LAT_CHUNK, nlat)))
                for i in range(0, nlat, _LAT_CHUNK)
            ]
            _run_chunks(tasks, int(self.n_jobs))
        else:
            smoothed = sliding_window_view(values, w, axis=0).mean(axis=-1)
        if isinstance(data, GridField):
            return GridField(
                years=years,
                lats=data.lats,
                lons=data.lons,
                values=smoothed,
                mask=data.mask,
                base_period=data.base_period,
                kind=data.kind,
                provenance=data.provenance,
            )
        return GlobalSeries(years, smoothed, data.frequency)


@dataclass(frozen=True)
class WarmingMoments:
    """First and second moments of warming over a declared domain.

    mean_sq - mean**2 == variance holds to 1e-9 relative by construction;
    a variant that averages over nothing ("none") has zero variance.
    """

    mean: float
    mean_sq: float
    variance: float
    variant: str
    window: tuple[int, int]
    hemisphere: str = "GLOBAL"
    months: tuple[int, ...] = tuple(range(1, MONTHS_PER_YEAR + 1))

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"WarmingMoments: unknown variant {self.variant!r}")
        if self.variance < 0.0:
            raise ValidationError("WarmingMoments: negative variance")
        scale = max(abs(self.mean_sq), 1.0)
        if abs(self.mean_sq - (self.mean ** 2 + self.variance)) > 1e-9 * scale:
            raise ValidationError(
                "WarmingMoments: mean_sq does not equal mean^2 + variance"
            )
        if self.variant == "none" and self.variance != 0.0:
            raise ValidationError("WarmingMoments: 'none' variant carries variance")

    @property
    def domain(self) -> str:
        return DOMAIN_BY_VARIANT[self.variant]


def _finish_moments(mean, mean_sq, variant, window, hemisphere, months):
    # guard against tiny negative variance from cancellation
    variance = mean_sq - mean * mean
    if variance < 0.0:
        if variance < -1e-9 * max(abs(mean_sq), 1.0):
            raise ComputationError("moments: variance came out negative")
        variance = 0.0
        mean_sq = mean * mean
    return WarmingMoments(
        mean=float(mean),
        mean_sq=float(mean_sq),
        variance=float(variance),
        variant=variant,
        window=(int(window[0]), int(window[1])),
        hemisphere=hemisphere,
        months=tuple(int(m) for m in months),
    )


def moments_from_stats(
    mean: float,
    mean_sq: float,
    variant: str,
    window: tuple[int, int],
    hemisphere: str = "GLOBAL",
    months=None,
) -> WarmingMoments:
    """Rebuild moments from persisted statistics.

    Table output rounds to nine significant digits, so the stored variance
    may miss the mean/mean-square identity by a few parts in 1e9; the
    variance is therefore re-derived here and tiny negative gaps (rounding
    artifacts) snap mean_sq back to mean^2.
    """
    months_t = _check_months(months)
    variance = mean_sq - mean * mean
    tol = 1e-6 * max(abs(mean_sq), 1.0)
    if variance < 0.0:
        if variance < -tol:
            raise ValidationError(
                "moments_from_stats: mean_sq is far below mean^2"
            )
        variance = 0.0
        mean_sq = mean * mean
    elif variant == "none" and variance <= tol:
        # the no-variability variant defines mean_sq as mean^2; rounding in
        # the table may leave a small positive residual to snap away too
        variance = 0.0
        mean_sq = mean * mean
    return WarmingMoments(
        mean=float(mean),
        mean_sq=float(mean_sq),
        variance=float(variance),
        variant=variant,
        window=(int(window[0]), int(window[1])),
        hemisphere=hemisphere,
        months=months_t,
    )


def _check_months(months) -> tuple[int, ...]:
    if months is None:
        return tuple(range(1, MONTHS_PER_YEAR + 1))
    months = tuple(int(m) for m in months)
    if len(months) == 0:
        raise ValidationError("moments: empty month subset")
    if len(set(months)) != len(months):
        raise ValidationError("moments: repeated month in subset")
    if any(m < 1 or m > MONTHS_PER_YEAR for m in months):
        raise ValidationError("moments: month outside 1..12")
    return months


def moments(
    variant: str,
    *,
    series: GlobalSeries | None = None,
    field: GridField | None = None,
    window: tuple[int, int] | None = None,
    months=None,
    hemisphere: str = "GLOBAL",
) -> WarmingMoments:
    """Reduce a warming record to (mean, mean square, variance).

    Parameters
    ----------
    variant : {"none", "tvar", "svar", "stvar"}
        What the mean square averages over.  "none" squares the mean and
        carries no variance; "tvar" averages squared series values over the
        window (and months); "svar" time-averages each cell first, then
        area-averages the squared climatology; "stvar" area-and-time
        averages the squared values directly.
    series : GlobalSeries
        Required for "none" and "tvar".  Pass a hemisphere-restricted mean
        series if that is the domain you want.
    field : GridField
        Required for "svar" and "stvar".
    window : (start, end), optional
        Inclusive years; defaults to full coverage of the input.
    months : iterable of int, optional
        Calendar-month subset (needs monthly data).
    hemisphere : {"GLOBAL", "NH", "SH"}
        Spatial restriction for the field variants; area weights are
        renormalized over the cells that remain.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"moments: unknown variant {variant!r}")
    months_t = _check_months(months)

    if variant in ("none", "tvar"):
        if series is None:
            raise ValidationError(f"moments: variant {variant!r} needs a series")
        if hemisphere != "GLOBAL":
            raise ValidationError(
                "moments: pass a hemisphere-restricted series instead of a "
                "hemisphere argument for series variants"
            )
        if window is None:
            window = (int(series.years[0]), int(series.years[-1]))
        sub = series.year_slice(window[0], window[1])
        if series.frequency == "annual":
            if months is not None and months_t != tuple(range(1, 13)):
                raise ValidationError("moments: month subset needs monthly data")
            sample = sub.values
        else:
            cols = np.array([m - 1 for m in months_t])
            sample = sub.values[:, cols].ravel()
        mean = sample.mean()
        if variant == "none":
            return _finish_moments(mean, mean * mean, variant, window, "GLOBAL", months_t)
        return _finish_moments(mean, (sample ** 2).mean(), variant, window, "GLOBAL", months_t)

    if field is None:
        raise ValidationError(f"moments: variant {variant!r} needs a field")
    if window is None:
        window = (int(field.years[0]), int(field.years[-1]))
    if window[1] < window[0]:
        raise ValidationError(f"moments: empty window {window[0]}..{window[1]}")
    i0 = field.year_index(window[0])
    i1 = field.year_index(window[1]) + 1
    cols = np.array([m - 1 for m in months_t])
    sub = field.values[i0:i1][:, cols]            # (nyw, nm, nlat, nlon)
    w = field.cell_weights(hemisphere)
    sub = np.nan_to_num(sub)

    if variant == "svar":
        clim = sub.mean(axis=(0, 1))              # per-cell signal first
        mean = float(np.einsum("ij,ij->", clim, w))
        mean_sq = float(np.einsum("ij,ij->", clim ** 2, w))
    else:  # stvar
        mean = float(np.einsum("tmij,ij->", sub, w) / sub.shape[0] / sub.shape[1])
        mean_sq = float(np.einsum("tmij,ij->", sub ** 2, w) / sub.shape[0] / sub.shape[1])
    return _finish_moments(mean, mean_sq, variant, window, hemisphere, months_t)


@dataclass(frozen=True)
class PatternFactors:
    """Area-weighted moments of a fitted scaling pattern, per scope.

    Rows index (GLOBAL, NH, SH); all quantities are dimensionless slope
    statistics.  Multiplying the squared global anomaly by the right entry
    gives the corresponding spatial mean square exactly:

        area-mean of (g * p)^2  ==  g^2 * area-mean of p^2
    """

    mean_month: np.ndarray          # (3, 12)  E_a[p_m]
    meansq_month: np.ndarray        # (3, 12)  E_a[p_m^2]
    meansq_annual_mean: np.ndarray  # (3,)     E_a[(mean_m p)^2]

    def scope_index(self, scope: str) -> int:
        if scope not in SCOPES:
            raise ValidationError(f"unknown scope {scope!r}")
        return SCOPES.index(scope)


def pattern_factors(scaler: PatternScaler) -> PatternFactors:
    """Precompute the slope statistics the damage engine needs, for the
    globe and each hemisphere."""
    scaler._check_fitted()
    slopes = np.nan_to_num(scaler.slopes_)
    annual = slopes.mean(axis=0)
    mean_month = np.full((3, MONTHS_PER_YEAR), np.nan)
    meansq_month = np.full((3, MONTHS_PER_YEAR), np.nan)
    meansq_annual = np.full(3, np.nan)
    for k, scope in enumerate(SCOPES):
        rows = hemisphere_rows(scaler.lats_, scope)
        mask = scaler.mask_ & rows[:, None]
        if not np.any(mask):
            continue  # leave NaN; used only if that scope is requested
        w = cell_weights(scaler.lats_, scaler.lons_.size, mask)
        mean_month[k] = np.einsum("mij,ij->m", slopes, w)
        meansq_month[k] = np.einsum("mij,ij->m", slopes ** 2, w)
        meansq_annual[k] = float(np.einsum("ij,ij->", annual ** 2, w))
    return PatternFactors(mean_month, meansq_month, meansq_annual)
