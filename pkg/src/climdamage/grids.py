"""Gridded temperature fields, global mean series, GDP trajectories, and
their on-disk formats.

A grid lives in two files: a small JSON manifest holding coordinates and
metadata, and a payload next to it holding the values either as CSV rows
(year,month,lat,lon,value) or as packed little-endian float32 in row-major
(year, month, lat, lon) order.  Payloads are written with full round-trip
precision; loading what was saved reproduces the value array bit for bit.

Masked cells (oceans, missing stations) carry NaN in the value array and
False in the per-cell mask.  Spatial averages renormalize the cosine
latitude weights over whatever cells remain.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError

MONTHS_PER_YEAR = 12

PAYLOAD_FORMATS = ("csv", "f32le")

GRID_KINDS = ("anomaly", "pattern")


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


def area_weights(lats) -> np.ndarray:
    """Cosine-latitude weights normalized to sum to one.

    Parameters
    ----------
    lats : array-like
        Latitudes in degrees, each within [-90, 90].

    Returns
    -------
    ndarray
        One weight per latitude, proportional to cos(lat), summing to 1.
    """
    lats = np.asarray(lats, dtype=np.float64)
    if lats.size == 0:
        raise ValidationError("area_weights: empty latitude list")
    if np.any(np.abs(lats) > 90.0):
        raise ValidationError("area_weights: latitude outside [-90, 90]")
    w = np.cos(np.deg2rad(lats))
    w[np.abs(lats) == 90.0] = 0.0   # cos(pi/2) rounds to 6e-17, not 0
    total = w.sum()
    if total <= 0.0:
        raise ValidationError("area_weights: weights sum to zero (poles only)")
    return w / total


def cell_weights(lats, nlon: int, mask: np.ndarray) -> np.ndarray:
    """Per-cell area weights: cos(lat), uniform in longitude, zero on masked
    cells, renormalized to sum to one over the cells that remain."""
    lats = np.asarray(lats, dtype=np.float64)
    band = np.cos(np.deg2rad(lats))
    band[np.abs(lats) == 90.0] = 0.0
    w = band[:, None] * np.ones((1, nlon))
    w = np.where(mask, w, 0.0)
    total = w.sum()
    if total <= 0.0:
        raise ValidationError("cell_weights: all cells masked")
    return w / total


@dataclass(frozen=True)
class GridField:
    """Monthly values on a latitude-longitude grid over consecutive years.

    Attributes
    ----------
    years : ndarray of int, shape (ny,)
        Consecutive calendar years, ascending.
    lats, lons : ndarray of float
        Grid coordinates in degrees; latitudes strictly ascending in
        [-90, 90], longitudes strictly ascending.
    values : ndarray, shape (ny, 12, nlat, nlon)
        Field values (degC for temperature anomalies, degC per degC for
        scaling patterns).  NaN exactly on masked cells.
    mask : ndarray of bool, shape (nlat, nlon)
        True where the cell carries data.
    base_period : (int, int) or None
        Reference years the anomalies are taken against, when known.
    kind : str
        "anomaly" for temperature data, "pattern" for fitted scaling
        patterns (which carry a single pseudo-year).
    """

    years: np.ndarray
    lats: np.ndarray
    lons: np.ndarray
    values: np.ndarray
    mask: np.ndarray | None = None
    base_period: tuple[int, int] | None = None
    kind: str = "anomaly"
    provenance: str = ""

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64).ravel()
        lats = np.asarray(self.lats, dtype=np.float64).ravel()
        lons = np.asarray(self.lons, dtype=np.float64).ravel()
        values = np.asarray(self.values, dtype=np.float64)

        if years.size == 0:
            raise ValidationError("GridField: no years")
        if np.any(np.diff(years) != 1):
            raise ValidationError("GridField: years must be consecutive")
        if lats.size == 0 or lons.size == 0:
            raise ValidationError("GridField: empty coordinate axis")
        if np.any(np.abs(lats) > 90.0):
            raise ValidationError("GridField: latitude outside [-90, 90]")
        if lats.size > 1 and np.any(np.diff(lats) <= 0):
            raise ValidationError("GridField: latitudes must be strictly ascending")
        if lons.size > 1 and np.any(np.diff(lons) <= 0):
            raise ValidationError("GridField: longitudes must be strictly ascending")

        shape = (years.size, MONTHS_PER_YEAR, lats.size, lons.size)
        if values.shape != shape:
            raise ValidationError(
                f"GridField: values shape {values.shape} does not match "
                f"(years, 12, lats, lons) = {shape}"
            )
        if self.kind not in GRID_KINDS:
            raise ValidationError(f"GridField: unknown kind {self.kind!r}")

        finite_cell = np.all(np.isfinite(values), axis=(0, 1))
        nan_cell = np.all(np.isnan(values), axis=(0, 1))
        if self.mask is None:
            # Derive the mask: a cell is either fully valid or fully NaN.
            if not np.all(finite_cell | nan_cell):
                raise ValidationError(
                    "GridField: cell mixes finite and non-finite values; "
                    "mask whole cells with NaN"
                )
            mask = finite_cell
        else:
            mask = np.asarray(self.mask, dtype=bool)
            if mask.shape != (lats.size, lons.size):
                raise ValidationError("GridField: mask shape does not match grid")
            if not np.all(finite_cell[mask]):
                raise ValidationError("GridField: non-finite value on an unmasked cell")
            values = values.copy()
            values[:, :, ~mask] = np.nan
        if not np.any(mask):
            raise ValidationError("GridField: all cells masked")

        if self.base_period is not None:
            b0, b1 = (int(self.base_period[0]), int(self.base_period[1]))
            if b1 < b0:
                raise ValidationError("GridField: base period end before start")
            object.__setattr__(self, "base_period", (b0, b1))

        object.__setattr__(self, "years", _freeze(years))
        object.__setattr__(self, "lats", _freeze(lats))
        object.__setattr__(self, "lons", _freeze(lons))
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "mask", _freeze(mask))

    @property
    def n_years(self) -> int:
        return int(self.years.size)

    def year_index(self, year: int) -> int:
        if year < self.years[0] or year > self.years[-1]:
            raise ValidationError(
                f"year {year} outside grid coverage "
                f"{self.years[0]}..{self.years[-1]}"
            )
        return int(year - self.years[0])

    def cell_weights(self, hemisphere: str = "GLOBAL") -> np.ndarray:
        """Area weights over unmasked cells, optionally restricted to one
        hemisphere (NH means lat >= 0), renormalized to sum to one."""
        mask = self.mask & hemisphere_rows(self.lats, hemisphere)[:, None]
        return cell_weights(self.lats, self.lons.size, mask)

    def with_values(self, values: np.ndarray, **meta) -> "GridField":
        return replace(self, values=values, **meta)


def hemisphere_rows(lats: np.ndarray, hemisphere: str) -> np.ndarray:
    """Boolean row selector for a hemisphere; the equator row counts as NH."""
    lats = np.asarray(lats, dtype=np.float64)
    if hemisphere == "GLOBAL":
        return np.ones(lats.shape, dtype=bool)
    if hemisphere == "NH":
        return lats >= 0.0
    if hemisphere == "SH":
        return lats < 0.0
    raise ValidationError(f"unknown hemisphere {hemisphere!r}; use GLOBAL, NH or SH")


@dataclass(frozen=True)
class GlobalSeries:
    """A gap-free annual or monthly area-mean series.

    values has shape (ny,) for annual data and (ny, 12) for monthly data.
    """

    years: np.ndarray
    values: np.ndarray
    frequency: str = "annual"

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64)
        if years.size == 0:
            raise ValidationError("GlobalSeries: empty series")
        if np.any(np.diff(years) != 1):
            raise ValidationError("GlobalSeries: gap in year index")
        if self.frequency == "annual":
            if values.shape != (years.size,):
                raise ValidationError("GlobalSeries: annual values must be (ny,)")
        elif self.frequency == "monthly":
            if values.shape != (years.size, MONTHS_PER_YEAR):
                raise ValidationError("GlobalSeries: monthly values must be (ny, 12)")
        else:
            raise ValidationError(f"GlobalSeries: unknown frequency {self.frequency!r}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("GlobalSeries: non-finite value")
        object.__setattr__(self, "years", _freeze(years))
        object.__setattr__(self, "values", _freeze(values))

    @property
    def n_years(self) -> int:
        return int(self.years.size)

    def annual_values(self) -> np.ndarray:
        """Annual means, shape (ny,): monthly series average their 12 months."""
        if self.frequency == "annual":
            return self.values
        return self.values.mean(axis=1)

    def year_slice(self, start: int, end: int) -> "GlobalSeries":
        """Inclusive year window; errors if outside coverage."""
        if start > end:
            raise ValidationError(f"empty window {start}..{end}")
        if start < self.years[0] or end > self.years[-1]:
            raise ValidationError(
                f"window {start}..{end} outside series coverage "
                f"{self.years[0]}..{self.years[-1]}"
            )
        i0 = int(start - self.years[0])
        i1 = int(end - self.years[0]) + 1
        return GlobalSeries(self.years[i0:i1], self.values[i0:i1], self.frequency)


@dataclass(frozen=True)
class GdpTrajectory:
    """GDP path for one region; years strictly increasing, values positive.

    Units are up to the caller (the bundled scenarios use billion US dollars);
    downstream code takes an explicit currency scale where it matters.
    """

    region: str
    years: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        years = np.asarray(self.years, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if years.size == 0:
            raise ValidationError(f"GdpTrajectory[{self.region}]: empty")
        if years.size != values.size:
            raise ValidationError(f"GdpTrajectory[{self.region}]: length mismatch")
        if years.size > 1 and np.any(np.diff(years) <= 0):
            raise ValidationError(
                f"GdpTrajectory[{self.region}]: duplicate or unordered year"
            )
        if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
            raise ValidationError(f"GdpTrajectory[{self.region}]: non-positive GDP")
        object.__setattr__(self, "years", _freeze(years))
        object.__setattr__(self, "values", _freeze(values))


# ---------------------------------------------------------------------------
# Grid manifest + payload I/O


def _format_value(v: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(v))


def load_grid(manifest_path) -> GridField:
    """Load a grid from its JSON manifest; the payload path is resolved
    relative to the manifest's directory."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read manifest {manifest_path}: {exc}") from exc

    for key in ("years", "lats", "lons", "payload", "payload_format"):
        if key not in manifest:
            raise ValidationError(f"manifest missing required key {key!r}")

    years_range = manifest["years"]
    if (not isinstance(years_range, list)) or len(years_range) != 2:
        raise ValidationError("manifest years must be [start, end]")
    y0, y1 = int(years_range[0]), int(years_range[1])
    if y1 < y0:
        raise ValidationError("manifest years end before start")
    years = np.arange(y0, y1 + 1, dtype=np.int64)
    lats = np.asarray(manifest["lats"], dtype=np.float64)
    lons = np.asarray(manifest["lons"], dtype=np.float64)

    fmt = manifest["payload_format"]
    if fmt not in PAYLOAD_FORMATS:
        raise ValidationError(f"unknown payload format {fmt!r}")
    payload_path = manifest_path.parent / manifest["payload"]
    shape = (years.size, MONTHS_PER_YEAR, lats.size, lons.size)

    if fmt == "f32le":
        raw = np.fromfile(payload_path, dtype="<f4")
        if raw.size != int(np.prod(shape)):
            raise ValidationError(
                f"payload {payload_path.name} holds {raw.size} values, "
                f"expected {int(np.prod(shape))}"
            )
        values = raw.astype(np.float64).reshape(shape)
    else:
        values = _read_csv_payload(payload_path, years, lats, lons)

    base = manifest.get("base_period")
    base_period = (int(base[0]), int(base[1])) if base is not None else None
    return GridField(
        years=years,
        lats=lats,
        lons=lons,
        values=values,
        base_period=base_period,
        kind=manifest.get("kind", "anomaly"),
        provenance=manifest.get("provenance", ""),
    )


def _read_csv_payload(path: Path, years, lats, lons) -> np.ndarray:
    lat_index = {_format_value(v): i for i, v in enumerate(lats)}
    lon_index = {_format_value(v): i for i, v in enumerate(lons)}
    values = np.full((years.size, MONTHS_PER_YEAR, lats.size, lons.size), np.nan)
    seen = np.zeros(values.shape, dtype=bool)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ValidationError(f"cannot read payload {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["year", "month", "lat", "lon", "value"]:
            raise ValidationError(f"payload {path.name}: bad header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 5:
                raise ValidationError(f"{path.name}:{lineno}: expected 5 columns")
            year, month = int(row[0]), int(row[1])
            if year < years[0] or year > years[-1]:
                raise ValidationError(f"{path.name}:{lineno}: year {year} outside manifest range")
            if month < 1 or month > MONTHS_PER_YEAR:
                raise ValidationError(f"{path.name}:{lineno}: month {month} outside 1..12")
            ilat = lat_index.get(_format_value(float(row[2])))
            ilon = lon_index.get(_format_value(float(row[3])))
            if ilat is None or ilon is None:
                raise ValidationError(
                    f"{path.name}:{lineno}: coordinate ({row[2]}, {row[3]}) "
                    "not in manifest"
                )
            iy = year - years[0]
            im = month - 1
            if seen[iy, im, ilat, ilon]:
                raise ValidationError(f"{path.name}:{lineno}: duplicate cell entry")
            seen[iy, im, ilat, ilon] = True
            values[iy, im, ilat, ilon] = float(row[4])
    return values


def save_grid(field: GridField, manifest_path, payload_format: str = "csv") -> None:
    """Write manifest and payload; loading the result reproduces
    ``field.values`` bit for bit (for f32le, provided the values came from
    float32 in the first place)."""
    if payload_format not in PAYLOAD_FORMATS:
        raise ValidationError(f"unknown payload format {payload_format!r}")
    manifest_path = Path(manifest_path)
    suffix = ".csv" if payload_format == "csv" else ".f32le"
    payload_name = manifest_path.stem + suffix
    payload_path = manifest_path.parent / payload_name

    manifest = {
        "years": [int(field.years[0]), int(field.years[-1])],
        "lats": [float(v) for v in field.lats],
        "lons": [float(v) for v in field.lons],
        "payload": payload_name,
        "payload_format": payload_format,
        "kind": field.kind,
    }
    if field.base_period is not None:
        manifest["base_period"] = [int(field.base_period[0]), int(field.base_period[1])]
    if field.provenance:
        manifest["provenance"] = field.provenance
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    if payload_format == "f32le":
        field.values.astype("<f4").tofile(payload_path)
        return
    with open(payload_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", "month", "lat", "lon", "value"])
        for iy, year in enumerate(field.years):
            for im in range(MONTHS_PER_YEAR):
                for ilat, lat in enumerate(field.lats):
                    for ilon, lon in enumerate(field.lons):
                        writer.writerow([
                            int(year),
                            im + 1,
                            _format_value(lat),
                            _format_value(lon),
                            _format_value(field.values[iy, im, ilat, ilon]),
                        ])


# ---------------------------------------------------------------------------
# Series I/O (CSV with a header row)


def load_global_series(path) -> GlobalSeries:
    """Read an annual (year,value) or monthly (year,month,value) series."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ValidationError(f"cannot read series {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header == ["year", "value"]:
            rows: dict[int, float] = {}
            for lineno, row in enumerate(reader, start=2):
                year = int(row[0])
                if year in rows:
                    raise ValidationError(f"{path.name}:{lineno}: duplicate year {year}")
                rows[year] = float(row[1])
            if not rows:
                raise ValidationError(f"{path.name}: empty series")
            years = np.array(sorted(rows), dtype=np.int64)
            if np.any(np.diff(years) != 1):
                raise ValidationError(f"{path.name}: gap in year index")
            values = np.array([rows[y] for y in years])
            return GlobalSeries(years, values, "annual")
        if header == ["year", "month", "value"]:
            cells: dict[tuple[int, int], float] = {}
            for lineno, row in enumerate(reader, start=2):
                key = (int(row[0]), int(row[1]))
                if key[1] < 1 or key[1] > MONTHS_PER_YEAR:
                    raise ValidationError(f"{path.name}:{lineno}: month outside 1..12")
                if key in cells:
                    raise ValidationError(f"{path.name}:{lineno}: duplicate entry {key}")
                cells[key] = float(row[2])
            if not cells:
                raise ValidationError(f"{path.name}: empty series")
            years = np.array(sorted({y for y, _ in cells}), dtype=np.int64)
            if np.any(np.diff(years) != 1):
                raise ValidationError(f"{path.name}: gap in year index")
            values = np.empty((years.size, MONTHS_PER_YEAR))
            for iy, year in enumerate(years):
                for im in range(MONTHS_PER_YEAR):
                    if (year, im + 1) not in cells:
                        raise ValidationError(
                            f"{path.name}: missing month {year}-{im + 1:02d}"
                        )
                    values[iy, im] = cells[(year, im + 1)]
            return GlobalSeries(years, values, "monthly")
    raise ValidationError(
        f"{path.name}: header must be year,value or year,month,value, got {header}"
    )


def save_global_series(series: GlobalSeries, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if series.frequency == "annual":
            writer.writerow(["year", "value"])
            for year, v in zip(series.years, series.values):
                writer.writerow([int(year), _format_value(v)])
        else:
            writer.writerow(["year", "month", "value"])
            for iy, year in enumerate(series.years):
                for im in range(MONTHS_PER_YEAR):
                    writer.writerow([int(year), im + 1, _format_value(series.values[iy, im])])


def load_gdp(path) -> dict[str, GdpTrajectory]:
    """Read a (year,region,gdp) CSV into one trajectory per region."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ValidationError(f"cannot read GDP file {path}: {exc}") from exc
    by_region: dict[str, dict[int, float]] = {}
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["year", "region", "gdp"]:
            raise ValidationError(
                f"{path.name}: header must be year,region,gdp, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            year, region, gdp = int(row[0]), row[1].strip(), float(row[2])
            rows = by_region.setdefault(region, {})
            if year in rows:
                raise ValidationError(
                    f"{path.name}:{lineno}: duplicate year {year} for {region}"
                )
            rows[year] = gdp
    if not by_region:
        raise ValidationError(f"{path.name}: empty GDP file")
    out = {}
    for region, rows in by_region.items():
        years = np.array(sorted(rows), dtype=np.int64)
        out[region] = GdpTrajectory(region, years, np.array([rows[y] for y in years]))
    return out


def save_gdp(trajectories, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", "region", "gdp"])
        for region in sorted(trajectories):
            traj = trajectories[region]
            for year, v in zip(traj.years, traj.values):
                writer.writerow([int(year), region, _format_value(v)])
