"""Shared fixtures: synthetic grids, series, and a CLI runner."""
from __future__ import annotations

import subprocess
import sys

import numpy as np
import pytest

from climdamage import GdpTrajectory, GlobalSeries, GridField


def make_field(values, lats=None, lons=None, years=None, **kwargs) -> GridField:
    """GridField from a (ny, 12, nlat, nlon) array with simple defaults."""
    values = np.asarray(values, dtype=np.float64)
    ny, _, nlat, nlon = values.shape
    if lats is None:
        lats = np.linspace(-60.0, 60.0, nlat)
    if lons is None:
        lons = np.arange(nlon) * (360.0 / nlon)
    if years is None:
        years = np.arange(2000, 2000 + ny)
    return GridField(years=years, lats=lats, lons=lons, values=values, **kwargs)


def constant_field(value, ny=2, nlat=2, nlon=3, **kwargs) -> GridField:
    return make_field(np.full((ny, 12, nlat, nlon), float(value)), **kwargs)


@pytest.fixture
def two_cell_13() -> GridField:
    """One year, one latitude band, two cells holding 1 and 3 degC."""
    values = np.broadcast_to(np.array([1.0, 3.0]), (1, 12, 1, 2)).copy()
    return GridField(years=[2000], lats=[0.0], lons=[0.0, 180.0], values=values)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def annual_series(values, start=2000) -> GlobalSeries:
    values = np.asarray(values, dtype=np.float64)
    return GlobalSeries(np.arange(start, start + values.size), values, "annual")


def flat_gdp(value=100.0, start=2020, end=2100, region="GLOBAL") -> GdpTrajectory:
    years = np.arange(start, end + 1)
    return GdpTrajectory(region, years, np.full(years.size, float(value)))


def run_cli(args, cwd) -> subprocess.CompletedProcess:
    """Run the command line tool in a subprocess and capture output."""
    return subprocess.run(
        [sys.executable, "-m", "climdamage", *[str(a) for a in args]],
        cwd=cwd,
        capture_output=True,
        text=True,
    )
