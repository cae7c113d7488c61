"""Command line front end.

Every subcommand reads CSV/JSON inputs, runs one stage of the damage
pipeline, and writes a CSV table (optionally mirrored as JSON) whose bytes
depend only on the resolved configuration: floats are printed with nine
significant digits, rows come in a fixed order, no timestamps or locale
formatting are involved, and --threads never changes output bytes.

Options may come from an INI config file (section named after the
subcommand, pulse coefficients under [pulse]); explicit flags win over the
config, which wins over built-in defaults.  Exit status is 1 for input or
usage problems and 2 when a computation cannot proceed.

Usage sketch:

    climdamage pattern --grid anoms.json --series gmst.csv --out pat.json
    climdamage moments --variant stvar --grid clim.json --per-year \
        --window 2020 2085 --out moments.csv
    climdamage damages --moments moments.csv --reference pre.csv --out d.csv
    climdamage pv --losses d.csv --gdp gdp.csv --rate 0.04 \
        --window 2020 2085 --out pv.csv
    climdamage scc --series gmst.csv --pattern pat.json --gdp gdp.csv \
        --variants none,stvar --rates 0.04,0.015 --out scc.csv
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .climatology import (
    PatternScaler,
    RollingClimatology,
    VARIANTS,
    WarmingMoments,
    global_mean,
    moments,
    moments_from_stats,
    pattern_factors,
)
from .damages import DamageParams, decompose
from .economics import DiscountSpec, present_value, pv_rows
from .errors import ComputationError, ValidationError
from .grids import (
    MONTHS_PER_YEAR,
    load_gdp,
    load_global_series,
    load_grid,
    save_global_series,
    save_grid,
)
from .regions import (
    REGIONS,
    builtin_regional_params,
    harmonize_regions,
    load_regional_params,
)
from .scc import DEFAULT_PULSE, PulseResponse, scc, scc_by_region, scc_by_sector
from .sectors import (
    HEMISPHERES,
    SEASONS,
    builtin_calibration,
    load_calibration,
    monthly_damage,
    monthly_params,
    seasonal_params,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract here is
    that all input validation fails with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


# ---------------------------------------------------------------------------
# small formatting and table helpers


def _fmt(value) -> str:
    """Nine significant digits for floats, plain text for the rest."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _fmt_months(months) -> str:
    months = tuple(int(m) for m in months)
    if months == tuple(range(months[0], months[-1] + 1)) and len(months) > 1:
        return f"{months[0]}-{months[-1]}"
    return ",".join(str(m) for m in months)


def _parse_months(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "-" in text:
        lo, hi = text.split("-", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(p) for p in text.split(",") if p)


def _config_hash(command: str, resolved: dict) -> str:
    """Digest of the resolved run configuration (paths included, output
    destination and thread count excluded)."""
    blob = [command]
    for key in sorted(resolved):
        value = resolved[key]
        if isinstance(value, (list, tuple)):
            value = ",".join(_fmt(v) for v in value)
        else:
            value = _fmt(value) if value is not None else ""
        blob.append(f"{key}={value}")
    return hashlib.sha256("\n".join(blob).encode()).hexdigest()[:16]


def _write_table(out, columns, rows, command, resolved, as_json) -> None:
    """CSV with a commented metadata header; optional JSON mirror."""
    out = Path(out)
    if out.suffix == ".json":
        raise ValidationError("--out must not end in .json (used by --json mirror)")
    digest = _config_hash(command, resolved)
    buf = io.StringIO()
    buf.write(f"# climdamage {__version__}\n")
    buf.write(f"# command {command}\n")
    buf.write(f"# config {digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    out.write_text(buf.getvalue())
    if as_json:
        meta = {"tool": f"climdamage {__version__}", "command": command, "config": digest}
        payload = {
            "meta": meta,
            "columns": list(columns),
            "rows": [[_json_cell(v) for v in row] for row in rows],
        }
        out.with_suffix(".json").write_text(
            json.dumps(payload, sort_keys=True, indent=1) + "\n"
        )
    print(f"wrote {out}")


def _json_cell(value):
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.9g}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def _read_table(path) -> list[dict[str, str]]:
    """Read back a table written by _write_table (or any CSV with an
    optional '#'-commented header)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read table {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise ValidationError(f"{path.name}: no rows")
    reader = csv.DictReader(lines)
    rows = list(reader)
    if not rows:
        raise ValidationError(f"{path.name}: no rows")
    return rows


def _moments_from_row(row: dict[str, str], source: str) -> WarmingMoments:
    # variance is re-derived from mean and mean_sq; the printed column is
    # informational and was rounded to nine digits
    try:
        return moments_from_stats(
            mean=float(row["mean"]),
            mean_sq=float(row["mean_sq"]),
            variant=row["variant"],
            window=(int(row["window_start"]), int(row["window_end"])),
            hemisphere=row.get("hemisphere", "GLOBAL"),
            months=_parse_months(row.get("months", "1-12")),
        )
    except KeyError as exc:
        raise ValidationError(f"{source}: moments table missing column {exc}") from exc


MOMENT_COLUMNS = (
    "year", "window_start", "window_end", "variant",
    "hemisphere", "months", "mean", "mean_sq", "variance",
)


def _moments_row(year, m: WarmingMoments):
    return (
        int(year), m.window[0], m.window[1], m.variant,
        m.hemisphere, _fmt_months(m.months), m.mean, m.mean_sq, m.variance,
    )


# ---------------------------------------------------------------------------
# config plumbing

# dest -> cast used when the value arrives from the INI file as a string
_CAST = {
    "str": lambda s: s.strip(),
    "int": int,
    "float": float,
    "bool": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "int_pair": lambda s: tuple(int(p) for p in s.replace(",", " ").split()),
    "floats": lambda s: [float(p) for p in s.replace(",", " ").split() if p],
    "strs": lambda s: [p for p in s.replace(",", " ").split() if p],
}

# every subcommand option that may come from the config file
_CONFIG_SCHEMA: dict[str, dict[str, str]] = {
    "pattern": {
        "grid": "str", "series": "str", "payload_format": "str",
        "min_years": "int",
    },
    "climatology": {
        "grid": "str", "series": "str", "window": "int",
        "payload_format": "str",
    },
    "moments": {
        "variant": "str", "grid": "str", "series": "str", "pattern": "str",
        "window": "int_pair", "per_year": "bool", "months": "str",
        "hemisphere": "str", "by_month_hemisphere": "bool",
    },
    "damages": {
        "moments": "str", "reference": "str", "a": "float", "c": "float",
    },
    "sectors": {
        "table": "str", "damages": "bool", "moments": "str",
        "reference": "str", "calibration": "str", "study": "str",
        "a": "float", "c": "float", "nh_share": "float", "sh_share": "float",
    },
    "regions": {
        "table": "bool", "damages": "bool", "moments": "str",
        "reference": "str", "gdp": "str", "year": "int", "params": "str",
    },
    "pv": {
        "losses": "str", "gdp": "str", "region": "str", "rate": "float",
        "base_year": "int", "window": "int_pair",
    },
    "scc": {
        "series": "str", "gdp": "str", "pattern": "str", "variants": "strs",
        "rates": "floats", "horizon": "int_pair", "gdp_scale": "float",
        "breakdown": "str", "calibration": "str", "study": "str",
        "params": "str", "scenario": "str", "a": "float", "c": "float",
    },
    "decompose": {
        "none": "float", "tvar": "float", "svar": "float", "stvar": "float",
    },
}

_PULSE_KEYS = ("a1", "a2", "a3", "tau1", "tau2", "tau3", "t0")


def _apply_config(args, command: str) -> None:
    """Fill in options the command line left unset from the INI file."""
    if args.config is None:
        return
    path = Path(args.config)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.read(path)
    for dest, kind in _CONFIG_SCHEMA.get(command, {}).items():
        if getattr(args, dest, None) is None and cp.has_option(command, dest):
            setattr(args, dest, _CAST[kind](cp.get(command, dest)))
    if command == "scc":
        for key in _PULSE_KEYS:
            dest = f"pulse_{key}"
            if getattr(args, dest) is None and cp.has_option("pulse", key):
                cast = int if key == "t0" else float
                setattr(args, dest, cast(cp.get("pulse", key)))


def _default(args, dest, value) -> None:
    if getattr(args, dest, None) is None:
        setattr(args, dest, value)


def _require(args, command, *dests) -> None:
    for dest in dests:
        if getattr(args, dest, None) is None:
            raise ValidationError(
                f"{command}: --{dest.replace('_', '-')} is required "
                "(flag or config)"
            )


def _resolved(args, command: str) -> dict:
    keys = set(_CONFIG_SCHEMA.get(command, {}))
    if command == "scc":
        keys |= {f"pulse_{k}" for k in _PULSE_KEYS}
    return {k: getattr(args, k) for k in keys}


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_pattern(args):
    _apply_config(args, "pattern")
    _default(args, "payload_format", "csv")
    _default(args, "min_years", 3)
    _require(args, "pattern", "grid", "series", "out")
    field = load_grid(args.grid)
    series = load_global_series(args.series)
    scaler = PatternScaler(min_years=args.min_years, n_jobs=args.threads)
    scaler.fit(field, series)
    save_grid(scaler.to_field(), args.out, args.payload_format)
    print(f"wrote {args.out}")


def _cmd_climatology(args):
    _apply_config(args, "climatology")
    _default(args, "window", 31)
    _default(args, "payload_format", "csv")
    _require(args, "climatology", "out")
    roller = RollingClimatology(window=args.window, n_jobs=args.threads)
    if (args.grid is None) == (args.series is None):
        raise ValidationError("climatology: pass exactly one of --grid / --series")
    if args.grid is not None:
        save_grid(roller.transform(load_grid(args.grid)), args.out, args.payload_format)
    else:
        save_global_series(roller.transform(load_global_series(args.series)), args.out)
    print(f"wrote {args.out}")


def _moment_windows(args, coverage):
    window = args.window if args.window is not None else coverage
    start, end = int(window[0]), int(window[1])
    if args.per_year:
        return [(t, t) for t in range(start, end + 1)]
    return [(start, end)]


def _cmd_moments(args):
    _apply_config(args, "moments")
    _default(args, "hemisphere", "GLOBAL")
    _default(args, "per_year", False)
    _default(args, "by_month_hemisphere", False)
    _require(args, "moments", "variant", "out")
    variant = args.variant
    if variant not in VARIANTS:
        raise ValidationError(f"moments: unknown variant {variant!r}")
    months = _parse_months(args.months) if args.months else None
    rows = []

    if args.by_month_hemisphere:
        if args.grid is None:
            raise ValidationError("moments: --by-month-hemisphere needs --grid")
        field = load_grid(args.grid)
        coverage = (int(field.years[0]), int(field.years[-1]))
        for window in _moment_windows(args, coverage):
            for hemi in HEMISPHERES:
                hemi_series = (
                    global_mean(field, "monthly", hemi)
                    if variant in ("none", "tvar") else None
                )
                for month in range(1, MONTHS_PER_YEAR + 1):
                    if variant in ("none", "tvar"):
                        m = moments(
                            variant, series=hemi_series,
                            window=window, months=(month,),
                        )
                        # the series was already hemisphere-restricted
                        m = WarmingMoments(
                            m.mean, m.mean_sq, m.variance, m.variant,
                            m.window, hemi, m.months,
                        )
                    else:
                        m = moments(
                            variant, field=field, window=window,
                            months=(month,), hemisphere=hemi,
                        )
                    rows.append(_moments_row(window[0], m))
        _write_table(args.out, MOMENT_COLUMNS, rows, "moments",
                     _resolved(args, "moments"), args.json)
        return

    if variant in ("none", "tvar"):
        if args.series is not None:
            series = load_global_series(args.series)
        elif args.grid is not None:
            freq = "monthly" if (months or variant == "tvar") else "annual"
            series = global_mean(load_grid(args.grid), freq, args.hemisphere)
        else:
            raise ValidationError(f"moments: variant {variant} needs --series or --grid")
        coverage = (int(series.years[0]), int(series.years[-1]))
        for window in _moment_windows(args, coverage):
            m = moments(variant, series=series, window=window, months=months)
            if args.hemisphere != "GLOBAL" and args.grid is not None:
                m = WarmingMoments(m.mean, m.mean_sq, m.variance, m.variant,
                                   m.window, args.hemisphere, m.months)
            rows.append(_moments_row(window[0], m))
    else:
        if args.grid is not None:
            field = load_grid(args.grid)
        elif args.pattern is not None and args.series is not None:
            scaler = PatternScaler.from_field(load_grid(args.pattern))
            series = load_global_series(args.series)
            field = scaler.transform(series, years=args.window)
        else:
            raise ValidationError(
                f"moments: variant {variant} needs --grid, or --pattern with --series"
            )
        coverage = (int(field.years[0]), int(field.years[-1]))
        for window in _moment_windows(args, coverage):
            m = moments(variant, field=field, window=window,
                        months=months, hemisphere=args.hemisphere)
            rows.append(_moments_row(window[0], m))

    _write_table(args.out, MOMENT_COLUMNS, rows, "moments",
                 _resolved(args, "moments"), args.json)


def _reference_lookup(path):
    """Reference moments keyed by (variant, hemisphere, months)."""
    refs = {}
    for row in _read_table(path):
        m = _moments_from_row(row, "reference")
        key = (m.variant, m.hemisphere, m.months)
        if key in refs:
            raise ValidationError(f"reference: duplicate row for {key}")
        refs[key] = m
    return refs


def _cmd_damages(args):
    _apply_config(args, "damages")
    _default(args, "a", 0.0201)
    _default(args, "c", 2.5)
    _require(args, "damages", "moments", "out")
    params = DamageParams(a=args.a, c=args.c)
    refs = _reference_lookup(args.reference) if args.reference else {}
    rows = []
    for row in _read_table(args.moments):
        m = _moments_from_row(row, "moments")
        ref_sq = 0.0
        if refs:
            key = (m.variant, m.hemisphere, m.months)
            if key not in refs:
                raise ValidationError(f"damages: no reference row for {key}")
            ref_sq = refs[key].mean_sq
        loss = params.alpha * (m.mean_sq - ref_sq)
        rows.append((
            int(row["year"]), m.variant, m.hemisphere, _fmt_months(m.months),
            loss, params.alpha * ref_sq,
        ))
    columns = ("year", "variant", "hemisphere", "months",
               "loss_fraction", "reference_adjustment")
    _write_table(args.out, columns, rows, "damages",
                 _resolved(args, "damages"), args.json)


def _load_cal(args):
    if args.calibration is not None:
        return load_calibration(args.calibration)
    return builtin_calibration(args.study)


def _cmd_sectors(args):
    _apply_config(args, "sectors")
    _default(args, "study", "average")
    _default(args, "a", 0.0201)
    _default(args, "c", 2.5)
    _default(args, "damages", False)
    _require(args, "sectors", "out")
    cal = _load_cal(args)
    resolved = _resolved(args, "sectors")

    if args.damages:
        if args.moments is None:
            raise ValidationError("sectors: --damages needs --moments")
        shares = {}
        if args.nh_share is not None or args.sh_share is not None:
            _require(args, "sectors", "nh_share", "sh_share")
            shares = {"nh_share": args.nh_share, "sh_share": args.sh_share}
        coeffs = monthly_params(cal, **shares)
        by_slot = {}
        for row in _read_table(args.moments):
            m = _moments_from_row(row, "moments")
            if len(m.months) != 1:
                raise ValidationError(
                    "sectors: moments rows must each cover a single month "
                    "(make them with moments --by-month-hemisphere)"
                )
            key = (m.months[0], m.hemisphere)
            if key in by_slot:
                raise ValidationError(f"sectors: duplicate moments row for {key}")
            by_slot[key] = m
        references = None
        if args.reference:
            references = {}
            for m in _reference_lookup(args.reference).values():
                if len(m.months) != 1:
                    raise ValidationError("sectors: reference rows must be single-month")
                references[(m.months[0], m.hemisphere)] = m
        params = DamageParams(a=args.a, c=args.c)
        losses = monthly_damage(coeffs, by_slot, params, references)
        rows = []
        for j, sector in enumerate(coeffs.sectors):
            for month in range(MONTHS_PER_YEAR):
                rows.append((sector, month + 1, losses[month, j]))
            rows.append((sector, "ALL", float(losses[:, j].sum())))
        rows.append(("TOTAL", "ALL", float(losses.sum())))
        _write_table(args.out, ("sector", "month", "loss_fraction"),
                     rows, "sectors", resolved, args.json)
        return

    if args.table == "seasonal":
        table = seasonal_params(cal)
        rows = [
            (sector, *table[j]) for j, sector in enumerate(cal.sectors)
        ]
        rows.append(("TOTAL", *table.sum(axis=0)))
        _write_table(args.out, ("sector", *SEASONS), rows, "sectors",
                     resolved, args.json)
    elif args.table == "monthly":
        shares = {}
        if args.nh_share is not None or args.sh_share is not None:
            _require(args, "sectors", "nh_share", "sh_share")
            shares = {"nh_share": args.nh_share, "sh_share": args.sh_share}
        coeffs = monthly_params(cal, **shares)
        rows = []
        for j, sector in enumerate(coeffs.sectors):
            for month in range(MONTHS_PER_YEAR):
                for h, hemi in enumerate(HEMISPHERES):
                    rows.append((sector, month + 1, hemi, coeffs.coeff[month, j, h]))
        rows.append(("TOTAL", "ALL", "BOTH", coeffs.total))
        _write_table(args.out, ("sector", "month", "hemisphere", "coefficient"),
                     rows, "sectors", resolved, args.json)
    else:
        raise ValidationError("sectors: pass --table seasonal|monthly or --damages")


def _load_regional(args):
    if args.params is not None:
        return load_regional_params(args.params)
    return builtin_regional_params()


def _cmd_regions(args):
    _apply_config(args, "regions")
    _default(args, "table", False)
    _default(args, "damages", False)
    _require(args, "regions", "out")
    params = _load_regional(args)
    resolved = _resolved(args, "regions")

    if args.damages:
        if args.moments is None or args.gdp is None:
            raise ValidationError("regions: --damages needs --moments and --gdp")
        rows_in = _read_table(args.moments)
        if len(rows_in) != 1:
            raise ValidationError("regions: --moments must hold exactly one row")
        m = _moments_from_row(rows_in[0], "moments")
        ref_sq = 0.0
        if args.reference:
            ref_rows = _read_table(args.reference)
            if len(ref_rows) != 1:
                raise ValidationError("regions: --reference must hold exactly one row")
            ref = _moments_from_row(ref_rows[0], "reference")
            if ref.variant != m.variant:
                raise ValidationError("regions: reference variant mismatch")
            ref_sq = ref.mean_sq
        gdp = load_gdp(args.gdp)
        year = args.year if args.year is not None else int(rows_in[0]["year"])
        needed = set(params) | {"GLOBAL"}
        missing = needed - set(gdp)
        if missing:
            raise ValidationError(f"regions: GDP file missing {sorted(missing)}")

        def gdp_at(region):
            traj = gdp[region]
            if year not in traj.years:
                from .economics import interpolate_gdp
                traj = interpolate_gdp(traj)
                if year not in traj.years:
                    raise ValidationError(
                        f"regions: GDP for {region} does not cover {year}"
                    )
            return float(traj.values[list(traj.years).index(year)])

        fractions = {
            r: params[r].loss_fraction(m.mean_sq, ref_sq) for r in params
        }
        global_fraction = DamageParams().alpha * (m.mean_sq - ref_sq)
        scaled = harmonize_regions(
            fractions, {r: gdp_at(r) for r in params},
            global_fraction, gdp_at("GLOBAL"),
        )
        rows = [(r, fractions[r], scaled[r]) for r in sorted(params)]
        rows.append(("TOTAL", global_fraction, sum(scaled.values())))
        _write_table(args.out, ("region", "loss_fraction", "loss_currency"),
                     rows, "regions", resolved, args.json)
        return

    rows = [
        (r, params[r].gamma, params[r].alpha, params[r].alpha_fit)
        for r in sorted(params)
    ]
    _write_table(args.out, ("region", "gamma", "alpha", "alpha_fit"),
                 rows, "regions", resolved, args.json)


def _cmd_pv(args):
    _apply_config(args, "pv")
    _default(args, "region", "GLOBAL")
    _default(args, "base_year", 2020)
    _require(args, "pv", "losses", "gdp", "rate", "window", "out")
    rows_in = _read_table(args.losses)
    variants = sorted({row["variant"] for row in rows_in})
    if len(variants) != 1:
        raise ValidationError(
            f"pv: losses table mixes variants {variants}; run one at a time"
        )
    losses = {}
    for row in rows_in:
        year = int(row["year"])
        if year in losses:
            raise ValidationError(f"pv: duplicate loss row for year {year}")
        losses[year] = float(row["loss_fraction"])
    gdp = load_gdp(args.gdp)
    if args.region not in gdp:
        raise ValidationError(f"pv: region {args.region!r} not in GDP file")
    discount = DiscountSpec(rate=args.rate, base_year=args.base_year)
    window = (int(args.window[0]), int(args.window[1]))
    table = pv_rows(losses, gdp[args.region], discount, window)
    total = present_value(losses, gdp[args.region], discount, window, variants[0])
    rows = [
        (year, variants[0], frac, cur, disc) for year, frac, cur, disc in table
    ]
    rows.append(("TOTAL", variants[0], "", "", total.value))
    columns = ("year", "variant", "loss_fraction", "loss_currency", "pv_contribution")
    _write_table(args.out, columns, rows, "pv", _resolved(args, "pv"), args.json)


def _pulse_from_args(args) -> PulseResponse:
    spec = {k: getattr(args, f"pulse_{k}") for k in _PULSE_KEYS}
    if all(v is None for v in spec.values()):
        return DEFAULT_PULSE
    missing = [k for k, v in spec.items() if v is None and k != "t0"]
    if missing:
        raise ValidationError(f"scc: incomplete pulse spec, missing {missing}")
    if spec["t0"] is None:
        spec["t0"] = 2020
    return PulseResponse(**spec)


def _cmd_scc(args):
    _apply_config(args, "scc")
    _default(args, "variants", list(VARIANTS))
    _default(args, "rates", [0.04, 0.03, 0.015])
    _default(args, "horizon", (2020, 2100))
    _default(args, "gdp_scale", 1.0e9)
    _default(args, "study", "average")
    _default(args, "scenario", "")
    _default(args, "a", 0.0201)
    _default(args, "c", 2.5)
    _require(args, "scc", "series", "gdp", "out")
    if isinstance(args.variants, str):
        args.variants = _CAST["strs"](args.variants)
    for v in args.variants:
        if v not in VARIANTS:
            raise ValidationError(f"scc: unknown variant {v!r}")
    series = load_global_series(args.series)
    gdp = load_gdp(args.gdp)
    if "GLOBAL" not in gdp:
        raise ValidationError("scc: GDP file needs a GLOBAL region")
    factors = None
    if args.pattern is not None:
        factors = pattern_factors(PatternScaler.from_field(load_grid(args.pattern)))
    pulse = _pulse_from_args(args)
    params = DamageParams(a=args.a, c=args.c)
    horizon = (int(args.horizon[0]), int(args.horizon[1]))
    common = dict(
        gdp=gdp["GLOBAL"], params=params, pulse=pulse, factors=factors,
        horizon=horizon, gdp_scale=args.gdp_scale, scenario=args.scenario,
    )

    rows = []
    for variant in args.variants:
        for rate in args.rates:
            if args.breakdown == "sector":
                cal = _load_cal(args)
                result = scc_by_sector(
                    series, variant=variant, rate=rate,
                    coeffs=monthly_params(cal), **common,
                )
            elif args.breakdown == "region":
                regional = _load_regional(args)
                missing = (set(regional) | {"GLOBAL"}) - set(gdp)
                if missing:
                    raise ValidationError(f"scc: GDP file missing {sorted(missing)}")
                result = scc_by_region(
                    series, variant=variant, rate=rate,
                    regional_params=regional,
                    regional_gdp={r: gdp[r] for r in regional},
                    **common,
                )
            elif args.breakdown is None:
                result = scc(series, variant=variant, rate=rate, **common)
            else:
                raise ValidationError("scc: --breakdown must be sector or region")
            if result.breakdown:
                for name in result.breakdown:
                    rows.append((args.scenario, variant, rate, name,
                                 result.breakdown[name]))
            rows.append((args.scenario, variant, rate, "TOTAL", result.value))
    columns = ("scenario", "variant", "rate", "name", "scc_per_tco2")
    _write_table(args.out, columns, rows, "scc", _resolved(args, "scc"), args.json)


def _cmd_decompose(args):
    _apply_config(args, "decompose")
    _require(args, "decompose", "none", "tvar", "svar", "stvar", "out")
    sc, tc, interaction = decompose(args.none, args.tvar, args.svar, args.stvar)
    rows = [(sc * 100.0, tc * 100.0, interaction * 100.0)]
    columns = ("spatial_pct", "temporal_pct", "interaction_pct")
    _write_table(args.out, columns, rows, "decompose",
                 _resolved(args, "decompose"), args.json)


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sp):
    sp.add_argument("--config", help="INI file supplying unset options")
    sp.add_argument("--out", help="output path (CSV table or grid manifest)")
    sp.add_argument("--json", action="store_true",
                    help="also write a JSON mirror next to the CSV")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads; never changes output bytes")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="climdamage", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version",
                        version=f"climdamage {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("pattern", help="fit a per-cell scaling pattern")
    p.add_argument("--grid")
    p.add_argument("--series")
    p.add_argument("--payload-format", choices=("csv", "f32le"))
    p.add_argument("--min-years", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_pattern)

    p = sub.add_parser("climatology", help="centered rolling mean over years")
    p.add_argument("--grid")
    p.add_argument("--series")
    p.add_argument("--window", type=int)
    p.add_argument("--payload-format", choices=("csv", "f32le"))
    _add_common(p)
    p.set_defaults(func=_cmd_climatology)

    p = sub.add_parser("moments", help="warming moments for one variant")
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("--grid")
    p.add_argument("--series")
    p.add_argument("--pattern")
    p.add_argument("--window", type=int, nargs=2, metavar=("START", "END"))
    p.add_argument("--per-year", action=argparse.BooleanOptionalAction)
    p.add_argument("--months", help="calendar months, e.g. 6,7,8 or 1-12")
    p.add_argument("--hemisphere", choices=("GLOBAL", "NH", "SH"))
    p.add_argument("--by-month-hemisphere", action=argparse.BooleanOptionalAction,
                   help="emit one row per calendar month and hemisphere")
    _add_common(p)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("damages", help="quadratic losses from a moments table")
    p.add_argument("--moments")
    p.add_argument("--reference")
    p.add_argument("--a", type=float)
    p.add_argument("--c", type=float)
    _add_common(p)
    p.set_defaults(func=_cmd_damages)

    p = sub.add_parser("sectors", help="sector coefficient tables and damages")
    p.add_argument("--table", choices=("seasonal", "monthly"))
    p.add_argument("--damages", action=argparse.BooleanOptionalAction)
    p.add_argument("--moments")
    p.add_argument("--reference")
    p.add_argument("--calibration")
    p.add_argument("--study")
    p.add_argument("--a", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--nh-share", type=float)
    p.add_argument("--sh-share", type=float)
    _add_common(p)
    p.set_defaults(func=_cmd_sectors)

    p = sub.add_parser("regions", help="regional parameters and damages")
    p.add_argument("--table", action=argparse.BooleanOptionalAction)
    p.add_argument("--damages", action=argparse.BooleanOptionalAction)
    p.add_argument("--moments")
    p.add_argument("--reference")
    p.add_argument("--gdp")
    p.add_argument("--year", type=int)
    p.add_argument("--params")
    _add_common(p)
    p.set_defaults(func=_cmd_regions)

    p = sub.add_parser("pv", help="present value of a loss path")
    p.add_argument("--losses")
    p.add_argument("--gdp")
    p.add_argument("--region")
    p.add_argument("--rate", type=float)
    p.add_argument("--base-year", type=int)
    p.add_argument("--window", type=int, nargs=2, metavar=("START", "END"))
    _add_common(p)
    p.set_defaults(func=_cmd_pv)

    p = sub.add_parser("scc", help="social cost of carbon")
    p.add_argument("--series")
    p.add_argument("--gdp")
    p.add_argument("--pattern")
    p.add_argument("--variants", type=_CAST["strs"])
    p.add_argument("--rates", type=_CAST["floats"])
    p.add_argument("--horizon", type=int, nargs=2, metavar=("START", "END"))
    p.add_argument("--gdp-scale", type=float,
                   help="dollars per GDP unit (default 1e9: GDP in billions)")
    p.add_argument("--breakdown", choices=("sector", "region"))
    p.add_argument("--calibration")
    p.add_argument("--study")
    p.add_argument("--params")
    p.add_argument("--scenario")
    p.add_argument("--a", type=float)
    p.add_argument("--c", type=float)
    for key in _PULSE_KEYS:
        p.add_argument(f"--pulse-{key}", type=(int if key == "t0" else float))
    _add_common(p)
    p.set_defaults(func=_cmd_scc)

    p = sub.add_parser("decompose", help="split the variability effect")
    p.add_argument("--none", type=float)
    p.add_argument("--tvar", type=float)
    p.add_argument("--svar", type=float)
    p.add_argument("--stvar", type=float)
    _add_common(p)
    p.set_defaults(func=_cmd_decompose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ComputationError, ArithmeticError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
