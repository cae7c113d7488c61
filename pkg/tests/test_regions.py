from __future__ import annotations

import numpy as np
import pytest

from climdamage import (
    ComputationError,
    ValidationError,
    builtin_regional_params,
    fit_quadratic,
    harmonize_regions,
    load_regional_params,
    moments_from_stats,
    regional_damage,
)
from climdamage.regions import DEFAULT_FIT_GRID, REGIONS, _RICE_COEFFS

# fitted quadratic coefficients (% GDP per degC^2) after folding in the
# linear term over the 0..6 degC grid
EXPECTED_ALPHA_FIT = {
    "US": 0.1414, "WEU": 0.1591, "JAPAN": 0.1617, "RUSSIA": 0.1151,
    "EURASIA": 0.1305, "CHINA": 0.1411, "INDIA": 0.2539, "MEAST": 0.2125,
    "AFRICA": 0.2644, "LAM": 0.1463, "OHI": 0.1564, "OASIA": 0.2074,
}


def lstsq_fold(gamma, alpha, grid):
    """Independent route: solve min ||T^2 b - (gamma T + alpha T^2)||."""
    design = (grid ** 2)[:, None]
    target = gamma * grid + alpha * grid ** 2
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    return float(coef[0])


def test_grid_ratio_is_441_over_2275():
    grid = DEFAULT_FIT_GRID
    assert np.sum(grid ** 3) / np.sum(grid ** 4) == pytest.approx(441.0 / 2275.0, rel=1e-15)


def test_all_twelve_fits_match_published_values():
    params = builtin_regional_params()
    assert set(params) == set(REGIONS)
    for region, expected in EXPECTED_ALPHA_FIT.items():
        assert params[region].alpha_fit == pytest.approx(expected, abs=5e-5), region


def test_closed_form_agrees_with_generic_least_squares(rng):
    grid = DEFAULT_FIT_GRID
    for region in REGIONS:
        gamma, alpha = _RICE_COEFFS[region]
        assert fit_quadratic(gamma, alpha, grid) == pytest.approx(
            lstsq_fold(gamma, alpha, grid), rel=1e-12, abs=1e-15
        )
    for _ in range(50):
        gamma, alpha = rng.normal(0.0, 0.5, size=2)
        assert fit_quadratic(gamma, alpha, grid) == pytest.approx(
            lstsq_fold(gamma, alpha, grid), rel=1e-12, abs=1e-15
        )


def test_zero_gamma_returns_alpha_exactly():
    assert fit_quadratic(0.0, 0.1414) == 0.1414


def test_degenerate_grid_rejected():
    with pytest.raises(ComputationError):
        fit_quadratic(0.1, 0.1, np.zeros(5))
    with pytest.raises(ValidationError):
        fit_quadratic(0.1, 0.1, np.array([]))


def test_regional_damage_scales_with_alpha_fit():
    params = builtin_regional_params()
    m = moments_from_stats(1.0, 1.0, "none", (2050, 2050))
    loss = regional_damage(params["US"], m)
    assert loss == pytest.approx(0.001414, rel=1e-12)
    # Africa is the most exposed region on this table
    losses = {r: regional_damage(params[r], m) for r in REGIONS}
    assert max(losses, key=losses.get) == "AFRICA"


def test_regional_damage_reference_subtraction():
    params = builtin_regional_params()
    m = moments_from_stats(2.0, 4.0, "none", (2050, 2050))
    ref = moments_from_stats(1.0, 1.0, "none", (1850, 1880))
    assert regional_damage(params["US"], m, ref) == pytest.approx(
        params["US"].alpha_fit / 100.0 * 3.0, rel=1e-12
    )


def test_regional_damage_variant_mismatch():
    params = builtin_regional_params()
    m = moments_from_stats(1.0, 1.0, "stvar", (2050, 2050))
    ref = moments_from_stats(0.0, 0.0, "none", (1850, 1880))
    with pytest.raises(ValidationError):
        regional_damage(params["US"], m, ref)


def test_load_regional_params_csv(tmp_path):
    (tmp_path / "r.csv").write_text(
        "region,gamma,alpha\nNORTH,0.0,0.2\nSOUTH,0.1,0.1\n"
    )
    params = load_regional_params(tmp_path / "r.csv")
    assert params["NORTH"].alpha_fit == 0.2
    assert params["SOUTH"].alpha_fit == pytest.approx(0.1 + 0.1 * 441.0 / 2275.0)


def test_load_regional_duplicate_rejected(tmp_path):
    (tmp_path / "r.csv").write_text(
        "region,gamma,alpha\nX,0.0,0.2\nX,0.1,0.1\n"
    )
    with pytest.raises(ValidationError):
        load_regional_params(tmp_path / "r.csv")


# --- harmonization ----------------------------------------------------------


def test_harmonize_sums_to_global(rng):
    for _ in range(50):
        fractions = {r: float(f) for r, f in
                     zip(REGIONS, rng.uniform(0.001, 0.05, len(REGIONS)))}
        gdp = {r: float(g) for r, g in
               zip(REGIONS, rng.uniform(100.0, 30000.0, len(REGIONS)))}
        global_fraction = float(rng.uniform(0.001, 0.05))
        global_gdp = sum(gdp.values())
        scaled = harmonize_regions(fractions, gdp, global_fraction, global_gdp)
        assert sum(scaled.values()) == pytest.approx(
            global_fraction * global_gdp, rel=1e-12
        )


def test_harmonize_preserves_ratios():
    fractions = {"A": 0.02, "B": 0.04}
    gdp = {"A": 100.0, "B": 50.0}
    scaled = harmonize_regions(fractions, gdp, 0.03, 200.0)
    assert scaled["B"] / scaled["A"] == pytest.approx(1.0, rel=1e-12)
    assert sum(scaled.values()) == pytest.approx(6.0, rel=1e-14)


def test_harmonize_zero_regional_with_global_loss():
    with pytest.raises(ComputationError):
        harmonize_regions({"A": 0.0}, {"A": 100.0}, 0.01, 100.0)


def test_harmonize_all_zero_is_identity():
    scaled = harmonize_regions({"A": 0.0, "B": 0.0},
                               {"A": 1.0, "B": 2.0}, 0.0, 3.0)
    assert scaled == {"A": 0.0, "B": 0.0}


def test_harmonize_region_mismatch():
    with pytest.raises(ValidationError):
        harmonize_regions({"A": 0.1}, {"A": 1.0, "B": 2.0}, 0.1, 3.0)
