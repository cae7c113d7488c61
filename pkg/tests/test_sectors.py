from __future__ import annotations

import numpy as np
import pytest

from climdamage import (
    DamageParams,
    SectorCalibration,
    ValidationError,
    builtin_calibration,
    load_calibration,
    monthly_damage,
    monthly_params,
    moments_from_stats,
    seasonal_params,
)
from climdamage.sectors import (
    MONTH_SEASON,
    NH_GDP_SHARE,
    SECTORS,
    SH_GDP_SHARE,
)


def slot_moments(values_by, variant="tvar"):
    """(month, hemisphere) -> moments with the given mean square."""
    out = {}
    for hemi in ("NH", "SH"):
        for month in range(1, 13):
            mean_sq = values_by(month, hemi)
            out[(month, hemi)] = moments_from_stats(
                0.0, mean_sq, variant, (2000, 2000),
                hemisphere=hemi, months=(month,),
            )
    return out


def test_builtin_table_shape():
    cal = builtin_calibration()
    assert cal.sectors == SECTORS
    assert len(cal.sectors) == 15


def test_builtin_total_near_two_percent():
    cal = builtin_calibration()
    assert abs(cal.total_impact) == pytest.approx(0.0201, abs=2e-4)


def test_time_use_is_a_benefit():
    cal = builtin_calibration()
    idx = cal.sectors.index("Time use")
    assert cal.impacts[idx] == pytest.approx(-0.0029, rel=1e-12)


def test_alternative_studies_keep_their_own_totals():
    # each source study carries its own aggregate; only the average
    # reproduces the 2.01% default (to table rounding)
    totals = {"fankhauser": 0.0159, "berz": 0.0182, "tol": 0.0252,
              "nordhaus": 0.0205, "average": 0.0200}
    for study, expected in totals.items():
        cal = builtin_calibration(study)
        assert cal.total_impact == pytest.approx(expected, abs=1e-12)


def test_unknown_study_rejected():
    with pytest.raises(ValidationError):
        builtin_calibration("stern")


# --- seasonal coefficients --------------------------------------------------


def test_water_is_all_summer():
    cal = builtin_calibration()
    table = seasonal_params(cal)
    idx = cal.sectors.index("Water")
    # spring, summer, fall, winter
    assert table[idx].tolist() == pytest.approx([0.0, 0.0024, 0.0, 0.0])


def test_time_use_winter_benefit():
    cal = builtin_calibration()
    table = seasonal_params(cal)
    idx = cal.sectors.index("Time use")
    assert table[idx, 3] == pytest.approx(-0.00145, rel=1e-12)


def test_seasonal_rows_recover_impacts():
    cal = builtin_calibration()
    table = seasonal_params(cal)
    assert np.allclose(table.sum(axis=1), cal.impacts, rtol=1e-12)


def test_seasonal_totals():
    table = seasonal_params(builtin_calibration())
    totals_pct = table.sum(axis=0) * 100.0
    assert totals_pct == pytest.approx([0.29, 0.92, 0.29, 0.52], abs=0.01)


# --- monthly coefficients ---------------------------------------------------


def test_month_season_maps_shift_by_half_year():
    for month in range(12):
        assert MONTH_SEASON["SH"][month] == (MONTH_SEASON["NH"][month] + 2) % 4


def test_energy_january_northern_coefficient():
    coeffs = monthly_params(builtin_calibration())
    idx = coeffs.sectors.index("Energy")
    # winter share 0.5 of 0.12%, one of three winter months, NH GDP share
    expected = NH_GDP_SHARE * (0.5 * 0.0012) / 3.0
    assert coeffs.coeff[0, idx, 0] == pytest.approx(expected, rel=1e-12)
    assert coeffs.coeff[0, idx, 0] * 100.0 == pytest.approx(0.01783, abs=5e-6)


def test_monthly_coefficients_conserve_total():
    cal = builtin_calibration()
    coeffs = monthly_params(cal)
    assert coeffs.total == pytest.approx(cal.total_impact, rel=1e-12, abs=1e-18)
    assert np.allclose(coeffs.sector_totals(), cal.impacts, rtol=1e-12)


def test_gdp_shares_default_values():
    assert NH_GDP_SHARE == pytest.approx(77800.0 / 87270.0, rel=1e-15)
    assert NH_GDP_SHARE + SH_GDP_SHARE == pytest.approx(1.0, abs=1e-15)


def test_degenerate_share_puts_everything_north():
    cal = builtin_calibration()
    coeffs = monthly_params(cal, nh_share=1.0, sh_share=0.0)
    assert np.all(coeffs.coeff[:, :, 1] == 0.0)
    assert coeffs.total == pytest.approx(cal.total_impact, rel=1e-12)


def test_shares_must_sum_to_one():
    with pytest.raises(ValidationError):
        monthly_params(builtin_calibration(), nh_share=0.6, sh_share=0.6)


def test_water_active_months():
    coeffs = monthly_params(builtin_calibration())
    idx = coeffs.sectors.index("Water")
    nh_live = {m + 1 for m in range(12) if coeffs.coeff[m, idx, 0] != 0.0}
    sh_live = {m + 1 for m in range(12) if coeffs.coeff[m, idx, 1] != 0.0}
    assert nh_live == {6, 7, 8}    # northern summer
    assert sh_live == {12, 1, 2}   # southern summer


# --- monthly damages --------------------------------------------------------


def test_uniform_moments_reduce_to_annual_aggregate():
    # identical mean square everywhere makes the monthly machinery collapse
    # onto the plain quadratic with the sector-sum coefficient
    cal = builtin_calibration()
    coeffs = monthly_params(cal)
    params = DamageParams()
    msq = 6.25
    losses = monthly_damage(coeffs, slot_moments(lambda m, h: msq), params)
    expected = cal.total_impact * msq / (params.c ** 2)
    assert losses.sum() == pytest.approx(expected, rel=1e-12)


def test_zero_moments_zero_losses():
    coeffs = monthly_params(builtin_calibration())
    losses = monthly_damage(coeffs, slot_moments(lambda m, h: 0.0))
    assert np.all(losses == 0.0)


def test_water_loss_concentrates_in_summer_months():
    coeffs = monthly_params(builtin_calibration())
    losses = monthly_damage(coeffs, slot_moments(lambda m, h: 4.0))
    idx = coeffs.sectors.index("Water")
    live = {m + 1 for m in range(12) if losses[m, idx] != 0.0}
    assert live == {1, 2, 6, 7, 8, 12}
    assert np.all(losses[:, idx] >= 0.0)


def test_time_use_always_a_benefit():
    coeffs = monthly_params(builtin_calibration())
    losses = monthly_damage(coeffs, slot_moments(lambda m, h: 4.0))
    idx = coeffs.sectors.index("Time use")
    assert np.all(losses[:, idx] <= 0.0)
    assert losses[:, idx].sum() < 0.0


def test_winter_only_warming_flips_seasonal_sectors():
    # warm only northern winter months: energy pays, water does not
    coeffs = monthly_params(builtin_calibration(), nh_share=1.0, sh_share=0.0)
    nh_winter = {12, 1, 2}
    losses = monthly_damage(
        coeffs, slot_moments(lambda m, h: 4.0 if m in nh_winter else 0.0)
    )
    water = coeffs.sectors.index("Water")
    energy = coeffs.sectors.index("Energy")
    assert losses[:, water].sum() == 0.0
    assert losses[:, energy].sum() > 0.0


def test_references_subtract_per_slot():
    coeffs = monthly_params(builtin_calibration())
    now = slot_moments(lambda m, h: 5.0)
    ref = slot_moments(lambda m, h: 1.0)
    direct = monthly_damage(coeffs, slot_moments(lambda m, h: 4.0))
    via_ref = monthly_damage(coeffs, now, references=ref)
    assert np.allclose(via_ref, direct, rtol=1e-12)


def test_missing_slot_rejected():
    coeffs = monthly_params(builtin_calibration())
    slots = slot_moments(lambda m, h: 1.0)
    del slots[(7, "SH")]
    with pytest.raises(ValidationError):
        monthly_damage(coeffs, slots)


def test_mixed_variants_rejected():
    coeffs = monthly_params(builtin_calibration())
    slots = slot_moments(lambda m, h: 1.0, variant="tvar")
    slots[(3, "NH")] = moments_from_stats(
        0.0, 1.0, "stvar", (2000, 2000), hemisphere="NH", months=(3,)
    )
    with pytest.raises(ValidationError):
        monthly_damage(coeffs, slots)


# --- calibration overrides --------------------------------------------------


def test_load_calibration_csv(tmp_path):
    rows = ["sector,impact,spring,summer,fall,winter"]
    rows.append("Heat,1.01,0.25,0.25,0.25,0.25")
    rows.append("Cold,1.00,0,0.5,0,0.5")
    (tmp_path / "cal.csv").write_text("\n".join(rows) + "\n")
    cal = load_calibration(tmp_path / "cal.csv")
    assert cal.sectors == ("Heat", "Cold")
    assert cal.total_impact == pytest.approx(0.0201, rel=1e-12)


def test_season_weights_must_sum_to_one():
    with pytest.raises(ValidationError):
        SectorCalibration(("X",), np.array([0.0201]),
                          np.array([[0.5, 0.5, 0.5, 0.0]]))


def test_custom_total_preserved():
    # the container does not force the default aggregate; callers may
    # supply their own total, as the per-study tables do
    cal = SectorCalibration(("X",), np.array([0.05]),
                            np.array([[0.25, 0.25, 0.25, 0.25]]))
    assert cal.total_impact == 0.05
