import math

import numpy as np
import pytest

from spdcfocus.exceptions import ConfigError, UndefinedPurityError
from spdcfocus.models import FGM, JsaGrid
from spdcfocus.services import analysis
from spdcfocus.services.modes import mode_block
from tests.conftest import MM, NM, TYPE_II, UM, build_setup


# -- purity -------------------------------------------------------------------

def test_purity_of_separable_and_maximally_entangled_states():
    separable = np.outer([1.0, 2.0, 0.5], [0.3, 1.0j, 2.0])
    assert analysis.schmidt_purity(separable) == pytest.approx(1.0)
    assert analysis.schmidt_purity(np.eye(4)) == pytest.approx(0.25)


def test_purity_is_scale_and_phase_invariant():
    rng = np.random.default_rng(3)
    matrix = rng.normal(size=(6, 5)) + 1j * rng.normal(size=(6, 5))
    reference = analysis.schmidt_purity(matrix)
    assert analysis.schmidt_purity(3.7 * np.exp(0.9j) * matrix) == pytest.approx(reference, rel=1e-13)


def test_purity_of_zero_matrix():
    with pytest.raises(UndefinedPurityError):
        analysis.schmidt_purity(np.zeros((3, 3)))


def _grid(values, step=2.0):
    axis = step * np.arange(values.shape[0])
    return JsaGrid(omega_s=axis, omega_i=step * np.arange(values.shape[1]), values=values)


def test_purity_trace_of_separable_amplitude():
    u = np.array([1.0, 2.0, 0.5])
    v = np.array([0.3, 1.0j, 2.0])
    trace = analysis.smf_purity_trace(_grid(np.outer(u, v)))
    expected = (2.0 * 2.0) ** 2 * np.sum(np.abs(u) ** 2) ** 2 * np.sum(np.abs(v) ** 2) ** 2
    assert trace == pytest.approx(expected, rel=1e-12)


def test_purity_trace_follows_the_amplitude_scale():
    rng = np.random.default_rng(5)
    values = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    trace = analysis.smf_purity_trace(_grid(values))
    scaled = _grid(2.0 * np.exp(0.4j) * values)
    assert analysis.smf_purity_trace(scaled) == pytest.approx(16.0 * trace, rel=1e-12)
    assert analysis.smf_spectral_purity(scaled) == pytest.approx(
        analysis.smf_spectral_purity(_grid(values)), rel=1e-12)
    assert analysis.smf_purity_trace(_grid(np.zeros((4, 4)))) == 0.0


# -- joint spectral amplitude -------------------------------------------------

def test_jsa_axes(pulsed_setup):
    axis = analysis.jsa_axes(pulsed_setup, points=49, span=6.0)
    assert len(axis) == 49
    assert axis[-1] == pytest.approx(6.0 / pulsed_setup.spectrum.pulse_duration)


@pytest.mark.parametrize('points,span', [(65, 3.0), (33, 6.0)])
def test_jsa_axes_rejects_poor_sampling(pulsed_setup, points, span):
    with pytest.raises(ConfigError):
        analysis.jsa_axes(pulsed_setup, points=points, span=span)


def test_jsa_needs_pulsed_pump(thin_setup):
    with pytest.raises(ConfigError, match='pulsed'):
        analysis.jsa_grid(thin_setup)


def test_jsa_is_symmetric_at_degeneracy(make_setup):
    setup = make_setup(length=5 * MM, z_s=1 * MM, z_i=1 * MM, pulse_duration=0.5e-12)
    jsa = analysis.jsa_grid(setup, points=33, span=4.0)
    scale = np.abs(jsa.values).max()
    np.testing.assert_allclose(jsa.values, jsa.values.T, rtol=0, atol=1e-8 * scale)


def test_smf_purity_matches_single_mode_truncation(pulsed_setup):
    axis = analysis.jsa_axes(pulsed_setup, points=33, span=4.0)
    jsa = analysis.jsa_grid(pulsed_setup, axis, axis)
    purity = analysis.smf_spectral_purity(jsa)
    assert jsa.values.shape == (33, 33)
    assert 0.0 < purity <= 1.0
    truncated = analysis.truncated_signal_purity(pulsed_setup, [FGM], [FGM], axis, axis)
    assert truncated == pytest.approx(purity, rel=1e-9)


def test_more_modes_cannot_raise_purity_above_one(pulsed_setup):
    axis = analysis.jsa_axes(pulsed_setup, points=33, span=4.0)
    block = mode_block(1, 1)
    purity = analysis.truncated_signal_purity(pulsed_setup, block, block, axis, axis)
    assert 0.0 < purity <= 1.0


# -- maps, scans and spectra --------------------------------------------------

def test_small_efficiency_map(make_setup):
    setup = make_setup(w_p=10 * UM, w_s=10 * UM, w_i=20 * UM)
    z = np.linspace(-1 * MM, 1 * MM, 5)
    result = analysis.efficiency_map(setup, z, z)
    assert result.values.shape == (5, 5)
    assert result.values.max() == pytest.approx(1.0)
    assert result.raw_max > 0
    raw = analysis.efficiency_map(setup, z, z, normalize=False)
    assert raw.values.max() == pytest.approx(result.raw_max)


def test_efficiency_map_mirror_symmetry(make_setup):
    setup = make_setup(length=5 * MM, w_p=15 * UM)
    z = np.linspace(-2 * MM, 2 * MM, 7)
    values = analysis.efficiency_map(setup, z, z).values
    # (z_s, z_i) -> (-z_i, -z_s) on a grid symmetric about zero
    np.testing.assert_allclose(values[::-1, ::-1].T, values, rtol=1e-6, atol=1e-12)


def test_pump_focus_scan_is_even(make_setup):
    setup = make_setup(length=5 * MM, w_p=30 * UM)
    scan = analysis.pump_focus_scan(setup, np.linspace(-4 * MM, 4 * MM, 9))
    np.testing.assert_allclose(scan.raw[::-1], scan.raw, rtol=1e-6)


def test_parallel_sweep_matches_serial(make_setup):
    setup = make_setup(length=2 * MM)
    z = np.linspace(-1 * MM, 1 * MM, 3)
    serial = analysis.pump_focus_scan(setup, z, workers=1)
    parallel = analysis.pump_focus_scan(setup, z, workers=2)
    np.testing.assert_allclose(parallel.raw, serial.raw, rtol=1e-14)


def test_focus_scan_without_half_maximum(thin_setup):
    scan = analysis.pump_focus_scan(thin_setup, np.linspace(-0.2 * MM, 0.2 * MM, 5))
    assert not scan.fwhm_defined
    assert scan.values.max() == pytest.approx(1.0)


def test_spectral_response_needs_continuous_wave(pulsed_setup):
    with pytest.raises(ConfigError):
        analysis.spectral_response(pulsed_setup, [809 * NM, 810 * NM])


def test_spectral_brightness_needs_enough_points(thin_setup):
    with pytest.raises(ConfigError, match='201'):
        analysis.spectral_brightness(thin_setup, points=101)


def test_signal_detunings(thin_setup):
    omega = analysis.signal_detunings(thin_setup, [810 * NM, 800 * NM])
    assert omega[0] == 0.0
    assert omega[1] > 0


def test_mode_distribution(thin_setup):
    table = analysis.mode_distribution(thin_setup, max_p=1, max_l=1)
    assert table.values.shape == (6, 6)
    assert table.values.max() == pytest.approx(1.0)
    assert table.entry(FGM, FGM) > 0
    assert table.raw[0, 0] == 0  # (0,-1|0,-1) violates ℓ_s + ℓ_i = 0


def test_mode_distributions_share_one_normalisation(thin_setup):
    tables = analysis.mode_distributions(
        [thin_setup, thin_setup.with_shifts(z_p=3 * MM)], max_p=0, max_l=1)
    assert max(t.values.max() for t in tables) == pytest.approx(1.0)
    assert tables[1].values.max() < 1.0


def test_unknown_objective(thin_setup):
    with pytest.raises(ConfigError, match='objective'):
        analysis.best_locked_shift(thin_setup, 0.0, objective='peak', shift_points=3)


# -- focal-shift behaviour of realistic crystals -------------------------------

def _type2(length, gamma, w_s=20 * UM, **kwargs):
    return build_setup(length=length, w_p=gamma * w_s, w_s=w_s, models=TYPE_II, **kwargs)


@pytest.mark.slow
def test_anti_diagonal_optimum_with_centred_pump(make_setup):
    setup = make_setup(w_p=10 * UM, w_s=10 * UM, w_i=20 * UM, models=TYPE_II)
    z = np.linspace(-2 * MM, 2 * MM, 41)
    result = analysis.efficiency_map(setup, z, z)
    z_s, z_i = result.peak.location
    assert abs(z_s + z_i) <= z[1] - z[0]


@pytest.mark.slow
def test_scenario_ratios_ten_millimetre_crystal():
    report = analysis.focal_scenarios(_type2(10 * MM, math.sqrt(2)), 5 * MM, objective='fixed')
    ratios = report.ratios
    assert ratios[1] == pytest.approx(0.89, abs=0.05)
    assert ratios[2] == pytest.approx(0.76, abs=0.05)
    assert ratios[3] == pytest.approx(0.94, abs=0.05)
    assert report.optimal_shift == pytest.approx(2.17 * MM, abs=0.3 * MM)


@pytest.mark.slow
def test_scenario_shift_twenty_millimetre_crystal():
    report = analysis.focal_scenarios(_type2(20 * MM, math.sqrt(2)), 5 * MM, objective='fixed')
    assert report.optimal_shift == pytest.approx(5.67 * MM, abs=0.7 * MM)
    # shifting the collection foci with the pump beats the all-centred arrangement
    assert report.ratios[2] > 1.0
    assert report.ratios[3] > 1.0


@pytest.mark.slow
def test_thin_crystal_barely_follows_the_pump():
    report = analysis.focal_scenarios(_type2(1 * MM, math.sqrt(2)), 5 * MM, objective='fixed',
                                      shift_range=(-2 * MM, 2 * MM))
    assert report.optimal_shift == pytest.approx(0.17 * MM, abs=0.1 * MM)


@pytest.mark.slow
def test_locked_foci_are_optimal_for_equal_waists():
    setup = _type2(10 * MM, math.sqrt(2), z_p=5 * MM)
    locked = analysis.best_locked_shift(setup, 5 * MM, objective='fixed')
    free = analysis.optimal_focus_pair(setup, start=(locked.location[0], locked.location[0]))
    assert free.value <= locked.value * (1 + 1e-4)


@pytest.mark.slow
def test_focus_scan_width_set_by_beam_ratio():
    z_p = np.linspace(-20 * MM, 20 * MM, 161)
    short = analysis.pump_focus_scan(_type2(10 * MM, 0.5), z_p)
    long = analysis.pump_focus_scan(_type2(30 * MM, 0.5), z_p)
    assert short.fwhm == pytest.approx(long.fwhm, rel=0.05)
    wide = analysis.pump_focus_scan(_type2(10 * MM, 2.0), np.linspace(-80 * MM, 80 * MM, 81))
    assert wide.fwhm > short.fwhm


@pytest.mark.slow
def test_brightness_peak_just_below_810nm():
    peak = analysis.spectral_brightness(_type2(20 * MM, 1.5), band=(809 * NM, 811 * NM), points=401)
    assert peak.status == 'refined'
    assert 809.8 * NM <= peak.wavelength <= 810.0 * NM


@pytest.mark.slow
def test_centred_foci_give_the_highest_brightness():
    setup = _type2(20 * MM, 1.5)
    band = (809 * NM, 811 * NM)
    centred = analysis.spectral_brightness(setup, band=band).value
    rng = np.random.default_rng(11)
    for z_p, z_s, z_i in rng.uniform(-10 * MM, 10 * MM, size=(20, 3)):
        shifted = setup.with_shifts(z_p=z_p, z_s=z_s, z_i=z_i)
        assert analysis.spectral_brightness(shifted, band=band).value <= centred * (1 + 1e-9)


@pytest.mark.slow
def test_spectrum_narrows_in_thick_crystals():
    thin = analysis.spectral_response(_type2(1 * MM, 1.0), np.linspace(780 * NM, 840 * NM, 601))
    thick = analysis.spectral_response(_type2(20 * MM, 1.0), np.linspace(809 * NM, 811 * NM, 401))
    assert thin.fwhm is not None and thick.fwhm is not None
    assert thin.fwhm >= 5 * thick.fwhm


@pytest.mark.slow
def test_shifted_pump_lowers_the_spectral_peak():
    setup = _type2(20 * MM, 1.0)
    wavelengths = np.linspace(808 * NM, 812 * NM, 801)
    centred = analysis.spectral_response(setup, wavelengths)
    shifted = analysis.spectral_response(setup.with_shifts(z_p=5 * MM), wavelengths)
    assert centred.raw.max() >= shifted.raw.max()


@pytest.mark.slow
def test_fundamental_mode_dominates_every_focal_arrangement():
    setup = _type2(10 * MM, math.sqrt(2))
    setups = [setup,
              setup.with_shifts(z_p=5 * MM),
              setup.with_shifts(z_p=5 * MM, z_s=5 * MM, z_i=5 * MM),
              setup.with_shifts(z_p=5 * MM, z_s=2.17 * MM, z_i=2.17 * MM)]
    for table in analysis.mode_distributions(setups, max_p=2, max_l=2):
        assert table.raw.max() == pytest.approx(table.raw[table.signal_modes.index(FGM),
                                                          table.idler_modes.index(FGM)])


@pytest.mark.slow
def test_wider_pump_spreads_the_mode_content():
    def significant(gamma):
        table = analysis.mode_distribution(_type2(1 * MM, gamma), max_p=2, max_l=2)
        return int(np.count_nonzero(table.values > 0.01))

    assert significant(math.sqrt(2)) > significant(1.0)


@pytest.mark.slow
def test_optimal_focus_is_linear_and_flattens_with_beam_ratio():
    z_p = np.linspace(-10 * MM, 10 * MM, 21)
    slopes = []
    for gamma in (0.5, 1.0, 1.5, 2.0):
        curve = analysis.optimal_signal_focus(
            _type2(20 * MM, gamma), z_p, band=(809.5 * NM, 810.5 * NM),
            shift_range=(-12 * MM, 12 * MM), shift_points=25,
        )
        assert curve.fit.r_squared >= 0.99
        assert curve.z_s_max[10] == pytest.approx(0.0, abs=0.05 * MM)
        slopes.append(curve.fit.slope)
    assert all(a > b for a, b in zip(slopes, slopes[1:]))


@pytest.mark.slow
def test_thin_crystal_focus_curve_is_flat():
    z_p = np.linspace(-10 * MM, 10 * MM, 21)
    curve = analysis.optimal_signal_focus(
        _type2(1 * MM, 1.5), z_p, shift_range=(-3 * MM, 3 * MM), shift_points=25,
    )
    fit = analysis.linear_fit(curve.z_p, curve.z_s_max)
    assert fit == curve.fit
    assert abs(fit.slope) < 0.1
    assert curve.z_s_max[10] == pytest.approx(0.0, abs=0.05 * MM)


def _purity_setup():
    return _type2(30 * MM, 1 / math.sqrt(2), pulse_duration=0.5e-12)


@pytest.mark.slow
def test_higher_modes_lower_the_signal_purity():
    setup = _purity_setup()
    axis = analysis.jsa_axes(setup, points=33, span=4.0)
    single = analysis.truncated_signal_purity(setup, [FGM], [FGM], axis, axis)
    block = mode_block(1, 1)
    assert analysis.truncated_signal_purity(setup, block, block, axis, axis) < single


@pytest.mark.slow
def test_purity_peaks_with_all_foci_centred():
    z = np.linspace(-10 * MM, 10 * MM, 21)
    result = analysis.purity_map(_purity_setup(), z, z, points=49, span=4.0, workers=4)
    assert result.values.shape == (21, 21)
    assert np.unravel_index(int(np.argmax(result.raw)), result.raw.shape) == (10, 10)
    assert np.mean(np.diag(result.values)) > np.mean(np.diag(result.values[:, ::-1]))
    assert np.all((result.schmidt > 0) & (result.schmidt <= 1))
