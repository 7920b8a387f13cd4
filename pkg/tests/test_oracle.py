import math

import numpy as np
import pytest
from scipy.integrate import quad

from spdcfocus.exceptions import ConfigError, OracleConvergenceError, ParaxialityError
from spdcfocus.models import FGM, DetuningPair, LGIndex, OracleGrid
from spdcfocus.services import oracle
from spdcfocus.services.amplitude import amplitude_block, overlap_amplitude
from spdcfocus.services.modes import mode_block
from spdcfocus.services.oracle import brute_force_amplitude, mode_function, pump_profile
from tests.conftest import MM


def test_mode_function_on_axis(thin_setup):
    value = mode_function(thin_setup, np.zeros(2), np.zeros(2), DetuningPair())
    expected = thin_setup.pump.waist / math.sqrt(2 * math.pi) * thin_setup.crystal.length
    assert value == pytest.approx(expected, rel=1e-12)


def test_pump_profile_is_gaussian(thin_setup):
    w_p = thin_setup.pump.waist
    q = np.array([[0.0, 0.0], [2.0 / w_p, 0.0]])
    values = pump_profile(thin_setup, q)
    assert values[1] / values[0] == pytest.approx(math.exp(-1.0))


def test_pump_profile_carries_unit_power(thin_setup):
    w_p = thin_setup.pump.waist
    radial, _ = quad(lambda rho: pump_profile(thin_setup, np.array([rho, 0.0])) ** 2 * rho,
                     0.0, 12.0 / w_p, epsabs=0.0, epsrel=1e-12)
    power = 2 * math.pi * radial
    assert power == pytest.approx(1.0, rel=1e-9)


def test_mode_function_rejects_non_paraxial_momenta(thin_setup):
    with pytest.raises(ParaxialityError):
        mode_function(thin_setup, np.array([1e7, 0.0]), np.zeros(2), DetuningPair())


def test_fundamental_amplitude_matches_closed_form(thin_setup):
    closed = overlap_amplitude(thin_setup, FGM, FGM, DetuningPair()).value
    brute = brute_force_amplitude(thin_setup, FGM, FGM, DetuningPair())
    assert abs(brute) ** 2 == pytest.approx(abs(closed) ** 2, rel=1e-2)


@pytest.mark.slow
def test_cached_and_streamed_projections_agree(make_setup, monkeypatch):
    setup = make_setup(z_p=0.5 * MM, z_s=-0.3 * MM)
    mode = LGIndex(1, 1)
    cached = brute_force_amplitude(setup, mode, LGIndex(0, -1), DetuningPair())
    monkeypatch.setattr(oracle, 'FIELD_CACHE_CELLS', 0)
    streamed = brute_force_amplitude(setup, mode, LGIndex(0, -1), DetuningPair())
    assert streamed == pytest.approx(cached, rel=1e-9)


def test_off_rule_pair_integrates_to_zero(thin_setup):
    on_rule = brute_force_amplitude(thin_setup, FGM, FGM, DetuningPair())
    off_rule = brute_force_amplitude(thin_setup, FGM, LGIndex(0, 1), DetuningPair())
    assert abs(off_rule) ** 2 < 1e-6 * abs(on_rule) ** 2


@pytest.mark.slow
@pytest.mark.parametrize('shift', [0.0, 2 * MM, -2 * MM])
def test_block_matches_closed_form(make_setup, shift):
    setup = make_setup(z_p=shift, z_s=-shift, z_i=shift)
    block = mode_block(1, 1)
    closed = np.abs(amplitude_block(setup, block, block, DetuningPair())) ** 2
    brute = np.array([[abs(brute_force_amplitude(setup, s, i, DetuningPair())) ** 2
                       for i in block] for s in block])
    origin = block.index(FGM)
    closed /= closed[origin, origin]
    brute /= brute[origin, origin]
    significant = closed > 1e-3 * closed.max()
    np.testing.assert_allclose(brute[significant], closed[significant], rtol=1e-2)
    assert np.all(brute[closed == 0] < 1e-6 * brute.max())


def test_cutoff_below_mode_extent(thin_setup):
    with pytest.raises(ConfigError, match='radial cutoff'):
        brute_force_amplitude(thin_setup, FGM, FGM, DetuningPair(), OracleGrid(radial_cutoff=1e3))


def test_cutoff_beyond_paraxial_regime(thin_setup):
    with pytest.raises(ParaxialityError):
        brute_force_amplitude(thin_setup, FGM, FGM, DetuningPair(), OracleGrid(radial_cutoff=1e8))


def test_grid_too_coarse():
    with pytest.raises(ConfigError):
        OracleGrid(radial_nodes=4)


def test_unsettled_refinement_raises(thin_setup, monkeypatch):
    monkeypatch.setattr(oracle, 'CONVERGENCE_RTOL', 0.0)
    with pytest.raises(OracleConvergenceError) as excinfo:
        brute_force_amplitude(thin_setup, FGM, FGM, DetuningPair())
    assert len(excinfo.value.estimates) == 2
