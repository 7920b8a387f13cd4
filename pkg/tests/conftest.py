import math
import os

import pytest

os.environ.setdefault('SPDC_ENV', 'testing')

from spdcfocus import use_settings  # noqa: E402
from spdcfocus.models import (  # noqa: E402
    BeamGeometry, CrystalConfig, PumpSpectrum, SpdcSetup, SpectrumKind,
)
from spdcfocus.services.dispersion import KTP_Y, KTP_Z_DEFAULT  # noqa: E402

use_settings('testing')

UM = 1e-6
MM = 1e-3
NM = 1e-9

TYPE_0 = (KTP_Z_DEFAULT, KTP_Z_DEFAULT, KTP_Z_DEFAULT)
TYPE_II = (KTP_Y, KTP_Z_DEFAULT, KTP_Y)


def build_setup(length=1 * MM, w_p=20 * UM, w_s=20 * UM, w_i=None, z_p=0.0, z_s=0.0, z_i=0.0,
                models=TYPE_0, pulse_duration=None, poling_period=None):
    """Degenerate 405 nm → 810 + 810 nm ppKTP scenario in SI units."""
    spectrum = (PumpSpectrum() if pulse_duration is None
                else PumpSpectrum(SpectrumKind.PULSED_GAUSSIAN, pulse_duration))
    return SpdcSetup(
        crystal=CrystalConfig(length, 405 * NM, 810 * NM, poling_period=poling_period),
        models=models,
        pump=BeamGeometry(w_p, z_p),
        signal=BeamGeometry(w_s, z_s),
        idler=BeamGeometry(w_s if w_i is None else w_i, z_i),
        spectrum=spectrum,
    )


@pytest.fixture(autouse=True)
def testing_settings():
    use_settings('testing')


@pytest.fixture
def make_setup():
    return build_setup


@pytest.fixture
def thin_setup():
    """1 mm crystal with equal 20 µm waists, all foci centred."""
    return build_setup()


@pytest.fixture
def type2_setup():
    """10 mm type-II crystal, γ = √2, pump focused 5 mm off centre."""
    return build_setup(length=10 * MM, w_p=math.sqrt(2) * 20 * UM, models=TYPE_II, z_p=5 * MM)


@pytest.fixture
def pulsed_setup():
    return build_setup(length=10 * MM, w_p=20 * UM / math.sqrt(2), models=TYPE_II,
                       pulse_duration=0.5e-12)
