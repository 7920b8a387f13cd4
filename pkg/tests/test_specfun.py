from pathlib import Path

import mpmath
import numpy as np
import pytest

from spdcfocus.exceptions import PoleError, SeriesConvergenceError, SpecialFunctionDomainError
from spdcfocus.models import Transformation
from spdcfocus.services.specfun import hyp2f1_regularized, log_gamma

CASES_FILE = Path(__file__).parent / 'fixtures' / 'hyp2f1_cases.txt'


def _load_cases():
    cases = []
    for line in CASES_FILE.read_text().splitlines():
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        a, b, c, re_z, im_z = (float(v) for v in line.split())
        cases.append((a, b, c, complex(re_z, im_z)))
    return cases


def _reference(a, b, c, z):
    with mpmath.workdps(40):
        return complex(mpmath.hyp2f1(a, b, c, z) / mpmath.gamma(c))


def _random_parameters(rng, count, radius, pfaff_safe):
    """(a, b, c, z) draws with |z| in ``radius`` where both series converge."""
    cases = []
    while len(cases) < count:
        a, b = rng.uniform(1.1, 6.0, size=2)
        c = int(rng.integers(1, 5))
        z = rng.uniform(*radius) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        if (pfaff_safe or abs(z) > 0.8) and z.real > 0.4:
            continue
        cases.append((float(a), float(b), c, complex(z)))
    return cases


_RNG = np.random.default_rng(1931)
CONTIGUITY_CASES = _random_parameters(_RNG, 100, (0.0, 0.95), pfaff_safe=False)
ANNULUS_CASES = _random_parameters(_RNG, 50, (0.5, 0.8), pfaff_safe=True)
LOG_GAMMA_POINTS = list(_RNG.uniform(-8.0, 20.0, 100)
                        + 1j * _RNG.choice([-1, 1], 100) * _RNG.uniform(0.1, 10.0, 100))


@pytest.mark.parametrize('a,b,c,z', _load_cases())
def test_hyp2f1_against_mpmath(a, b, c, z):
    value, diagnostics = hyp2f1_regularized(a, b, c, z)
    assert diagnostics.converged
    assert value == pytest.approx(_reference(a, b, c, z), rel=1e-10)


def test_transformation_choice():
    _, direct = hyp2f1_regularized(1.5, 2.5, 1, 0.5)
    assert direct.transformation is Transformation.NONE
    _, pfaff = hyp2f1_regularized(2, 3, 1, -4.0)
    assert pfaff.transformation is Transformation.PFAFF
    assert pfaff.terms_used <= 3


def test_terminating_series_is_a_polynomial():
    # c − a = −2: the Pfaff series stops after three terms whatever |z| is
    value, diagnostics = hyp2f1_regularized(3, 2.5, 1, -250.0 + 80.0j)
    assert diagnostics.terms_used <= 4
    assert value == pytest.approx(_reference(3, 2.5, 1, -250.0 + 80.0j), rel=1e-10)


@pytest.mark.parametrize('a,b,c,z', ANNULUS_CASES)
def test_pfaff_agrees_with_direct_series(a, b, c, z):
    direct, _ = hyp2f1_regularized(a, b, c, z, transformation='none')
    pfaff, _ = hyp2f1_regularized(a, b, c, z, transformation='pfaff')
    assert pfaff == pytest.approx(direct, rel=1e-9)


def test_euler_transformation():
    value, diagnostics = hyp2f1_regularized(1.5, 2.5, 1, 0.3 + 0.1j, transformation=Transformation.EULER)
    assert diagnostics.transformation is Transformation.EULER
    assert value == pytest.approx(_reference(1.5, 2.5, 1, 0.3 + 0.1j), rel=1e-10)


@pytest.mark.parametrize('a,b,c,z', CONTIGUITY_CASES)
def test_contiguous_relation_in_a(a, b, c, z):
    # (c−a) F(a−1) + (2a − c + (b−a) z) F(a) + a (z−1) F(a+1) = 0
    lower, _ = hyp2f1_regularized(a - 1, b, c, z)
    middle, _ = hyp2f1_regularized(a, b, c, z)
    upper, _ = hyp2f1_regularized(a + 1, b, c, z)
    terms = [(c - a) * lower, (2 * a - c + (b - a) * z) * middle, a * (z - 1) * upper]
    assert abs(sum(terms)) <= 1e-9 * max(abs(t) for t in terms)


def test_array_argument():
    z = np.array([[0.2, -3.0], [0.5j, -20.0 + 1.0j]])
    values, diagnostics = hyp2f1_regularized(2, 3, 1, z)
    assert values.shape == z.shape
    assert diagnostics.transformation is Transformation.PFAFF
    for index in np.ndindex(z.shape):
        assert values[index] == pytest.approx(_reference(2, 3, 1, complex(z[index])), rel=1e-10)


def test_singular_point():
    with pytest.raises(SpecialFunctionDomainError, match='z = 1'):
        hyp2f1_regularized(1.5, 2.5, 1, 1.0)


def test_non_terminating_argument_outside_unit_disc():
    with pytest.raises(SpecialFunctionDomainError):
        hyp2f1_regularized(1.5, 2.5, 1, 3.0)


@pytest.mark.parametrize('a,b,c', [(0.0, 1.0, 1), (1.0, -2.0, 1), (1.0, 1.0, 1.5), (1.0, 1.0, 0)])
def test_unsupported_parameters(a, b, c):
    with pytest.raises(SpecialFunctionDomainError):
        hyp2f1_regularized(a, b, c, 0.1)


def test_series_budget_exhausted():
    with pytest.raises(SeriesConvergenceError) as excinfo:
        hyp2f1_regularized(1.5, 2.5, 1, 0.7, max_terms=5)
    diagnostics = excinfo.value.diagnostics
    assert not diagnostics.converged
    assert diagnostics.terms_used == 5
    assert diagnostics.max_terms == 5


@pytest.mark.parametrize('z', [2.5, 0.5 + 3.0j, -4.2 - 1.1j, 30.0 + 0.0j])
def test_log_gamma_against_mpmath(z):
    assert log_gamma(z) == pytest.approx(complex(mpmath.loggamma(z)), rel=1e-12)


@pytest.mark.parametrize('z', LOG_GAMMA_POINTS)
def test_log_gamma_recurrence(z):
    assert log_gamma(z + 1) == pytest.approx(log_gamma(z) + np.log(z), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize('z', [0, -1, -7])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        log_gamma(z)
