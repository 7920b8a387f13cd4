"""Value types for the focal-shift SPDC model."""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from spdcfocus.exceptions import ConfigError, InvalidDetuningError

ENERGY_CONSERVATION_RTOL = 1e-12


class Transformation(str, Enum):
    """Argument transformation applied before summing a hypergeometric series."""

    NONE = 'none'
    PFAFF = 'pfaff'
    EULER = 'euler'


class SpectrumKind(str, Enum):
    CONTINUOUS_WAVE = 'continuous_wave'
    PULSED_GAUSSIAN = 'pulsed_gaussian'


@dataclass(frozen=True)
class SellmeierModel:
    """Pole-form Sellmeier fit.

    n² = A + Σ_j B_j λ² / (λ² − C_j) − F λ², λ in µm, with
    ``coefficients = (A, F, B_1, C_1, B_2, C_2, ...)``.
    """

    name: str
    coefficients: Tuple[float, ...]
    valid_range: Tuple[float, float]  # µm

    def __post_init__(self):
        if len(self.coefficients) < 2 or len(self.coefficients) % 2:
            raise ConfigError(
                f'model {self.name!r} needs (A, F, B1, C1, ...) coefficients, '
                f'got {len(self.coefficients)} values'
            )
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise ConfigError(f'model {self.name!r} has an empty valid range {self.valid_range}')
        object.__setattr__(self, 'coefficients', tuple(float(v) for v in self.coefficients))
        object.__setattr__(self, 'valid_range', (float(lo), float(hi)))

    @property
    def poles(self):
        rest = self.coefficients[2:]
        return tuple(zip(rest[0::2], rest[1::2]))

    def to_dict(self):
        return {
            'name': self.name,
            'coefficients': list(self.coefficients),
            'valid_range': list(self.valid_range),
        }


@dataclass(frozen=True)
class OpticalConstants:
    """Wavenumber, inverse group velocity and GVD at one central wavelength."""

    wavelength: float  # m
    n: float
    k: float  # rad/m
    inv_u: float  # s/m
    G: float  # s²/m

    @property
    def group_index(self):
        return self.inv_u * SPEED_OF_LIGHT


@dataclass(frozen=True)
class CrystalConfig:
    """Crystal length, poling and the three central wavelengths (all SI)."""

    length: float
    pump_wavelength: float
    signal_wavelength: float
    idler_wavelength: Optional[float] = None
    poling_period: Optional[float] = None  # None: solve; math.inf: unpoled

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigError(f'crystal length must be positive, got {self.length}')
        if not (self.pump_wavelength > 0 and self.signal_wavelength > 0):
            raise ConfigError('central wavelengths must be positive')
        inv_idler = 1.0 / self.pump_wavelength - 1.0 / self.signal_wavelength
        if not inv_idler > 0:
            raise ConfigError('signal wavelength must exceed the pump wavelength')
        if self.idler_wavelength is None:
            object.__setattr__(self, 'idler_wavelength', 1.0 / inv_idler)
        elif not math.isclose(1.0 / self.idler_wavelength, inv_idler,
                              rel_tol=ENERGY_CONSERVATION_RTOL):
            raise ConfigError(
                'central wavelengths violate energy conservation '
                f'(1/λp = {1 / self.pump_wavelength:.12g}, '
                f'1/λs + 1/λi = {1 / self.signal_wavelength + 1 / self.idler_wavelength:.12g})'
            )
        if self.poling_period is not None and not self.poling_period > 0:
            raise ConfigError(f'poling period must be positive, got {self.poling_period}')

    @property
    def wavelengths(self):
        return self.pump_wavelength, self.signal_wavelength, self.idler_wavelength

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LGIndex:
    """Laguerre-Gaussian mode label (radial number p, OAM number ℓ)."""

    p: int
    l: int  # noqa: E741

    def __post_init__(self):
        if int(self.p) != self.p or int(self.l) != self.l:
            raise ConfigError(f'mode indices must be integers, got ({self.p}, {self.l})')
        if self.p < 0:
            raise ConfigError(f'radial number must be non-negative, got {self.p}')
        object.__setattr__(self, 'p', int(self.p))
        object.__setattr__(self, 'l', int(self.l))

    @classmethod
    def parse(cls, text):
        """Build from the ``"p,ℓ"`` notation used in run configurations."""
        try:
            p, l = (int(part) for part in text.split(','))  # noqa: E741
        except ValueError as exc:
            raise ConfigError(f'mode must be written "p,l", got {text!r}') from exc
        return cls(p, l)

    def __str__(self):
        return f'{self.p},{self.l}'


FGM = LGIndex(0, 0)


@dataclass(frozen=True)
class BeamGeometry:
    """Gaussian waist and focal-plane displacement from the crystal centre."""

    waist: float
    focal_shift: float = 0.0

    def __post_init__(self):
        if not self.waist > 0:
            raise ConfigError(f'beam waist must be positive, got {self.waist}')
        if not math.isfinite(self.focal_shift):
            raise ConfigError(f'focal shift must be finite, got {self.focal_shift}')


@dataclass(frozen=True)
class PumpSpectrum:
    kind: SpectrumKind = SpectrumKind.CONTINUOUS_WAVE
    pulse_duration: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', SpectrumKind(self.kind))
        if self.kind is SpectrumKind.PULSED_GAUSSIAN:
            if self.pulse_duration is None or not self.pulse_duration > 0:
                raise ConfigError('a pulsed pump needs a positive pulse duration')

    @property
    def is_cw(self):
        return self.kind is SpectrumKind.CONTINUOUS_WAVE


@dataclass(frozen=True)
class DetuningPair:
    """Signal and idler angular-frequency offsets from their centres (rad/s)."""

    omega_s: float = 0.0
    omega_i: float = 0.0

    @classmethod
    def continuous_wave(cls, omega_s):
        return cls(omega_s, -omega_s)

    @property
    def omega_p(self):
        return self.omega_s + self.omega_i

    def check_continuous_wave(self):
        if not math.isclose(self.omega_i, -self.omega_s, rel_tol=1e-12, abs_tol=1e-3):
            raise InvalidDetuningError(
                f'a continuous-wave pump requires omega_i = -omega_s, '
                f'got ({self.omega_s:.6g}, {self.omega_i:.6g}) rad/s'
            )


@dataclass(frozen=True)
class SpdcSetup:
    """Complete scenario: crystal, per-wave dispersion, beams and pump spectrum."""

    crystal: CrystalConfig
    models: Tuple[SellmeierModel, SellmeierModel, SellmeierModel]  # pump, signal, idler
    pump: BeamGeometry
    signal: BeamGeometry
    idler: BeamGeometry
    spectrum: PumpSpectrum = field(default_factory=PumpSpectrum)

    def __post_init__(self):
        if len(self.models) != 3:
            raise ConfigError('exactly three dispersion models (pump, signal, idler) are required')
        object.__setattr__(self, 'models', tuple(self.models))

    @cached_property
    def constants(self):
        """OpticalConstants for (pump, signal, idler), derived once per setup."""
        from spdcfocus.services.dispersion import constants_for
        return constants_for(self.crystal, self.models)

    @cached_property
    def poling_period(self):
        from spdcfocus.services.dispersion import solve_poling_period
        if self.crystal.poling_period is None:
            return solve_poling_period(self.crystal, self.models)
        return self.crystal.poling_period

    @cached_property
    def residual_mismatch(self):
        """k_p − k_s − k_i − 2π/Λ at the central wavelengths (rad/m)."""
        from spdcfocus.services.dispersion import phase_mismatch
        if self.crystal.poling_period is None:
            return 0.0
        return phase_mismatch(self.constants, self.poling_period)

    @property
    def gamma(self):
        return self.pump.waist / self.signal.waist

    def with_shifts(self, z_p=None, z_s=None, z_i=None):
        """Copy of the setup with some focal planes moved."""
        pump = self.pump if z_p is None else replace(self.pump, focal_shift=float(z_p))
        signal = self.signal if z_s is None else replace(self.signal, focal_shift=float(z_s))
        idler = self.idler if z_i is None else replace(self.idler, focal_shift=float(z_i))
        return replace(self, pump=pump, signal=signal, idler=idler)

    def with_crystal(self, **changes):
        return replace(self, crystal=replace(self.crystal, **changes))

    def with_waists(self, w_p=None, w_s=None, w_i=None):
        pump = self.pump if w_p is None else replace(self.pump, waist=float(w_p))
        signal = self.signal if w_s is None else replace(self.signal, waist=float(w_s))
        idler = self.idler if w_i is None else replace(self.idler, waist=float(w_i))
        return replace(self, pump=pump, signal=signal, idler=idler)

    def detuning_for_wavelength(self, signal_wavelength):
        """Detuning pair filtering the signal at ``signal_wavelength`` (idler mirrored)."""
        omega_s = 2 * math.pi * SPEED_OF_LIGHT * (
            1.0 / signal_wavelength - 1.0 / self.crystal.signal_wavelength
        )
        return DetuningPair.continuous_wave(omega_s)

    def __repr__(self):
        return (
            f'<SpdcSetup L={self.crystal.length * 1e3:g}mm '
            f'w=({self.pump.waist * 1e6:g},{self.signal.waist * 1e6:g},{self.idler.waist * 1e6:g})um '
            f'z=({self.pump.focal_shift * 1e3:g},{self.signal.focal_shift * 1e3:g},'
            f'{self.idler.focal_shift * 1e3:g})mm>'
        )

    def to_dict(self):
        return {
            'crystal': self.crystal.to_dict(),
            'models': [m.name for m in self.models],
            'pump': asdict(self.pump),
            'signal': asdict(self.signal),
            'idler': asdict(self.idler),
            'spectrum': {'kind': self.spectrum.kind.value,
                         'pulse_duration': self.spectrum.pulse_duration},
        }


@dataclass(frozen=True)
class SeriesDiagnostics:
    terms_used: int
    transformation: Transformation
    converged: bool
    max_terms: int = 10_000


@dataclass(frozen=True, eq=False)
class OverlapTerms:
    """Exponents and complex widths entering one (j_s, j_i) summand.

    ``D``, ``H`` and ``B`` are arrays over the longitudinal nodes.
    """

    h: int
    b: int
    D: np.ndarray
    H: np.ndarray
    B: np.ndarray


@dataclass(frozen=True)
class AmplitudeResult:
    value: complex
    quadrature_nodes: int = 0
    max_series_terms: int = 0

    @property
    def probability(self):
        return abs(self.value) ** 2


@dataclass(frozen=True)
class OracleGrid:
    radial_nodes: int = 24
    azimuthal_nodes: int = 16
    z_nodes: int = 16
    radial_cutoff: Optional[float] = None  # rad/m, default 8 / w_min

    def __post_init__(self):
        for name in ('radial_nodes', 'azimuthal_nodes', 'z_nodes'):
            if getattr(self, name) < 8:
                raise ConfigError(f'oracle grid {name} must be at least 8')

    def resolved_cutoff(self, setup):
        w_min = min(setup.pump.waist, setup.signal.waist, setup.idler.waist)
        cutoff = 8.0 / w_min if self.radial_cutoff is None else self.radial_cutoff
        if cutoff < 6.0 / w_min:
            raise ConfigError(f'oracle radial cutoff must be at least 6/w_min = {6.0 / w_min:.6g} rad/m')
        return cutoff

    def doubled(self):
        return replace(self, radial_nodes=2 * self.radial_nodes,
                       azimuthal_nodes=2 * self.azimuthal_nodes, z_nodes=2 * self.z_nodes)


SCAN_VARIABLES = ('z_p', 'z_s', 'z_i', 'z_si', 'lambda_s')


@dataclass(frozen=True)
class ScanAxis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in SCAN_VARIABLES:
            raise ConfigError(f'unknown scan variable {self.name!r}; expected one of {SCAN_VARIABLES}')
        if self.count < 2:
            raise ConfigError(f'scan axis {self.name!r} needs at least 2 points, got {self.count}')
        if not self.start < self.stop:
            raise ConfigError(f'scan axis {self.name!r} needs start < stop')

    @property
    def values(self):
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ScanGrid:
    axes: Tuple[ScanAxis, ...]

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError('a scan grid has one or two axes')
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError(f'duplicate scan axes {names}')

    def axis(self, name):
        for axis in self.axes:
            if axis.name == name:
                return axis
        raise ConfigError(f'scan grid has no {name!r} axis')


@dataclass(frozen=True, eq=False)
class JsaGrid:
    omega_s: np.ndarray
    omega_i: np.ndarray
    values: np.ndarray  # shape (len(omega_s), len(omega_i))

    def __post_init__(self):
        if self.values.shape != (len(self.omega_s), len(self.omega_i)):
            raise ConfigError('JSA values do not match the detuning axes')


@dataclass(frozen=True)
class OptimumPoint:
    location: Tuple[float, ...]
    value: float
    status: str = 'refined'  # refined | grid | edge | bracket-failed


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True, eq=False)
class EfficiencyMap:
    """|C|² over (z_s, z_i); ``values`` is normalised when ``normalized``."""

    z_s: np.ndarray
    z_i: np.ndarray
    values: np.ndarray
    peak: OptimumPoint
    raw_max: float
    normalized: bool = True


@dataclass(frozen=True, eq=False)
class FocusScan:
    z_p: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    fwhm: Optional[float]

    @property
    def fwhm_defined(self):
        return self.fwhm is not None


@dataclass(frozen=True, eq=False)
class SpectralResponse:
    wavelengths: np.ndarray
    raw: np.ndarray
    values: np.ndarray
    peak_wavelength: float
    fwhm: Optional[float]


@dataclass(frozen=True)
class SpectralPeak:
    """Spectral brightness: the largest |C|² over the band and where it occurs."""

    value: float
    wavelength: float
    status: str = 'refined'

    @property
    def on_edge(self):
        return self.status == 'edge'


@dataclass(frozen=True, eq=False)
class FocusCurve:
    """Optimal z_s = z_i for each pump focus, with the objective at that optimum."""

    z_p: np.ndarray
    z_s_max: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    statuses: Tuple[str, ...]
    objective: str = 'brightness'
    fit: Optional[LinearFit] = None


@dataclass(frozen=True, eq=False)
class ModeTable:
    signal_modes: Tuple[LGIndex, ...]
    idler_modes: Tuple[LGIndex, ...]
    values: np.ndarray
    raw: np.ndarray

    def entry(self, signal_mode, idler_mode):
        return float(self.values[self.signal_modes.index(signal_mode),
                                 self.idler_modes.index(idler_mode)])


@dataclass(frozen=True)
class ScenarioReport:
    """Objective value in the four focal arrangements for one pump shift.

    (i) all centred, (ii) only the pump shifted, (iii) all three shifted
    together, (iv) pump shifted and z_s = z_i at their optimum.
    """

    z_p: float
    optimal_shift: float
    values: Tuple[float, float, float, float]

    @property
    def ratios(self):
        reference = self.values[0]
        return tuple(v / reference for v in self.values)


@dataclass(frozen=True, eq=False)
class PurityMap:
    """Fibre-filtered purity over (z_p, z_s = z_i); rows follow ``z_p``.

    ``raw`` holds the unnormalised trace Tr ρ², ``values`` the same map
    divided by its maximum and ``schmidt`` the scale-free Σσ⁴/(Σσ²)².
    """

    z_p: np.ndarray
    z_si: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    schmidt: np.ndarray
