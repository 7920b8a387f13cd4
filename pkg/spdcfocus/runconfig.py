"""Strict INI run configurations with unit-carrying values.

Every dimensional value must carry its unit (``10 mm``, ``20 um``,
``405 nm``, ``0.5 ps``); values are converted to SI on load. Unknown
sections or keys, missing units and wrong dimensions are ``ConfigError``s
that point at the offending line and column.

A CSV written by the command line starts with a ``# spdcfocus`` comment
block echoing the resolved configuration, and can be loaded back as a
configuration.
"""

import configparser
import logging
import math
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, Optional, Tuple

from pint import UnitRegistry
from pint.errors import DimensionalityError, PintError

from spdcfocus.exceptions import ConfigError
from spdcfocus.models import (
    FGM, BeamGeometry, CrystalConfig, LGIndex, OracleGrid, PumpSpectrum, ScanAxis,
    SellmeierModel, SpdcSetup, SpectrumKind,
)
from spdcfocus.services.dispersion import DEFAULT_MODEL_NAME, get_model

logger = logging.getLogger(__name__)

PROVENANCE_MARKER = '# spdcfocus'

LENGTH = 'm'
TIME = 's'
WAVENUMBER = '1/m'
MICROMETRE = 'um'


@lru_cache(maxsize=1)
def unit_registry():
    return UnitRegistry()


@dataclass(frozen=True)
class ScanOptions:
    filter_wavelength: Optional[float] = None
    objective: str = 'brightness'
    band: Tuple[float, float] = (800e-9, 820e-9)
    points: int = 201
    shift_range: Tuple[float, float] = (-10e-3, 10e-3)
    shift_points: int = 41
    jsa_points: int = 65
    jsa_span: float = 6.0
    scenario_shift: Optional[float] = None


@dataclass(frozen=True)
class RunConfig:
    """Everything one command-line invocation needs."""

    setup: SpdcSetup
    signal_mode: LGIndex = FGM
    idler_mode: LGIndex = FGM
    max_p: int = 2
    max_l: int = 2
    axes: Dict[str, ScanAxis] = field(default_factory=dict)
    scan: ScanOptions = field(default_factory=ScanOptions)
    oracle: OracleGrid = field(default_factory=OracleGrid)
    normalize: str = 'max'
    output_path: Optional[str] = None
    models: Dict[str, SellmeierModel] = field(default_factory=dict)
    path: Optional[str] = None

    def axis(self, name):
        try:
            return self.axes[name]
        except KeyError:
            raise ConfigError(f'this command needs an [axis.{name}] section', self.path) from None

    def with_overrides(self, normalize=None, objective=None):
        config = self
        if normalize is not None:
            config = replace(config, normalize=normalize)
        if objective is not None:
            config = replace(config, scan=replace(config.scan, objective=objective))
        return config

    def to_ini(self):
        """Canonical INI text; loading it rebuilds an identical configuration."""
        return render_ini(self)


class _Locator:
    """Line and column of every key's value in the raw text."""

    def __init__(self, text, path):
        self.path = path
        self.positions = {}
        section = None
        for number, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped[0] in '#;':
                continue
            match = re.match(r'\s*\[([^\]]+)\]', line)
            if match:
                section = match.group(1).strip()
                self.positions[(section, None)] = (number, line.index('[') + 1)
                continue
            match = re.match(r'(\s*)([^=:]+?)\s*[=:]\s*', line)
            if match and section is not None:
                self.positions[(section, match.group(2).strip())] = (number, match.end() + 1)

    def error(self, message, section, key=None):
        line, column = self.positions.get((section, key), (None, None))
        return ConfigError(message, self.path, line, column)


class _Section:
    """Typed accessors over one configparser section, tracking unread keys."""

    def __init__(self, parser, name, locator, allowed):
        self.name = name
        self.locator = locator
        self.values = dict(parser[name]) if parser.has_section(name) else {}
        unknown = sorted(set(self.values) - set(allowed))
        if unknown:
            raise locator.error(f'unknown key {unknown[0]!r} in [{name}]', name, unknown[0])

    def raw(self, key, default=None, required=False):
        if key not in self.values:
            if required:
                raise self.locator.error(f'[{self.name}] is missing required key {key!r}', self.name)
            return default
        return self.values[key].strip()

    def quantity(self, key, unit, default=None, required=False):
        text = self.raw(key, required=required)
        if text is None:
            return default
        return self._parse_quantity(key, text, unit)

    def _parse_quantity(self, key, text, unit):
        registry = unit_registry()
        try:
            value = registry.Quantity(text)
        except (PintError, AttributeError, ValueError, SyntaxError, TypeError) as exc:
            raise self.locator.error(f'cannot parse {text!r} as a quantity: {exc}', self.name, key) from None
        if value.dimensionless:
            raise self.locator.error(f'{key} = {text!r} is missing a unit', self.name, key)
        try:
            magnitude = float(value.to(unit).magnitude)
        except DimensionalityError:
            raise self.locator.error(
                f'{key} = {text!r} cannot be converted to {unit}', self.name, key
            ) from None
        if not math.isfinite(magnitude):
            raise self.locator.error(f'{key} must be finite', self.name, key)
        return magnitude

    def quantity_pair(self, key, unit, default=None):
        text = self.raw(key)
        if text is None:
            return default
        parts = [part.strip() for part in text.split(',')]
        if len(parts) != 2:
            raise self.locator.error(f'{key} needs two comma-separated values', self.name, key)
        return tuple(self._parse_quantity(key, part, unit) for part in parts)

    def integer(self, key, default=None):
        text = self.raw(key)
        if text is None:
            return default
        try:
            return int(text)
        except ValueError:
            raise self.locator.error(f'{key} must be an integer, got {text!r}', self.name, key) from None

    def number(self, key, default=None):
        text = self.raw(key)
        if text is None:
            return default
        try:
            return float(text)
        except ValueError:
            raise self.locator.error(f'{key} must be a number, got {text!r}', self.name, key) from None

    def choice(self, key, options, default):
        text = self.raw(key, default)
        if text not in options:
            raise self.locator.error(f'{key} must be one of {sorted(options)}, got {text!r}',
                                     self.name, key)
        return text

    def wrap(self, key, func, *args):
        """Re-raise ``ConfigError`` from a constructor at this key's position."""
        try:
            return func(*args)
        except ConfigError as exc:
            if exc.line is not None:
                raise
            raise self.locator.error(str(exc), self.name, key) from None


_FIXED_SECTIONS = {
    'crystal': ('length', 'pump_wavelength', 'signal_wavelength', 'idler_wavelength', 'poling_period'),
    'dispersion': ('pump', 'signal', 'idler'),
    'pump': ('waist', 'focal_shift'),
    'signal': ('waist', 'focal_shift'),
    'idler': ('waist', 'focal_shift'),
    'spectrum': ('kind', 'pulse_duration'),
    'modes': ('signal', 'idler', 'max_p', 'max_l'),
    'scan': ('filter_wavelength', 'objective', 'band', 'points', 'shift_range', 'shift_points',
             'jsa_points', 'jsa_span', 'scenario_shift'),
    'oracle': ('radial_nodes', 'azimuthal_nodes', 'z_nodes', 'radial_cutoff'),
    'output': ('normalize', 'path'),
}
_MODEL_KEYS = ('coefficients', 'valid_range')
_AXIS_KEYS = ('start', 'stop', 'count')


def _strip_provenance(text):
    """Turn a CSV provenance block back into INI text with line numbers kept."""
    lines = text.splitlines()
    out = []
    for index, line in enumerate(lines):
        if index == 0:
            out.append('')
        elif line.startswith('# '):
            out.append(line[2:])
        elif line == '#':
            out.append('')
        else:
            break
    return '\n'.join(out)


def _read_parser(text, path):
    parser = configparser.ConfigParser(strict=True, interpolation=None,
                                       inline_comment_prefixes=(';',),
                                       default_section='__defaults__')
    parser.optionxform = str
    try:
        parser.read_string(text, source=path or '<string>')
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f'duplicate key {exc.option!r} in [{exc.section}]', path, exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f'duplicate section [{exc.section}]', path, exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError('configuration must start with a [section] header', path, exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f'cannot parse configuration: {exc.message.splitlines()[0]}', path, line) from None
    return parser


def _parse_models(parser, locator):
    models = {}
    for name in parser.sections():
        if not name.startswith('model.'):
            continue
        section = _Section(parser, name, locator, _MODEL_KEYS)
        model_name = name[len('model.'):]
        text = section.raw('coefficients', required=True)
        try:
            coefficients = tuple(float(v) for v in text.split(','))
        except ValueError:
            raise locator.error('coefficients must be comma-separated numbers', name, 'coefficients') from None
        lo, hi = section.quantity_pair('valid_range', MICROMETRE) or (None, None)
        if lo is None:
            raise locator.error(f'[{name}] is missing required key \'valid_range\'', name)
        models[model_name] = section.wrap('coefficients', SellmeierModel, model_name, coefficients,
                                          (lo, hi))
    return models


def _parse_axes(parser, locator):
    axes = {}
    for name in parser.sections():
        if not name.startswith('axis.'):
            continue
        section = _Section(parser, name, locator, _AXIS_KEYS)
        axis_name = name[len('axis.'):]
        start = section.quantity('start', LENGTH, required=True)
        stop = section.quantity('stop', LENGTH, required=True)
        count = section.integer('count')
        if count is None:
            raise locator.error(f'[{name}] is missing required key \'count\'', name)
        axes[axis_name] = section.wrap('count', ScanAxis, axis_name, start, stop, count)
    return axes


def _beam(parser, locator, name):
    section = _Section(parser, name, locator, _FIXED_SECTIONS[name])
    waist = section.quantity('waist', LENGTH, required=True)
    shift = section.quantity('focal_shift', LENGTH, default=0.0)
    return section.wrap('waist', BeamGeometry, waist, shift)


def parse_run_config(text, path=None):
    """Parse configuration text (an INI file or a CSV provenance block)."""
    if text.startswith(PROVENANCE_MARKER):
        text = _strip_provenance(text)
    locator = _Locator(text, path)
    parser = _read_parser(text, path)

    for name in parser.sections():
        if name in _FIXED_SECTIONS or name.startswith(('model.', 'axis.')):
            continue
        raise locator.error(f'unknown section [{name}]', name)

    models = _parse_models(parser, locator)

    crystal_section = _Section(parser, 'crystal', locator, _FIXED_SECTIONS['crystal'])
    if not parser.has_section('crystal'):
        raise ConfigError('configuration needs a [crystal] section', path)
    poling_text = crystal_section.raw('poling_period', 'auto')
    if poling_text == 'auto':
        poling_period = None
    elif poling_text == 'inf':
        poling_period = math.inf
    else:
        poling_period = crystal_section.quantity('poling_period', LENGTH)
    crystal = crystal_section.wrap(
        'length', CrystalConfig,
        crystal_section.quantity('length', LENGTH, required=True),
        crystal_section.quantity('pump_wavelength', LENGTH, required=True),
        crystal_section.quantity('signal_wavelength', LENGTH, required=True),
        crystal_section.quantity('idler_wavelength', LENGTH),
        poling_period,
    )

    dispersion = _Section(parser, 'dispersion', locator, _FIXED_SECTIONS['dispersion'])
    wave_models = tuple(
        dispersion.wrap(wave, get_model, dispersion.raw(wave, DEFAULT_MODEL_NAME), models)
        for wave in ('pump', 'signal', 'idler')
    )

    spectrum_section = _Section(parser, 'spectrum', locator, _FIXED_SECTIONS['spectrum'])
    kind = spectrum_section.choice('kind', {k.value for k in SpectrumKind},
                                   SpectrumKind.CONTINUOUS_WAVE.value)
    spectrum = spectrum_section.wrap(
        'kind', PumpSpectrum, SpectrumKind(kind),
        spectrum_section.quantity('pulse_duration', TIME),
    )

    for wave in ('pump', 'signal', 'idler'):
        if not parser.has_section(wave):
            raise ConfigError(f'configuration needs a [{wave}] section', path)
    setup = SpdcSetup(
        crystal=crystal, models=wave_models,
        pump=_beam(parser, locator, 'pump'),
        signal=_beam(parser, locator, 'signal'),
        idler=_beam(parser, locator, 'idler'),
        spectrum=spectrum,
    )

    modes = _Section(parser, 'modes', locator, _FIXED_SECTIONS['modes'])
    signal_mode = modes.wrap('signal', LGIndex.parse, modes.raw('signal', '0,0'))
    idler_mode = modes.wrap('idler', LGIndex.parse, modes.raw('idler', '0,0'))
    max_p = modes.integer('max_p', 2)
    max_l = modes.integer('max_l', 2)
    if max_p < 0 or max_l < 0:
        raise locator.error('mode block bounds must be non-negative', 'modes', 'max_p')

    scan_section = _Section(parser, 'scan', locator, _FIXED_SECTIONS['scan'])
    defaults = ScanOptions()
    scan = ScanOptions(
        filter_wavelength=scan_section.quantity('filter_wavelength', LENGTH),
        objective=scan_section.choice('objective', {'brightness', 'fixed'}, defaults.objective),
        band=scan_section.quantity_pair('band', LENGTH, defaults.band),
        points=scan_section.integer('points', defaults.points),
        shift_range=scan_section.quantity_pair('shift_range', LENGTH, defaults.shift_range),
        shift_points=scan_section.integer('shift_points', defaults.shift_points),
        jsa_points=scan_section.integer('jsa_points', defaults.jsa_points),
        jsa_span=scan_section.number('jsa_span', defaults.jsa_span),
        scenario_shift=scan_section.quantity('scenario_shift', LENGTH),
    )
    if scan.band[0] >= scan.band[1] or scan.shift_range[0] >= scan.shift_range[1]:
        raise locator.error('ranges must be given as "low, high"', 'scan',
                            'band' if scan.band[0] >= scan.band[1] else 'shift_range')
    if scan.shift_points < 3:
        raise locator.error('shift_points must be at least 3', 'scan', 'shift_points')

    oracle_section = _Section(parser, 'oracle', locator, _FIXED_SECTIONS['oracle'])
    oracle_defaults = OracleGrid()
    oracle = oracle_section.wrap(
        'radial_nodes', OracleGrid,
        oracle_section.integer('radial_nodes', oracle_defaults.radial_nodes),
        oracle_section.integer('azimuthal_nodes', oracle_defaults.azimuthal_nodes),
        oracle_section.integer('z_nodes', oracle_defaults.z_nodes),
        oracle_section.quantity('radial_cutoff', WAVENUMBER),
    )

    output = _Section(parser, 'output', locator, _FIXED_SECTIONS['output'])
    config = RunConfig(
        setup=setup, signal_mode=signal_mode, idler_mode=idler_mode, max_p=max_p, max_l=max_l,
        axes=_parse_axes(parser, locator), scan=scan, oracle=oracle,
        normalize=output.choice('normalize', {'max', 'none'}, 'max'),
        output_path=output.raw('path'),
        models=models, path=path,
    )
    logger.debug('Parsed run configuration %s', path or '<string>')
    return config


def load_run_config(path):
    """Load a run configuration (or a CSV produced by the command line) from ``path``."""
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f'cannot read configuration: {exc.strerror}', path) from None
    logger.info('Loaded run configuration from %s', path)
    return parse_run_config(text, path)


def _q(value, unit):
    return f'{value!r} {unit}'


def render_ini(config):
    """Canonical text of a run configuration, all values in SI units."""
    setup = config.setup
    crystal = setup.crystal
    if crystal.poling_period is None:
        poling = 'auto'
    elif math.isinf(crystal.poling_period):
        poling = 'inf'
    else:
        poling = _q(crystal.poling_period, 'm')

    lines = ['[crystal]',
             f'length = {_q(crystal.length, "m")}',
             f'pump_wavelength = {_q(crystal.pump_wavelength, "m")}',
             f'signal_wavelength = {_q(crystal.signal_wavelength, "m")}',
             f'idler_wavelength = {_q(crystal.idler_wavelength, "m")}',
             f'poling_period = {poling}',
             '',
             '[dispersion]']
    for wave, model in zip(('pump', 'signal', 'idler'), setup.models):
        lines.append(f'{wave} = {model.name}')
    for name, model in sorted(config.models.items()):
        lo, hi = model.valid_range
        lines += ['', f'[model.{name}]',
                  'coefficients = ' + ', '.join(repr(v) for v in model.coefficients),
                  f'valid_range = {_q(lo, "um")}, {_q(hi, "um")}']
    for wave in ('pump', 'signal', 'idler'):
        beam = getattr(setup, wave)
        lines += ['', f'[{wave}]', f'waist = {_q(beam.waist, "m")}',
                  f'focal_shift = {_q(beam.focal_shift, "m")}']
    lines += ['', '[spectrum]', f'kind = {setup.spectrum.kind.value}']
    if setup.spectrum.pulse_duration is not None:
        lines.append(f'pulse_duration = {_q(setup.spectrum.pulse_duration, "s")}')
    lines += ['', '[modes]', f'signal = {config.signal_mode}', f'idler = {config.idler_mode}',
              f'max_p = {config.max_p}', f'max_l = {config.max_l}']

    scan = config.scan
    lines += ['', '[scan]']
    if scan.filter_wavelength is not None:
        lines.append(f'filter_wavelength = {_q(scan.filter_wavelength, "m")}')
    lines += [f'objective = {scan.objective}',
              f'band = {_q(scan.band[0], "m")}, {_q(scan.band[1], "m")}',
              f'points = {scan.points}',
              f'shift_range = {_q(scan.shift_range[0], "m")}, {_q(scan.shift_range[1], "m")}',
              f'shift_points = {scan.shift_points}',
              f'jsa_points = {scan.jsa_points}',
              f'jsa_span = {scan.jsa_span!r}']
    if scan.scenario_shift is not None:
        lines.append(f'scenario_shift = {_q(scan.scenario_shift, "m")}')

    oracle = config.oracle
    lines += ['', '[oracle]', f'radial_nodes = {oracle.radial_nodes}',
              f'azimuthal_nodes = {oracle.azimuthal_nodes}', f'z_nodes = {oracle.z_nodes}']
    if oracle.radial_cutoff is not None:
        lines.append(f'radial_cutoff = {_q(oracle.radial_cutoff, "1/m")}')

    for name, axis in sorted(config.axes.items()):
        lines += ['', f'[axis.{name}]', f'start = {_q(axis.start, "m")}',
                  f'stop = {_q(axis.stop, "m")}', f'count = {axis.count}']

    lines += ['', '[output]', f'normalize = {config.normalize}']
    if config.output_path:
        lines.append(f'path = {config.output_path}')
    return '\n'.join(lines) + '\n'
