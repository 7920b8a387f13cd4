"""Error hierarchy for spdcfocus."""


class SpdcError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(SpdcError, ValueError):
    """Invalid run configuration or precondition on user input."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        location = ''
        if path is not None:
            location = f'{path}'
        if line is not None:
            location += f':{line}'
            if column is not None:
                location += f':{column}'
        super().__init__(f'{location}: {message}' if location else message)


class InvalidDetuningError(ConfigError):
    """Detuning pair incompatible with the pump spectrum."""


class NumericalError(SpdcError, ArithmeticError):
    """A numerical procedure failed or was asked for something it cannot do."""


class WavelengthRangeError(NumericalError):
    """Wavelength outside the validity interval of a dispersion model."""

    def __init__(self, model_name, wavelength, valid_range):
        self.model_name = model_name
        self.wavelength = wavelength
        self.valid_range = valid_range
        lo, hi = valid_range
        super().__init__(
            f'wavelength {wavelength * 1e6:.6g} um outside the valid range '
            f'[{lo:.6g}, {hi:.6g}] um of model {model_name!r}'
        )


class NoPhaseMatchingError(NumericalError):
    """Quasi-phase matching cannot be reached with a positive poling period."""


class SpecialFunctionDomainError(NumericalError):
    """Special function called outside its supported parameter regime."""


class PoleError(SpecialFunctionDomainError):
    """Argument sits on a pole of the gamma function."""


class SeriesConvergenceError(NumericalError):
    """Hypergeometric series did not converge within the term budget."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics
        super().__init__(message)


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge within the node budget."""

    def __init__(self, message, estimates=()):
        self.estimates = tuple(estimates)
        super().__init__(message)


class OracleConvergenceError(NumericalError):
    """Brute-force projection did not converge under grid refinement."""

    def __init__(self, message, estimates=()):
        self.estimates = tuple(estimates)
        super().__init__(message)


class UndefinedPurityError(NumericalError):
    """Purity requested for an all-zero joint amplitude."""


class NonFiniteAmplitudeError(NumericalError):
    """Amplitude evaluation produced NaN or infinity."""


class ParaxialityError(NumericalError):
    """Transverse momentum too large for the Fresnel expansion."""
