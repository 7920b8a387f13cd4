"""Subcommand handlers.

Each module exposes ``register(subparsers, common)``; every handler takes
``(run_config, args)`` and returns ``(columns, rows)`` for the CSV writer.
"""

from spdcfocus.models import DetuningPair


def register_all(subparsers, common):
    from spdcfocus.commands import scans, spectra, states
    scans.register(subparsers, common)
    spectra.register(subparsers, common)
    states.register(subparsers, common)


def filter_detuning(run_config):
    """Detuning selected by ``[scan] filter_wavelength``, zero when unset."""
    wavelength = run_config.scan.filter_wavelength
    if wavelength is None:
        return DetuningPair()
    return run_config.setup.detuning_for_wavelength(wavelength)
