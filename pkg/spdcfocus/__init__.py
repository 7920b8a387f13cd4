import logging
import logging.config
import os

from config import config

__version__ = '0.3.0'

logger = logging.getLogger(__name__)

_settings = None


def get_settings():
    """Active configuration class, selected once from ``SPDC_ENV``."""
    global _settings
    if _settings is None:
        _settings = config[os.environ.get('SPDC_ENV', 'default')]
    return _settings


def use_settings(config_name):
    """Switch the active configuration."""
    global _settings
    _settings = config[config_name]
    return _settings


def configure_logging(verbose=False):
    """Load the logging INI named by the active configuration.

    Falls back to ``basicConfig`` when no file is configured or it is
    missing, which leaves already-installed handlers alone.
    """
    settings = get_settings()
    if settings.LOG_CONFIG and os.path.exists(settings.LOG_CONFIG):
        logging.config.fileConfig(settings.LOG_CONFIG, disable_existing_loggers=False)
    else:
        logging.basicConfig(level=logging.INFO,
                            format='%(levelname)-5.5s [%(name)s] %(message)s')
    if settings.LOG_LEVEL:
        logging.getLogger('spdcfocus').setLevel(settings.LOG_LEVEL.upper())
    if verbose:
        logging.getLogger('spdcfocus').setLevel(logging.DEBUG)


def create_setup(run_config_path):
    """Build an ``SpdcSetup`` from a run-configuration file."""
    from spdcfocus.runconfig import load_run_config
    return load_run_config(run_config_path).setup
