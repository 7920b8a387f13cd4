import os
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = os.path.abspath(os.path.dirname(__file__))


class Config:
    """Base configuration."""

    # Logging
    LOG_CONFIG = os.environ.get('SPDC_LOG_CONFIG', os.path.join(BASE_DIR, 'logging.ini'))
    LOG_LEVEL = os.environ.get('SPDC_LOG_LEVEL')

    # Parallel sweeps
    WORKERS = int(os.environ.get('SPDC_WORKERS', 1))

    # Longitudinal quadrature
    QUAD_RTOL = float(os.environ.get('SPDC_QUAD_RTOL', 1e-9))
    QUAD_ATOL = float(os.environ.get('SPDC_QUAD_ATOL', 1e-12))
    QUAD_INITIAL_NODES = 32
    QUAD_MAX_NODES = int(os.environ.get('SPDC_QUAD_MAX_NODES', 4096))

    # Hypergeometric series
    SERIES_MAX_TERMS = int(os.environ.get('SPDC_SERIES_MAX_TERMS', 10_000))
    SERIES_DIRECT_RADIUS = 0.8

    # Optimisation tolerances (SI)
    SHIFT_XTOL = 1e-5  # 0.01 mm
    WAVELENGTH_XTOL = 1e-13  # 1e-4 nm

    # CSV output
    CSV_SIGNIFICANT_DIGITS = 12


class DevelopmentConfig(Config):
    """Development configuration: logging.ini levels, workers from SPDC_WORKERS."""


class ProductionConfig(Config):
    """Production configuration: one worker per core unless capped."""
    WORKERS = int(os.environ.get('SPDC_WORKERS', os.cpu_count() or 1))


class TestingConfig(Config):
    """Test-suite configuration: single process, logging left to pytest."""
    WORKERS = 1
    LOG_CONFIG = None


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
