"""
Configuration settings for glassbound.

This module provides configuration settings for the library and CLI.
"""
import logging
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base configuration
class Config:
    """Base configuration class."""

    # Worker parallelism - the only setting read from the environment
    THREADS = os.getenv("GLASSBOUND_THREADS")

    @classmethod
    def get_threads(cls):
        """Get the default worker count, falling back to machine parallelism."""
        if cls.THREADS:
            try:
                threads = int(cls.THREADS)
                if threads > 0:
                    return threads
            except ValueError:
                logging.getLogger('glassbound.config').warning(
                    f"Ignoring invalid GLASSBOUND_THREADS value: {cls.THREADS}")
        return os.cpu_count() or 1

    # Perron eigenvalue computation
    EIGEN_TOL = 1e-12
    EIGEN_MAX_ITER = 100000
    DENSE_EIGEN_LIMIT = 12

    # Pipeline defaults
    DEFAULT_MAX_CYCLE_LEN = 12
    DEFAULT_REFINE_LEVEL = 2

    # Simulation
    TIE_TOL = 1e-12
    TRANSIENT_DISCARD = 1000

    # Block counting and fitting
    EXACT_WINDOW_LIMIT = 10 ** 7
    FIT_TAIL_FRACTION = 0.15

    # Reporting
    REPORT_DIGITS = 6
    TOOL_VERSION = "0.3.0"

    # Logging
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_LEVEL = logging.INFO


config = Config
