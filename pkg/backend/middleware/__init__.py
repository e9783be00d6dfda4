"""
Middleware package for glassbound.

This package contains decorators applied to command handlers and pipeline
stages to handle common functionality such as stage logging.
"""

from .stage_middleware import StageMiddleware

__all__ = ['StageMiddleware']
