"""
Stage middleware for glassbound commands.

This module provides decorators that wrap command handlers and pipeline
stages with logging of their start, duration and failure.
"""

import logging
import time
import uuid
from functools import wraps

logger = logging.getLogger('glassbound.stages')


class StageMiddleware:
    """Middleware for pipeline stages."""

    @staticmethod
    def log_stage(name):
        """
        Middleware to log stage details.

        Logs the stage name, its duration and, on failure, the error type
        before re-raising it.

        Args:
            name: Stage name shown in the log

        Returns:
            Decorator for a stage function
        """
        def decorator(f):
            @wraps(f)
            def decorated_function(*args, **kwargs):
                stage_id = uuid.uuid4().hex[:8]
                start_time = time.time()
                logger.info(f"Stage {stage_id}: {name} - Started")
                try:
                    result = f(*args, **kwargs)
                except Exception as e:
                    duration = time.time() - start_time
                    logger.error(f"Stage {stage_id}: {name} - Failed after {duration:.4f}s "
                                 f"with {type(e).__name__}: {e}")
                    raise
                duration = time.time() - start_time
                logger.info(f"Stage {stage_id}: {name} - Completed in {duration:.4f}s")
                return result

            return decorated_function

        return decorator

