"""
Command middleware
Logs every CLI command and maps failures to exit codes
"""

import functools
import logging
import sys
import time

from services.errors import GsmError, PropertyFailure

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_USAGE = 2


def command_middleware(func):
    """
    Wrap a click command callback

    GsmError -> exit 2, PropertyFailure -> exit 1; anything else is logged
    with its traceback and re-raised.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        name = func.__name__.removeprefix("cmd_")
        logger.info(f"🚀 {name} started")
        started = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except PropertyFailure as e:
            logger.error(f"❌ {name}: {e}")
            sys.exit(EXIT_PROPERTY_FAILURE)
        except GsmError as e:
            logger.error(f"❌ {name} failed: {e}")
            sys.exit(EXIT_USAGE)
        except Exception as e:
            logger.error(f"❌ {name} crashed: {e}", exc_info=True)
            raise
        logger.info(f"✅ {name} finished in {time.perf_counter() - started:.2f}s")
        return result

    return wrapper
