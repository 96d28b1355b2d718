"""Runtime settings read from the environment (and a local .env file)."""

import logging
import os

from dotenv import load_dotenv
from joblib import cpu_count

from config.settings import LOG_CONFIG, SWEEP_CONFIG

logger = logging.getLogger(__name__)

load_dotenv()


def get_thread_count():
    """Worker count for sweeps: HERALD_THREADS if set, never more than the CPU count."""
    available = cpu_count()
    raw = os.getenv(SWEEP_CONFIG["threads_env"])
    if not raw:
        return available
    try:
        threads = int(raw)
    except ValueError:
        logger.warning(f"⚠️ Ignoring {SWEEP_CONFIG['threads_env']}={raw!r}: not an integer")
        return available
    if threads < 1:
        logger.warning(f"⚠️ Ignoring {SWEEP_CONFIG['threads_env']}={threads}: must be positive")
        return available
    return min(threads, available)


def get_log_level():
    """Log level name from HERALD_LOG_LEVEL, else the configured default."""
    level = os.getenv(LOG_CONFIG["level_env"], LOG_CONFIG["level"]).upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        return LOG_CONFIG["level"]
    return level
