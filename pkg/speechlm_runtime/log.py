"""
Logging setup shared by the CLI, the service and the benchmark runners.
"""

import logging
import sys

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level="INFO"):
    """
    Configure root logging to standard error.

    Args:
        level: Logging level name or number
    """
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def get_logger(name: str) -> logging.Logger:
    """Return a logger below the package namespace."""
    if not name.startswith("speechlm_runtime"):
        name = f"speechlm_runtime.{name}"
    return logging.getLogger(name)
