import sys

from loguru import logger

LEVELS = {"quiet": "WARNING", "info": "INFO", "debug": "DEBUG"}


def configure_logging(verbosity: str = "info") -> None:
    """Replace loguru's default sink with one stderr sink at the verbosity's level."""
    logger.remove()
    level = LEVELS.get(verbosity, "INFO")
    fmt = "<level>{level: <8}</level> {message}"
    if level == "DEBUG":
        fmt = "<green>{time:HH:mm:ss.SSS}</green> <level>{level: <8}</level> <cyan>{name}</cyan> {message}"
    logger.add(sys.stderr, level=level, format=fmt)
