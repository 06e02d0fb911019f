from .loadenv import RuntimeSettings, _sanitize_path, get_settings
from .logs import configure_logging
from .pretty_print import print_error, print_summary

__all__ = ["RuntimeSettings", "get_settings", "configure_logging", "print_error", "print_summary", "_sanitize_path"]
