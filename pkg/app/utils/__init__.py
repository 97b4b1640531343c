"""
Utilities package for the cell-free ISAC simulator

Logging configuration and monitoring helpers live in ``app.utils.logging``.
"""

from app.utils.logging import (
    ColoredFormatter,
    JSONFormatter,
    MonitoringMiddleware,
    PerformanceLogger,
    log_operation,
    monitor_function,
    perf_logger,
    setup_logging,
)

__all__ = [
    "setup_logging",
    "JSONFormatter",
    "ColoredFormatter",
    "MonitoringMiddleware",
    "monitor_function",
    "log_operation",
    "PerformanceLogger",
    "perf_logger",
]
