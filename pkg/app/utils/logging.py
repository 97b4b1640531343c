"""Logging and monitoring for the simulator, the CLI and the evaluation service"""

import asyncio
import json
import logging
import sys
import time
import uuid
from contextlib import contextmanager
from datetime import datetime, timezone
from functools import wraps
from typing import Dict, Iterator, Optional

from fastapi import Request, Response
from starlette.middleware.base import BaseHTTPMiddleware
from starlette.types import ASGIApp


# Attributes every LogRecord has; anything else on a record came in through ``extra``
_RECORD_ATTRIBUTES = frozenset(vars(logging.LogRecord("", 0, "", 0, "", None, None))) | {"message", "asctime"}


class JSONFormatter(logging.Formatter):
    """
    One JSON object per record

    Context passed through ``extra`` (drop, scheme, kappa, iterations, t_star,
    duration, request_id, ...) is copied into the object as-is.
    """

    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "timestamp": datetime.fromtimestamp(record.created, timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "location": f"{record.module}:{record.funcName}:{record.lineno}",
            "process": record.process,
        }
        entry.update({key: value for key, value in vars(record).items() if key not in _RECORD_ATTRIBUTES})

        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        if record.stack_info:
            entry["stack_info"] = self.formatStack(record.stack_info)

        return json.dumps(entry, ensure_ascii=False, default=str)


class ColoredFormatter(logging.Formatter):
    """Console formatter: level colour, then drop/scheme context when the record carries it"""

    LEVEL_COLORS = {
        logging.DEBUG: "\033[36m",
        logging.INFO: "\033[32m",
        logging.WARNING: "\033[33m",
        logging.ERROR: "\033[31m",
        logging.CRITICAL: "\033[35m",
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        color = self.LEVEL_COLORS.get(record.levelno, self.RESET)
        clock = datetime.fromtimestamp(record.created).strftime("%H:%M:%S")

        context = []
        if getattr(record, "drop", None) is not None:
            context.append(f"drop {record.drop}")
        if getattr(record, "scheme", None):
            context.append(str(record.scheme))
        tag = f" [{' '.join(context)}]" if context else ""

        line = f"{color}{clock} {record.levelname:<7} {record.name}{tag}: {record.getMessage()}{self.RESET}"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


class RequestLogger(logging.LoggerAdapter):
    """Adapter that stamps every record with the request id"""

    def __init__(self, request_id: str, logger: logging.Logger):
        super().__init__(logger, {"request_id": request_id})

    def process(self, msg, kwargs):
        kwargs["extra"] = {**self.extra, **kwargs.get("extra", {})}
        return msg, kwargs


# Third-party loggers kept at WARNING whatever the simulator level
QUIET_LOGGERS = ("uvicorn", "uvicorn.access", "httpx", "cvxpy", "numexpr")


def setup_logging(level: str = "INFO", use_json: bool = False, log_file: Optional[str] = None) -> None:
    """
    Configure process logging once per process

    Console records go to stderr so CSV output on stdout stays clean; colored
    text unless ``use_json``. ``log_file`` always receives JSON lines.
    """
    log_level = logging.getLevelName(level.upper())
    if not isinstance(log_level, int):
        log_level = logging.INFO

    handlers = [logging.StreamHandler(sys.stderr)]
    handlers[0].setFormatter(JSONFormatter() if use_json else ColoredFormatter())
    if log_file:
        handlers.append(logging.FileHandler(log_file))
        handlers[-1].setFormatter(JSONFormatter())

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(log_level)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(log_level, logging.WARNING))

    logging.getLogger(__name__).debug(
        f"Logging configured: level={logging.getLevelName(log_level)} json={use_json} file={log_file}"
    )


class MonitoringMiddleware(BaseHTTPMiddleware):
    """Request/response monitoring for the evaluation service"""

    def __init__(self, app: ASGIApp):
        super().__init__(app)
        self.logger = logging.getLogger("app.monitoring")

    async def dispatch(self, request: Request, call_next) -> Response:
        request_id = request.headers.get("x-request-id") or uuid.uuid4().hex
        request.state.request_id = request_id
        log = RequestLogger(request_id, self.logger)
        request.state.logger = log
        route = {"method": request.method, "url": request.url.path}
        started = time.perf_counter()

        try:
            response = await call_next(request)
        except Exception as e:
            log.error(
                "Request failed",
                extra={**route, "duration": _elapsed_ms(started), "error": str(e), "error_type": type(e).__name__},
                exc_info=True,
            )
            raise

        elapsed = time.perf_counter() - started
        log.info(
            f"{request.method} {request.url.path} -> {response.status_code}",
            extra={
                **route,
                "status_code": response.status_code,
                "duration": round(elapsed * 1000, 2),
                "ip_address": self._get_client_ip(request),
            },
        )
        response.headers["X-Request-ID"] = request_id
        response.headers["X-Response-Time"] = f"{elapsed:.3f}s"
        return response

    def _get_client_ip(self, request: Request) -> str:
        forwarded_for = request.headers.get("x-forwarded-for")
        if forwarded_for:
            return forwarded_for.split(",")[0].strip()
        if request.client:
            return request.client.host
        return "unknown"


def _elapsed_ms(started: float) -> float:
    return round((time.perf_counter() - started) * 1000, 2)


def monitor_function(func_name: Optional[str] = None):
    """
    Decorator logging completion (INFO) or failure (ERROR, with traceback) of a
    sync or async callable together with its duration in milliseconds
    """

    def decorator(func):
        name = func_name or f"{func.__module__}.{func.__qualname__}"
        logger = logging.getLogger("app.functions")

        def _done(started: float) -> None:
            logger.info(f"Function completed: {name}", extra={"function": name, "duration": _elapsed_ms(started)})

        def _failed(started: float, exc: Exception) -> None:
            logger.error(
                f"Function failed: {name}",
                extra={
                    "function": name,
                    "duration": _elapsed_ms(started),
                    "error": str(exc),
                    "error_type": type(exc).__name__,
                },
                exc_info=True,
            )

        if asyncio.iscoroutinefunction(func):
            @wraps(func)
            async def async_wrapper(*args, **kwargs):
                started = time.perf_counter()
                try:
                    result = await func(*args, **kwargs)
                except Exception as e:
                    _failed(started, e)
                    raise
                _done(started)
                return result

            return async_wrapper

        @wraps(func)
        def sync_wrapper(*args, **kwargs):
            started = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                _failed(started, e)
                raise
            _done(started)
            return result

        return sync_wrapper

    return decorator


@contextmanager
def log_operation(operation_name: str, logger: Optional[logging.Logger] = None, **context) -> Iterator[None]:
    """
    Log a block as one named operation

    Usage:
        with log_operation("drop", drop=3, scheme="gap-opc"):
            run_drop(...)
    """
    logger = logger or logging.getLogger("app.operations")
    fields = {"operation": operation_name, **context}
    started = time.perf_counter()
    logger.debug(f"Starting {operation_name}", extra=fields)
    try:
        yield
    except Exception as e:
        logger.error(
            f"{operation_name} failed after {_elapsed_ms(started):.0f} ms: {e}",
            extra={**fields, "duration": _elapsed_ms(started), "error_type": type(e).__name__},
        )
        raise
    logger.info(f"{operation_name} finished", extra={**fields, "duration": _elapsed_ms(started)})


class PerformanceLogger:
    """Times named operations; durations are logged in milliseconds"""

    def __init__(self, logger_name: str = "app.performance"):
        self.logger = logging.getLogger(logger_name)
        self.start_times: Dict[str, float] = {}

    def start_timer(self, operation: str) -> str:
        timer_id = f"{operation}_{uuid.uuid4().hex[:8]}"
        self.start_times[timer_id] = time.perf_counter()
        return timer_id

    def end_timer(self, timer_id: str, operation: str, **extra_data) -> float:
        """Stop a timer, log it and return the elapsed seconds (0.0 for an unknown timer)"""
        started = self.start_times.pop(timer_id, None)
        if started is None:
            self.logger.warning(f"Timer {timer_id} not found for operation {operation}")
            return 0.0
        self.logger.info(
            f"{operation} took {_elapsed_ms(started):.1f} ms",
            extra={"operation": operation, "duration": _elapsed_ms(started), **extra_data},
        )
        return time.perf_counter() - started


perf_logger = PerformanceLogger()
