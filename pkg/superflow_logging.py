#!/usr/bin/env python3
"""
Structured Logging for Superflow Runs

Formats every record as
TIMESTAMP - LEVEL - COMPONENT:OPERATION [CORRELATION_ID] - MESSAGE
and tracks nested operations with short correlation ids so a single
verification run can be followed through the main, debug and error logs.
"""

import logging
import sys
import threading
import traceback
import uuid
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Optional

ROOT_LOGGER_NAME = "superflow"

COMPONENTS = (
    "EXACT", "GROUPS", "REYNOLDS", "FIRSTINT", "FLOWS", "ELLIPTIC",
    "CLOSEDFORM", "SPHERICAL", "HYPEROCT", "CLI",
)

LOG_LINE_FORMAT = ("%(asctime)s - %(levelname)s - %(component)s:%(operation)s "
                   "[%(correlation_id)s] - %(message)s")
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class SuperflowFormatter(logging.Formatter):
    """Formatter that fills in component, operation and correlation id"""

    def format(self, record: logging.LogRecord) -> str:
        if not hasattr(record, "correlation_id"):
            record.correlation_id = audit_logger.current_correlation_id()
        if not hasattr(record, "component"):
            record.component = record.name.rsplit(".", 1)[-1].upper() \
                if record.name.startswith(ROOT_LOGGER_NAME + ".") else "MAIN"
        if not hasattr(record, "operation"):
            record.operation = audit_logger.current_operation()

        record.asctime = self.formatTime(record, self.datefmt)
        formatted = (f"{record.asctime} - {record.levelname} - "
                     f"{record.component}:{record.operation} "
                     f"[{record.correlation_id}] - {record.getMessage()}")

        if record.levelname in ("ERROR", "CRITICAL") and record.exc_info:
            formatted += f"\nStack Trace: {self.formatException(record.exc_info)}"

        return formatted


def setup_detailed_logging(log_dir: Optional[str] = None,
                           console_level: int = logging.WARNING) -> logging.Logger:
    """
    Configure the superflow logger tree

    Args:
        log_dir: directory for rotating main/debug/error logs; console only when None
        console_level: threshold for the console handler

    Returns:
        the root superflow logger
    """
    main_logger = logging.getLogger(ROOT_LOGGER_NAME)
    main_logger.setLevel(logging.DEBUG)
    main_logger.propagate = False

    for handler in main_logger.handlers[:]:
        main_logger.removeHandler(handler)
        handler.close()

    formatter = SuperflowFormatter(fmt=LOG_LINE_FORMAT, datefmt=LOG_DATE_FORMAT)

    if log_dir is not None:
        directory = Path(log_dir)
        directory.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d")

        main_handler = RotatingFileHandler(
            directory / f"superflow_main_{timestamp}.log",
            maxBytes=20 * 1024 * 1024,
            backupCount=5,
        )
        main_handler.setLevel(logging.INFO)
        main_handler.setFormatter(formatter)

        debug_handler = RotatingFileHandler(
            directory / f"superflow_debug_{timestamp}.log",
            maxBytes=50 * 1024 * 1024,
            backupCount=3,
        )
        debug_handler.setLevel(logging.DEBUG)
        debug_handler.setFormatter(formatter)

        error_handler = RotatingFileHandler(
            directory / f"superflow_errors_{timestamp}.log",
            maxBytes=10 * 1024 * 1024,
            backupCount=20,
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(formatter)

        main_logger.addHandler(main_handler)
        main_logger.addHandler(debug_handler)
        main_logger.addHandler(error_handler)

    # stderr keeps stdout free for JSON reports
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(console_level)
    console_handler.setFormatter(logging.Formatter(
        "%(asctime)s - %(levelname)s - %(message)s", datefmt="%H:%M:%S"))
    main_logger.addHandler(console_handler)

    return main_logger


def get_component_logger(component_name: str) -> logging.Logger:
    """Logger for one component; handlers live on the superflow root"""
    name = component_name.upper()
    if name not in COMPONENTS:
        raise ValueError(f"unknown logging component: {component_name}")
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


class AuditLogger:
    """Per-thread correlation and operation stacks"""

    def __init__(self):
        self._local = threading.local()

    def _stacks(self):
        if not hasattr(self._local, "correlation_stack"):
            self._local.correlation_stack = []
            self._local.operation_stack = []
        return self._local.correlation_stack, self._local.operation_stack

    def start_operation(self, operation_name: str, correlation_id: Optional[str] = None) -> str:
        if correlation_id is None:
            correlation_id = str(uuid.uuid4())[:8]
        correlations, operations = self._stacks()
        correlations.append(correlation_id)
        operations.append(operation_name)
        return correlation_id

    def end_operation(self):
        correlations, operations = self._stacks()
        if correlations:
            correlations.pop()
        if operations:
            operations.pop()

    def current_correlation_id(self) -> str:
        correlations, _ = self._stacks()
        return correlations[-1] if correlations else "N/A"

    def current_operation(self) -> str:
        _, operations = self._stacks()
        return operations[-1] if operations else "GENERAL"

    def depth(self) -> int:
        return len(self._stacks()[0])

    def log_with_context(self, logger: logging.Logger, level: int, message: str,
                         component: str = "MAIN", operation: Optional[str] = None,
                         extra_data: Optional[Dict[str, Any]] = None, exc_info=None):
        record_extra = {
            "component": component,
            "operation": operation or self.current_operation(),
            "correlation_id": self.current_correlation_id(),
            "extra_data": extra_data or {},
        }
        logger.log(level, message, extra=record_extra, exc_info=exc_info)


audit_logger = AuditLogger()


class OperationContext:
    """Context manager logging start, success with duration, or failure"""

    def __init__(self, operation_name: str, component: str = "CLI",
                 logger_instance: Optional[logging.Logger] = None,
                 log_start: bool = True, log_end: bool = True):
        self.operation_name = operation_name
        self.component = component.upper()
        self.logger_instance = logger_instance or logging.getLogger(
            f"{ROOT_LOGGER_NAME}.{self.component}")
        self.log_start = log_start
        self.log_end = log_end
        self.correlation_id: Optional[str] = None
        self.start_time: Optional[datetime] = None
        self.duration: float = 0.0
        self.success = False

    def __enter__(self) -> "OperationContext":
        self.correlation_id = audit_logger.start_operation(self.operation_name)
        self.start_time = datetime.now(timezone.utc)
        if self.log_start:
            audit_logger.log_with_context(
                self.logger_instance, logging.INFO,
                f"Starting {self.operation_name}",
                component=self.component,
                operation=self.operation_name,
                extra_data={"start_time": self.start_time.isoformat()},
            )
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        end_time = datetime.now(timezone.utc)
        self.duration = (end_time - self.start_time).total_seconds()
        try:
            if exc_type is None:
                self.success = True
                if self.log_end:
                    audit_logger.log_with_context(
                        self.logger_instance, logging.INFO,
                        f"Completed {self.operation_name} successfully "
                        f"in {self.duration:.3f}s",
                        component=self.component,
                        operation=self.operation_name,
                        extra_data={"duration_seconds": self.duration, "success": True},
                    )
            else:
                error_details = {
                    "duration_seconds": self.duration,
                    "success": False,
                    "error_type": exc_type.__name__,
                    "error_message": str(exc_val),
                    "stack_trace": "".join(traceback.format_exception(exc_type, exc_val, exc_tb)),
                }
                audit_logger.log_with_context(
                    self.logger_instance, logging.ERROR,
                    f"Failed {self.operation_name}: {exc_type.__name__}: {exc_val}",
                    component=self.component,
                    operation=self.operation_name,
                    extra_data=error_details,
                    exc_info=(exc_type, exc_val, exc_tb),
                )
        finally:
            audit_logger.end_operation()
        return False


def log_check(logger: logging.Logger, name: str, passed: bool, measured: Any,
              reference: Any = None, tolerance: Optional[float] = None):
    """Emit one CHECK record in the format log_analyzer.py parses"""
    status = "PASS" if passed else "FAIL"
    level = logging.INFO if passed else logging.ERROR
    logger.log(level, f"CHECK {name} {status} measured={measured!r} "
                      f"reference={reference!r} tolerance={tolerance!r}")


def warn_if_tight(logger: logging.Logger, name: str, error: float, tolerance: float):
    """Warn when a passing check uses more than a tenth of its tolerance"""
    if tolerance > 0 and error > tolerance / 10 and error <= tolerance:
        logger.warning(f"{name}: error {error:.3e} within 10x of tolerance {tolerance:.1e}")

