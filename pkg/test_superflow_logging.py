#!/usr/bin/env python3
"""
Tests for the structured superflow log format, component loggers and
operation contexts
"""

import logging

import pytest

from closedform import series_match
from superflow_cli import Report
from superflow_logging import (
    COMPONENTS,
    OperationContext,
    SuperflowFormatter,
    audit_logger,
    get_component_logger,
    log_check,
    setup_detailed_logging,
    warn_if_tight,
)


class ListHandler(logging.Handler):
    def __init__(self):
        super().__init__(logging.DEBUG)
        self.lines = []
        self.setFormatter(SuperflowFormatter())

    def emit(self, record):
        self.lines.append(self.format(record))


@pytest.fixture
def captured():
    root = setup_detailed_logging(None, console_level=logging.CRITICAL)
    handler = ListHandler()
    root.addHandler(handler)
    yield handler
    root.removeHandler(handler)


def test_component_logger_names():
    assert get_component_logger("hyperoct").name == "superflow.HYPEROCT"
    assert set(COMPONENTS) >= {"EXACT", "CLI", "SPHERICAL"}
    with pytest.raises(ValueError):
        get_component_logger("DATABASE")


def test_line_format_outside_operations(captured):
    get_component_logger("GROUPS").info("closure reached order 24")
    line = captured.lines[-1]
    assert " - INFO - GROUPS:GENERAL [N/A] - closure reached order 24" in line


def test_operation_context_success(captured):
    logger = get_component_logger("FLOWS")
    with OperationContext("integrate_orbit", "FLOWS", logger) as op:
        logger.debug("accepted 120 steps")
    assert op.success
    assert captured.lines[0].endswith("Starting integrate_orbit")
    assert f"FLOWS:integrate_orbit [{op.correlation_id}] - accepted 120 steps" in captured.lines[1]
    assert "Completed integrate_orbit successfully in" in captured.lines[2]
    assert audit_logger.depth() == 0


def test_operation_context_failure_propagates(captured):
    logger = get_component_logger("ELLIPTIC")
    with pytest.raises(ArithmeticError):
        with OperationContext("d5_alpha", "ELLIPTIC", logger) as op:
            raise ArithmeticError("quadrature error 3e-9")
    assert not op.success
    failure = captured.lines[-1]
    assert "- ERROR - ELLIPTIC:d5_alpha" in failure
    assert "Failed d5_alpha: ArithmeticError: quadrature error 3e-9" in failure
    assert "Stack Trace:" in failure


def test_nested_operations_keep_outer_id(captured):
    logger = get_component_logger("CLI")
    with OperationContext("verify", "CLI", logger) as outer:
        with OperationContext("series_match", "CLI", logger) as inner:
            assert audit_logger.depth() == 2
        logger.info("after inner")
    assert inner.correlation_id != outer.correlation_id
    assert f"CLI:verify [{outer.correlation_id}] - after inner" in captured.lines[-2]


def test_log_check_levels(captured):
    logger = get_component_logger("SPHERICAL")
    log_check(logger, "alpha2_exact", True, 0.0, 0.0, 0.0)
    log_check(logger, "vanish_count", False, 24, 26, 0)
    assert "- INFO -" in captured.lines[0]
    assert captured.lines[0].endswith("CHECK alpha2_exact PASS measured=0.0 reference=0.0 tolerance=0.0")
    assert "- ERROR -" in captured.lines[1]
    assert "CHECK vanish_count FAIL measured=24 reference=26" in captured.lines[1]


def test_warn_if_tight(captured):
    logger = get_component_logger("CLOSEDFORM")
    warn_if_tight(logger, "thm4_series", 2e-11, 1e-10)
    warn_if_tight(logger, "thm2_series", 1e-13, 1e-10)
    warnings = [line for line in captured.lines if "- WARNING -" in line]
    assert len(warnings) == 1
    assert "thm4_series" in warnings[0]


def test_report_check_warns_when_tight(captured):
    report = Report(command=["verify"])
    report.add_check("drift[H]", True, 8e-11, 0.0, "derived", 1e-10)
    report.add_check("semigroup", True, 1e-14, 0.0, "derived", 1e-10)
    report.add_check("extremal_max", True, 4.0, 4.0, "published", 1e-6)
    warnings = [line for line in captured.lines if "- WARNING -" in line]
    assert len(warnings) == 1
    assert "drift[H]: error 8.000e-11" in warnings[0]


def test_series_match_warns_when_tight(captured):
    loose = series_match("thm2", (2, 1), order=8)
    assert loose.max_mismatch > 0
    series_match("thm2", (2, 1), order=8, tolerance=2 * loose.max_mismatch)
    warnings = [line for line in captured.lines if "- WARNING -" in line]
    assert len(warnings) == 1
    assert "CLOSEDFORM" in warnings[0] and "thm2_series" in warnings[0]


def test_file_handlers(tmp_path):
    try:
        setup_detailed_logging(str(tmp_path), console_level=logging.CRITICAL)
        logger = get_component_logger("HYPEROCT")
        logger.debug("root continuation step")
        logger.info("reduction started")
        logger.error("roots collide")
    finally:
        setup_detailed_logging(None, console_level=logging.CRITICAL)
    main_log = next(tmp_path.glob("superflow_main_*.log")).read_text()
    debug_log = next(tmp_path.glob("superflow_debug_*.log")).read_text()
    error_log = next(tmp_path.glob("superflow_errors_*.log")).read_text()
    assert "reduction started" in main_log and "root continuation step" not in main_log
    assert "root continuation step" in debug_log
    assert "roots collide" in error_log and "reduction started" not in error_log
