#!/usr/bin/env python3
"""
Tests for reading superflow logs back into check and timing summaries
"""

import logging

import pytest

from log_analyzer import LogAnalyzer, main
from superflow_logging import OperationContext, get_component_logger, log_check, setup_detailed_logging

MAIN_LOG = """\
2026-01-05 10:00:00 - INFO - CLI:verify [a1b2c3d4] - Starting verify
2026-01-05 10:00:01 - INFO - CLOSEDFORM:verify [a1b2c3d4] - CHECK thm4_series PASS measured=3.2e-13 reference=0.0 tolerance=1e-10
2026-01-05 10:00:01 - ERROR - CLOSEDFORM:verify [a1b2c3d4] - CHECK thm2_series FAIL measured=0.004 reference=0.0 tolerance=1e-10
2026-01-05 10:00:02 - INFO - CLOSEDFORM:verify [a1b2c3d4] - CHECK thm4_series PASS measured=-5e-12 reference=0.0 tolerance=1e-10
2026-01-05 10:00:03 - INFO - CLI:verify [a1b2c3d4] - Completed verify successfully in 2.500s
2026-01-05 10:00:04 - INFO - HYPEROCT:triple_reduction [e5f6a7b8] - Starting triple_reduction
2026-01-05 10:00:09 - ERROR - HYPEROCT:triple_reduction [e5f6a7b8] - Failed triple_reduction: RootCollisionError: roots 1 and 2 collide
Stack Trace: Traceback (most recent call last):
  File "hyperoct.py", line 1, in <module>
RootCollisionError: roots 1 and 2 collide
"""

ERROR_LOG = """\
2026-01-05 10:00:01 - ERROR - CLOSEDFORM:verify [a1b2c3d4] - CHECK thm2_series FAIL measured=0.004 reference=0.0 tolerance=1e-10
2026-01-05 10:00:09 - ERROR - HYPEROCT:triple_reduction [e5f6a7b8] - Failed triple_reduction: RootCollisionError: roots 1 and 2 collide
Stack Trace: Traceback (most recent call last):
  File "hyperoct.py", line 1, in <module>
RootCollisionError: roots 1 and 2 collide
"""


@pytest.fixture
def analyzer(tmp_path):
    (tmp_path / "superflow_main_20260105.log").write_text(MAIN_LOG)
    (tmp_path / "superflow_errors_20260105.log").write_text(ERROR_LOG)
    return LogAnalyzer(str(tmp_path))


def test_parse_log_line(analyzer):
    parsed = analyzer.parse_log_line(MAIN_LOG.splitlines()[1])
    assert parsed['level'] == 'INFO'
    assert parsed['component'] == 'CLOSEDFORM'
    assert parsed['operation'] == 'verify'
    assert parsed['correlation_id'] == 'a1b2c3d4'
    assert parsed['message'].startswith('CHECK thm4_series PASS')
    assert parsed['timestamp'].year == 2026


def test_checks_frame(analyzer):
    checks = analyzer.checks_frame()
    assert len(checks) == 3
    assert list(checks['status']) == ['PASS', 'FAIL', 'PASS']
    assert checks['measured_value'].iloc[1] == pytest.approx(0.004)


def test_summarize_checks(analyzer):
    summary = analyzer.summarize_checks()
    first = summary.iloc[0]
    assert first['check'] == 'thm2_series'
    assert first['failed'] == 1
    thm4 = summary[summary['check'] == 'thm4_series'].iloc[0]
    assert thm4['passed'] == 2
    assert thm4['worst_measured'] == pytest.approx(5e-12)


def test_timings(analyzer):
    timings = analyzer.timings_frame()
    assert len(timings) == 2
    verify = timings[timings['operation'] == 'verify'].iloc[0]
    assert verify['duration'] == pytest.approx(2.5)
    assert verify['success']
    failed = timings[timings['operation'] == 'triple_reduction'].iloc[0]
    assert failed['duration'] == pytest.approx(5.0)
    assert not failed['success']
    summary = analyzer.summarize_timings()
    assert set(summary['operation']) == {'verify', 'triple_reduction'}
    assert summary[summary['operation'] == 'triple_reduction']['failures'].iloc[0] == 1


def test_error_patterns(analyzer):
    errors = analyzer.analyze_error_patterns()
    assert errors['total_errors'] == 2
    assert errors['error_by_type']['failed_check'] == 1
    assert errors['error_by_type']['RootCollisionError'] == 1
    assert errors['failed_checks']['thm2_series'] == 1
    assert errors['error_by_component']['HYPEROCT'] == 1
    last = errors['error_timeline'][-1]
    assert 'Stack Trace' in last['stack_trace']


def test_error_cutoff_excludes_old_records(analyzer):
    assert analyzer.analyze_error_patterns(hours=1)['total_errors'] == 0


def test_summary_report(analyzer):
    report = analyzer.generate_summary_report()
    assert 'Checks passed: 2' in report
    assert 'Checks failed: 1' in report
    assert 'FAIL thm2_series (CLOSEDFORM)' in report


def test_export_csv(analyzer, tmp_path):
    out = tmp_path / "metrics.csv"
    assert analyzer.export_metrics_to_csv(str(out))
    text = out.read_text()
    assert 'thm2_series' in text
    assert 'triple_reduction' in text


def test_empty_directory(tmp_path):
    analyzer = LogAnalyzer(str(tmp_path / "missing"))
    assert analyzer.checks_frame().empty
    assert analyzer.summarize_timings().empty
    assert not analyzer.export_metrics_to_csv(str(tmp_path / "none.csv"))
    assert 'Checks passed: 0' in analyzer.generate_summary_report()


def test_main_errors_only(analyzer, capsys):
    assert main(['--logs-dir', str(analyzer.logs_dir), '--errors-only']) == 0
    assert 'RootCollisionError' in capsys.readouterr().out


def test_reads_logs_written_by_superflow_logging(tmp_path):
    log_dir = tmp_path / "logs"
    setup_detailed_logging(str(log_dir), console_level=logging.CRITICAL)
    logger = get_component_logger("SPHERICAL")
    try:
        with OperationContext("constants", "SPHERICAL", logger):
            log_check(logger, "alpha2_exact", True, 0.0, 0.0, 0.0)
            log_check(logger, "vanish_count", False, 24, 26, 0)
        with pytest.raises(ZeroDivisionError):
            with OperationContext("zeros", "SPHERICAL", logger):
                raise ZeroDivisionError("empty cluster")
    finally:
        root = setup_detailed_logging(None, console_level=logging.CRITICAL)
        for handler in root.handlers:
            handler.flush()

    analyzer = LogAnalyzer(str(log_dir))
    checks = analyzer.checks_frame()
    assert set(checks['check']) == {'alpha2_exact', 'vanish_count'}
    assert set(checks['operation']) == {'constants'}
    timings = analyzer.timings_frame()
    assert set(timings['operation']) == {'constants', 'zeros'}
    errors = analyzer.analyze_error_patterns()
    assert errors['error_by_type']['ZeroDivisionError'] == 1
    assert errors['failed_checks']['vanish_count'] == 1
