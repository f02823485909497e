#!/usr/bin/env python3
"""
Log Analysis Utility for superflow runs

Reads the main/debug/error logs written by superflow_logging back into
pandas frames: check outcomes, operation timings and error records.
"""

import argparse
import json
import re
import sys
from collections import Counter, defaultdict
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

CHECK_COLUMNS = ["timestamp", "component", "operation", "correlation_id", "check",
                 "status", "measured", "reference", "tolerance", "measured_value"]
TIMING_COLUMNS = ["timestamp", "component", "operation", "correlation_id", "duration", "success"]


class LogAnalyzer:
    """Check and timing analyzer for superflow logs"""

    def __init__(self, logs_dir: str = "logs"):
        self.logs_dir = Path(logs_dir)
        self.log_patterns = {
            'timestamp': r'^(\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2})',
            'level': r' - (DEBUG|INFO|WARNING|ERROR|CRITICAL) - ',
            'component': r' - ([A-Z0-9_]+):(\S+) \[([^\]]+)\]',
            'check': r'^CHECK (\S+) (PASS|FAIL) measured=(.*?) reference=(.*?) tolerance=(.*)$',
            'completed': r'^Completed (\S+) successfully in ([\d.]+)s$',
            'failed': r'^Failed (\S+): (\w+): ',
            'stack_trace': r'^Stack Trace: ',
        }

    def get_log_files(self, pattern: str = "*.log") -> List[Path]:
        """Get all log files matching the pattern"""
        if not self.logs_dir.exists():
            return []
        return sorted(self.logs_dir.glob(pattern))

    def parse_log_line(self, line: str) -> Dict[str, Any]:
        """Parse a single log line and extract structured data"""
        parsed = {
            'raw_line': line.strip(),
            'timestamp': None,
            'level': None,
            'component': None,
            'operation': None,
            'correlation_id': None,
            'message': None,
        }

        timestamp_match = re.search(self.log_patterns['timestamp'], line)
        if timestamp_match:
            try:
                parsed['timestamp'] = datetime.strptime(timestamp_match.group(1), '%Y-%m-%d %H:%M:%S')
            except ValueError:
                pass

        level_match = re.search(self.log_patterns['level'], line)
        if level_match:
            parsed['level'] = level_match.group(1)

        component_match = re.search(self.log_patterns['component'], line)
        if component_match:
            parsed['component'] = component_match.group(1)
            parsed['operation'] = component_match.group(2)
            parsed['correlation_id'] = component_match.group(3)

        # Message is everything after the structured prefix
        message_start = line.find('] - ')
        if message_start != -1:
            parsed['message'] = line[message_start + 4:].strip()

        return parsed

    def _read_records(self, log_files: Sequence[Path]) -> List[Dict[str, Any]]:
        records = []
        for log_file in log_files:
            try:
                with open(log_file, 'r', encoding='utf-8') as f:
                    for line in f:
                        parsed = self.parse_log_line(line)
                        if parsed['level'] is not None:
                            records.append(parsed)
            except OSError as e:
                print(f"Error reading {log_file}: {e}", file=sys.stderr)
        return records

    def checks_frame(self, log_files: Optional[Sequence[Path]] = None) -> pd.DataFrame:
        """One row per CHECK record"""
        if log_files is None:
            log_files = self.get_log_files("superflow_main_*.log")

        rows = []
        for parsed in self._read_records(log_files):
            match = re.match(self.log_patterns['check'], parsed['message'] or '')
            if not match:
                continue
            rows.append({
                'timestamp': parsed['timestamp'],
                'component': parsed['component'],
                'operation': parsed['operation'],
                'correlation_id': parsed['correlation_id'],
                'check': match.group(1),
                'status': match.group(2),
                'measured': match.group(3),
                'reference': match.group(4),
                'tolerance': match.group(5),
            })

        frame = pd.DataFrame(rows, columns=CHECK_COLUMNS[:-1])
        frame['measured_value'] = pd.to_numeric(frame['measured'], errors='coerce')
        return frame

    def timings_frame(self, log_files: Optional[Sequence[Path]] = None) -> pd.DataFrame:
        """One row per finished operation, successful or failed"""
        if log_files is None:
            log_files = self.get_log_files("superflow_main_*.log")

        rows = []
        open_ops: Dict[str, datetime] = {}
        for parsed in self._read_records(log_files):
            message = parsed['message'] or ''
            key = f"{parsed['correlation_id']}:{parsed['operation']}"
            if message.startswith('Starting '):
                open_ops[key] = parsed['timestamp']
                continue
            completed = re.match(self.log_patterns['completed'], message)
            failed = re.match(self.log_patterns['failed'], message)
            if completed:
                duration, success = float(completed.group(2)), True
            elif failed:
                start = open_ops.get(key)
                duration = ((parsed['timestamp'] - start).total_seconds()
                            if start and parsed['timestamp'] else float('nan'))
                success = False
            else:
                continue
            open_ops.pop(key, None)
            rows.append({
                'timestamp': parsed['timestamp'],
                'component': parsed['component'],
                'operation': parsed['operation'],
                'correlation_id': parsed['correlation_id'],
                'duration': duration,
                'success': success,
            })

        return pd.DataFrame(rows, columns=TIMING_COLUMNS)

    def summarize_checks(self, checks: Optional[pd.DataFrame] = None) -> pd.DataFrame:
        """Pass/fail counts per check name"""
        checks = self.checks_frame() if checks is None else checks
        if checks.empty:
            return pd.DataFrame(columns=['check', 'component', 'passed', 'failed', 'worst_measured'])
        grouped = checks.groupby(['check', 'component'])
        summary = pd.DataFrame({
            'passed': grouped['status'].apply(lambda s: int((s == 'PASS').sum())),
            'failed': grouped['status'].apply(lambda s: int((s == 'FAIL').sum())),
            'worst_measured': grouped['measured_value'].apply(lambda s: s.abs().max()),
        }).reset_index()
        return summary.sort_values(['failed', 'check'], ascending=[False, True]).reset_index(drop=True)

    def summarize_timings(self, timings: Optional[pd.DataFrame] = None) -> pd.DataFrame:
        """Count, total, mean and max duration per component and operation"""
        timings = self.timings_frame() if timings is None else timings
        if timings.empty:
            return pd.DataFrame(columns=['component', 'operation', 'runs', 'total', 'mean', 'max', 'failures'])
        grouped = timings.groupby(['component', 'operation'])
        summary = grouped['duration'].agg(['count', 'sum', 'mean', 'max'])
        summary = summary.rename(columns={'count': 'runs', 'sum': 'total'})
        summary['failures'] = grouped['success'].apply(lambda s: int((~s.astype(bool)).sum()))
        return summary.reset_index().sort_values('total', ascending=False).reset_index(drop=True)

    def analyze_error_patterns(self, hours: Optional[int] = None) -> Dict[str, Any]:
        """Analyze error records, optionally only from the last N hours"""
        cutoff_time = datetime.now() - timedelta(hours=hours) if hours else None
        error_files = self.get_log_files("superflow_errors_*.log")

        error_analysis = {
            'total_errors': 0,
            'error_by_component': Counter(),
            'error_by_type': Counter(),
            'failed_checks': Counter(),
            'error_timeline': [],
            'correlation_chains': defaultdict(list),
        }

        for error_file in error_files:
            try:
                with open(error_file, 'r', encoding='utf-8') as f:
                    current_error = None
                    stack_trace: List[str] = []

                    for line in f:
                        parsed = self.parse_log_line(line)

                        if parsed['level'] in ('ERROR', 'CRITICAL'):
                            if cutoff_time and parsed['timestamp'] and parsed['timestamp'] < cutoff_time:
                                current_error = None
                                continue
                            if current_error:
                                current_error['stack_trace'] = '\n'.join(stack_trace)
                                error_analysis['error_timeline'].append(current_error)

                            current_error = {
                                'timestamp': parsed['timestamp'],
                                'component': parsed['component'],
                                'operation': parsed['operation'],
                                'correlation_id': parsed['correlation_id'],
                                'message': parsed['message'],
                                'level': parsed['level'],
                            }
                            stack_trace = []

                            error_analysis['total_errors'] += 1
                            error_analysis['error_by_component'][parsed['component']] += 1

                            message = parsed['message'] or ''
                            check = re.match(self.log_patterns['check'], message)
                            failed = re.match(self.log_patterns['failed'], message)
                            if check:
                                error_analysis['error_by_type']['failed_check'] += 1
                                error_analysis['failed_checks'][check.group(1)] += 1
                            elif failed:
                                error_analysis['error_by_type'][failed.group(2)] += 1
                            else:
                                error_analysis['error_by_type']['other'] += 1

                            if parsed['correlation_id'] and parsed['correlation_id'] != 'N/A':
                                error_analysis['correlation_chains'][parsed['correlation_id']].append(current_error)

                        elif current_error is not None:
                            if re.match(self.log_patterns['stack_trace'], line) or stack_trace:
                                stack_trace.append(line.rstrip())

                    if current_error:
                        current_error['stack_trace'] = '\n'.join(stack_trace)
                        error_analysis['error_timeline'].append(current_error)

            except OSError as e:
                print(f"Error analyzing {error_file}: {e}", file=sys.stderr)

        return error_analysis

    def generate_summary_report(self, hours: Optional[int] = None) -> str:
        """Plain-text summary of checks, timings and errors"""
        checks = self.summarize_checks()
        timings = self.summarize_timings()
        errors = self.analyze_error_patterns(hours)

        total_passed = int(checks['passed'].sum()) if not checks.empty else 0
        total_failed = int(checks['failed'].sum()) if not checks.empty else 0

        report = [
            "=" * 80,
            "SUPERFLOW - LOG ANALYSIS REPORT",
            f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}",
            f"Analysis Period: {'Last %d hours' % hours if hours else 'all records'}",
            "=" * 80,
            "",
            "CHECK SUMMARY",
            "-" * 40,
            f"Checks passed: {total_passed:,}",
            f"Checks failed: {total_failed:,}",
        ]

        for row in checks[checks['failed'] > 0].itertuples(index=False):
            report.append(f"  FAIL {row.check} ({row.component}): {row.failed} time(s)")

        report.extend([
            "",
            "OPERATION TIMINGS",
            "-" * 40,
        ])
        for row in timings.head(15).itertuples(index=False):
            report.append(f"  {row.component}:{row.operation}: {row.runs} run(s), "
                          f"total {row.total:.3f}s, max {row.max:.3f}s")

        report.extend([
            "",
            "ERROR ANALYSIS",
            "-" * 40,
            f"Total Errors: {errors['total_errors']:,}",
            "",
            "Top Error Types:",
        ])
        for error_type, count in errors['error_by_type'].most_common(5):
            report.append(f"  {error_type}: {count:,}")

        report.extend(["", "Top Error Components:"])
        for component, count in errors['error_by_component'].most_common(5):
            report.append(f"  {component}: {count:,}")

        report.extend(["", "=" * 80])
        return '\n'.join(report)

    def export_metrics_to_csv(self, output_file: str) -> bool:
        """Export per-check and per-operation summaries to one CSV"""
        checks = self.summarize_checks().assign(kind='check')
        timings = self.summarize_timings().assign(kind='timing')
        frames = [f for f in (checks, timings) if not f.empty]
        if not frames:
            print("No check or timing data available for export", file=sys.stderr)
            return False
        pd.concat(frames, ignore_index=True, sort=False).to_csv(output_file, index=False)
        print(f"Metrics exported to: {output_file}", file=sys.stderr)
        return True


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description='Analyze superflow run logs')
    parser.add_argument('--logs-dir', default='logs', help='Directory containing log files')
    parser.add_argument('--hours', type=int, help='Only analyze errors from the last N hours')
    parser.add_argument('--export-csv', help='Export metrics to CSV file')
    parser.add_argument('--errors-only', action='store_true', help='Show only error analysis')

    args = parser.parse_args(argv)

    analyzer = LogAnalyzer(args.logs_dir)

    if args.errors_only:
        errors = analyzer.analyze_error_patterns(args.hours)
        print(json.dumps(errors, indent=2, default=str))
    else:
        print(analyzer.generate_summary_report(args.hours))

    if args.export_csv:
        analyzer.export_metrics_to_csv(args.export_csv)

    return 0


if __name__ == "__main__":
    sys.exit(main())
