#!/usr/bin/env python3
"""
Tests for the superflow command line: subcommand reports, exit codes,
artifacts and configuration handling
"""

import json

import pytest

from superflow_cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, Report, build_parser, run


@pytest.fixture(autouse=True)
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SUPERFLOW_THREADS", raising=False)
    monkeypatch.delenv("SUPERFLOW_SEED", raising=False)
    return tmp_path


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_parser_lists_all_subcommands():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert set(sub.choices) == {"find", "dims", "integrals", "taylor", "orbit", "project",
                                "constants", "verify", "hyperoct", "extremal", "config"}


def test_find_tetrahedral(capsys):
    code, report = invoke(capsys, "find", "--group", "tetrahedral", "--expect-degree", "2")
    assert code == EXIT_OK
    assert report["schema"] == 1
    assert report["result"]["degree"] == 2
    assert report["result"]["unique"]
    assert report["checks"][0]["status"] == "PASS"


def test_failed_check_exits_one(capsys):
    code, report = invoke(capsys, "find", "--group", "tetrahedral", "--expect-degree", "4")
    assert code == EXIT_CHECK_FAILED
    assert not report["passed"]


def test_dims_table(capsys, workspace):
    code, report = invoke(capsys, "dims", "--family", "octa", "--max", "16", "--csv", "octa.csv")
    assert code == EXIT_OK
    table = report["result"]["table"]
    assert [row["closed_form"] for row in table] == [d * d // 16 for d in range(2, 17, 2)]
    assert (workspace / "superflow_output" / "octa.csv").exists()


def test_dims_cross_check(capsys):
    code, report = invoke(capsys, "dims", "--family", "tetra_full", "--max", "8", "--compute")
    assert code == EXIT_OK
    assert all(row["computed"] == row["closed_form"] for row in report["result"]["table"])


def test_integrals_jouanolou(capsys):
    code, report = invoke(capsys, "integrals", "--field", "jouanolou", "--max-degree", "4",
                          "--expect-none")
    assert code == EXIT_OK
    assert set(report["result"]["counts"].values()) == {0}


def test_integrals_basis(capsys):
    code, report = invoke(capsys, "integrals", "--components", "y*z", "x*z", "x*y", "--degree", "2")
    assert code == EXIT_OK
    assert len(report["result"]["basis"]) == 2


def test_taylor_projective(capsys):
    code, report = invoke(capsys, "taylor", "--field", "tetra", "--order", "4")
    assert code == EXIT_OK
    assert report["checks"][0]["name"] == "pde_residual"


def test_taylor_ray(capsys):
    code, report = invoke(capsys, "taylor", "--field", "tetra", "--order", "3", "--ray", "3,1,2")
    assert code == EXIT_OK
    assert report["result"]["coefficients"][0][:2] == ["0", "3"]


def test_orbit_monitors_and_csv(capsys, workspace):
    code, report = invoke(capsys, "orbit", "--field", "tetra", "--x0", "0.3,0.2,0.1",
                          "--t-end", "1", "--monitor", "x^2 - y^2", "--monitor", "x^2 - z^2",
                          "--semigroup", "0.3,0.3", "--csv", "orbit.csv")
    assert code == EXIT_OK
    names = [c["name"] for c in report["checks"]]
    assert "semigroup" in names
    assert sum(n.startswith("drift[") for n in names) == 2
    assert (workspace / "superflow_output" / "orbit.csv").exists()


def test_verify_theorem(capsys):
    code, report = invoke(capsys, "verify", "--theorem", "thm2")
    assert code == EXIT_OK
    assert report["checks"][0]["name"] == "thm2_series"


def test_verify_needs_a_target(capsys):
    code, _ = invoke(capsys, "verify")
    assert code == EXIT_USAGE


def test_hyperoct_singular(capsys):
    code, report = invoke(capsys, "hyperoct", "--task", "singular", "--q", "3")
    assert code == EXIT_OK
    assert report["result"]["elliptic_reducible"]


def test_hyperoct_summary(capsys):
    code, report = invoke(capsys, "hyperoct", "--n", "3")
    assert code == EXIT_OK
    assert report["result"]["solenoidal"]


def test_hyperoct_admissible(capsys):
    code, report = invoke(capsys, "hyperoct", "--n", "3", "--task", "admissible", "--xi", "1,1/5")
    assert code == EXIT_OK
    assert report["result"]["admissible"]
    assert report["result"]["xi"] == [1, "1/5"]


def test_hyperoct_collision_exits_one(capsys):
    code, report = invoke(capsys, "hyperoct", "--task", "reduce", "--point", "1,1,1,2,3",
                          "--t-end", "0.1")
    assert code == EXIT_CHECK_FAILED
    assert "RootCollisionError" in report["checks"][-1]["measured"]


def test_hyperoct_bad_dimension_is_usage_error(capsys):
    code, _ = invoke(capsys, "hyperoct", "--n", "4")
    assert code == EXIT_USAGE


def test_unknown_group_is_usage_error(capsys):
    code, report = invoke(capsys, "find", "--group", "dodecahedral")
    assert code == EXIT_USAGE
    assert report is None


def test_unknown_subcommand_is_usage_error(capsys):
    assert run(["reticulate"]) == EXIT_USAGE


def test_invalid_environment_is_usage_error(capsys, monkeypatch):
    monkeypatch.setenv("SUPERFLOW_THREADS", "lots")
    code, _ = invoke(capsys, "find", "--group", "tetrahedral")
    assert code == EXIT_USAGE


def test_output_file_and_determinism(capsys, workspace):
    argv = ["--output", "reports/find.json", "find", "--group", "tetrahedral"]
    assert run(argv) == EXIT_OK
    first = (workspace / "reports" / "find.json").read_text()
    assert run(argv) == EXIT_OK
    assert (workspace / "reports" / "find.json").read_text() == first
    assert capsys.readouterr().out == ""


def test_timing_is_opt_in(capsys):
    _, report = invoke(capsys, "find", "--group", "tetrahedral")
    assert "wall_time" not in report
    _, report = invoke(capsys, "--timing", "find", "--group", "tetrahedral")
    assert report["wall_time"] >= 0


def test_config_init_and_seed(capsys, workspace):
    code, report = invoke(capsys, "--config", "cfg", "config", "--init")
    assert code == EXIT_OK
    assert report["result"]["created"]
    assert (workspace / "cfg" / "superflow_config.json").exists()
    _, report = invoke(capsys, "--config", "cfg", "--seed", "5", "config")
    assert report["result"]["effective"]["seed"] == 5
    assert report["result"]["summary"]["configured"]


def test_log_dir_receives_checks(capsys, workspace):
    code, _ = invoke(capsys, "--log-dir", "logs", "find", "--group", "tetrahedral",
                     "--expect-degree", "2")
    assert code == EXIT_OK
    main_logs = list((workspace / "logs").glob("superflow_main_*.log"))
    assert main_logs
    assert "CHECK superflow_degree PASS" in main_logs[0].read_text()


def test_report_json_float_format():
    report = Report(command=["x"], result={"value": 0.1 + 0.2, "ratio": 2 ** 0.5})
    payload = json.loads(report.to_json())
    assert payload["result"]["value"] == 0.30000000000000004
    assert payload["passed"]
