"""Command-line surface: spec parsing, reports, exit codes, determinism."""

import json

import pytest

from confhyp.cli import SpecError, main, run_task
from confhyp.parser import parse_expr
from confhyp.expr import Chart


BALL_SPEC = {
    "task": "pe-check",
    "coordinates": ["r", "x1", "x2", "x3"],
    "boundary_coordinate": "r",
    "order": 5,
    "metric": [["1" if i == j else "0" for j in range(4)] for i in range(4)],
    "defining_function": "(1 - r^2 - x1^2 - x2^2 - x3^2)/2",
}


class TestRunTask:
    def test_pe_check_ball(self):
        report = run_task(BALL_SPEC)
        assert report["passed"]
        assert report["schema_version"] == "1"
        names = {c["name"] for c in report["checks"]}
        assert {"scale_tractor_parallel", "scale_tractor_unit_norm"} <= names

    def test_fg_expand_report_roundtrip(self):
        from confhyp.parser import print_expr
        spec = {"task": "fg-expand", "dimension": 4, "order": 5, "seed": 1,
                "free_coefficient": "random"}
        report = run_task(spec)
        assert report["passed"]
        coeffs = report["results"]["coefficient_r3"]
        assert coeffs
        ch = Chart(("x1", "x2", "x3"), radial=None)
        for printed in coeffs.values():
            assert print_expr(parse_expr(printed, ch)) == printed

    def test_determinism(self):
        spec = {"task": "fg-expand", "dimension": 4, "order": 5, "seed": 3,
                "free_coefficient": "random"}
        r1 = run_task(spec)
        r2 = run_task(spec)
        r1.pop("elapsed_seconds")
        r2.pop("elapsed_seconds")
        assert r1 == r2

    def test_dn_task_d4(self):
        spec = {"task": "dn", "dimension": 4, "order": 7, "seed": 2}
        report = run_task(spec)
        assert report["passed"]
        names = {c["name"]: c["passed"] for c in report["checks"]}
        assert names["lie3_equals_minus4_dn"]
        assert names["fourth_form_equals_dn"]
        assert names["divergence_free"]

    def test_unknown_task_rejected(self):
        with pytest.raises(SpecError):
            run_task({"task": "nonsense"})

    def test_bad_metric_rejected(self):
        spec = dict(BALL_SPEC, metric=[["1", "r"], ["0", "1"]])
        with pytest.raises(SpecError):
            run_task(spec)


class TestMainEntry:
    def test_exit_codes(self, tmp_path, capsys):
        path = tmp_path / "ball.json"
        path.write_text(json.dumps(BALL_SPEC))
        assert main([str(path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["passed"]

    def test_input_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"task": "pe-check", "coordinates": ["r", "x1", "x2"],
                                   "boundary_coordinate": "r", "order": 4,
                                   "metric": [["1", "0", "oops"], ["0", "1", "0"],
                                              ["oops", "0", "1"]]}))
        assert main([str(bad)]) == 2

    def test_missing_file_exit_code(self):
        assert main(["/nonexistent/spec.json"]) == 2

    def test_check_failure_exit_code(self, tmp_path, capsys):
        # a non-Einstein pair: pe-check runs fine but fails its checks
        spec = {
            "task": "pe-check",
            "coordinates": ["r", "x1", "x2", "x3"],
            "boundary_coordinate": "r",
            "order": 4,
            "metric": [["1", "0", "0", "0"],
                       ["0", "1 + x2^2", "0", "0"],
                       ["0", "0", "1", "0"],
                       ["0", "0", "0", "1"]],
        }
        path = tmp_path / "notpe.json"
        path.write_text(json.dumps(spec))
        assert main([str(path)]) == 1

    def test_out_flag_writes_report(self, tmp_path, capsys):
        path = tmp_path / "ball.json"
        path.write_text(json.dumps(BALL_SPEC))
        outp = tmp_path / "report.json"
        assert main([str(path), "--out", str(outp)]) == 0
        saved = json.loads(outp.read_text())
        assert saved["task"] == "pe-check"
