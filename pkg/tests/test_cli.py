import hashlib
import json
import re
import subprocess
import sys

import pytest

from ewbench.cli import (
    DEFAULTS,
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_SAMPLING,
    main,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, *argv)
    return code, json.loads(out)


def normalize(text):
    return re.sub(r",\n  \"wall_time_s\": [^\n]*", "", text)


# --- verify -----------------------------------------------------------------


class TestVerify:
    def test_heisenberg_full_pass(self, capsys):
        code, rep = run_json(
            capsys,
            "verify", "--case", "heisenberg", "--ell", "1",
            "--checks", "gt,monopole,weyl",
            "--points", "200", "--seed", "7", "--tol", "1e-7",
        )
        assert code == EXIT_PASS
        assert rep["schema"] == 1
        assert rep["verdict"] == "pass"
        assert rep["n_points"] == 200
        assert set(rep["checks"]) == {"gt", "monopole", "weyl"}
        for chk in rep["checks"].values():
            assert chk["verdict"] == "pass"
            assert chk["max"] <= 1e-7
            assert len(chk["worst_point"]) == 3

    def test_report_key_order_is_fixed(self, capsys):
        _, rep = run_json(
            capsys, "verify", "--case", "heisenberg", "--checks", "gt",
            "--points", "10",
        )
        assert list(rep) == [
            "schema", "config", "chart", "n_points",
            "conventions", "checks", "verdict", "wall_time_s",
        ]
        assert list(rep["config"]) == list(DEFAULTS)
        assert list(rep["checks"]["gt"]) == [
            "max", "mean", "worst_point", "tol", "verdict",
        ]

    def test_negative_control_fails(self, capsys):
        code, rep = run_json(
            capsys,
            "verify", "--case", "from-H", "--H", "x*y",
            "--checks", "gt", "--points", "20",
        )
        assert code == EXIT_FAIL
        assert rep["verdict"] == "fail"
        assert rep["checks"]["gt"]["max"] > 1e-3

    def test_psi_preset_check(self, capsys):
        code, rep = run_json(
            capsys,
            "verify", "--case", "heisenberg", "--checks", "psi",
            "--c", "0.5", "--points", "30",
        )
        assert code == EXIT_PASS
        assert rep["config"]["c"] == 0.5

    def test_gauge_flag_preserves_structure_checks(self, capsys):
        code, rep = run_json(
            capsys,
            "verify", "--case", "heisenberg", "--f", "0.1*x",
            "--checks", "gt,monopole", "--points", "30", "--tol", "1e-6",
        )
        assert code == EXIT_PASS

    def test_generator_case(self, capsys):
        code, rep = run_json(
            capsys,
            "verify", "--case", "from-G", "--A", "p^2/2", "--B", "0",
            "--checks", "gt,monopole", "--points", "30",
        )
        assert code == EXIT_PASS


# --- lift and limit ------------------------------------------------------------


class TestLift:
    def test_class_b_lift_passes(self, capsys):
        code, rep = run_json(
            capsys,
            "lift", "--case", "class-b", "--F", "1", "--c", "0.5",
            "--checks", "em,maxwell", "--tol", "1e-6",
        )
        assert code == EXIT_PASS
        assert rep["n_points"] == 100
        assert rep["config"]["ell_used"] == 4.0
        assert rep["config"]["sign_fixed"] is False
        assert rep["chart"] == ["q", "p", "y", "t"]

    def test_heisenberg_sign_fix_recorded(self, capsys):
        code, rep = run_json(
            capsys,
            "lift", "--case", "heisenberg", "--ell", "1",
            "--checks", "em", "--points", "10",
        )
        assert code == EXIT_PASS
        assert rep["config"]["ell_used"] == -1.0
        assert rep["config"]["sign_fixed"] is True

    def test_invariants_check(self, capsys):
        code, rep = run_json(
            capsys,
            "lift", "--case", "heisenberg", "--checks", "invariants",
            "--points", "6", "--tol", "1e-6",
        )
        assert code == EXIT_PASS

    def test_alpha_chart(self, capsys):
        code, rep = run_json(
            capsys,
            "lift", "--case", "heisenberg", "--chart", "alpha",
            "--checks", "em", "--points", "6",
        )
        assert code == EXIT_PASS
        assert rep["chart"][0] == "alpha"


class TestLimit:
    def test_heisenberg_flow(self, capsys):
        code, rep = run_json(
            capsys, "limit", "--case", "heisenberg", "--ells", "100,200",
        )
        assert code == EXIT_PASS
        detail = rep["detail"]
        assert 3.6 <= detail["ratios"][0] <= 4.4
        assert detail["ell_used"] == [-100.0, -200.0]

    def test_class_b_flow(self, capsys):
        code, rep = run_json(
            capsys, "limit", "--case", "class-b", "--ells", "100,200,400",
        )
        assert code == EXIT_PASS
        assert not rep["detail"]["diverges"]

    def test_unknown_family(self, capsys):
        code, _ = run_cli(capsys, "limit", "--case", "class-a")
        assert code == EXIT_CONFIG


# --- eval ------------------------------------------------------------------------


class TestEval:
    def test_value_and_gradient(self, capsys):
        code, rep = run_json(
            capsys, "eval", "--expr", "p*ln(p)-p", "--at", "p=1",
        )
        assert code == EXIT_PASS
        assert rep["value"] == pytest.approx(-1.0)
        assert rep["gradient"]["p"] == pytest.approx(0.0)

    def test_hessian_at_order_two(self, capsys):
        code, rep = run_json(
            capsys, "eval", "--expr", "x^2*y", "--at", "x=2,y=3", "--order", "2",
        )
        assert code == EXIT_PASS
        assert rep["value"] == pytest.approx(12.0)
        assert rep["hessian"]["x"]["x"] == pytest.approx(6.0)
        assert rep["hessian"]["x"]["y"] == pytest.approx(4.0)

    def test_domain_error_is_sampling_exit(self, capsys):
        code, _ = run_cli(capsys, "eval", "--expr", "ln(x)", "--at", "x=-1")
        assert code == EXIT_SAMPLING

    def test_bad_point_syntax(self, capsys):
        code, _ = run_cli(capsys, "eval", "--expr", "x", "--at", "x:1")
        assert code == EXIT_CONFIG

    def test_order_out_of_range(self, capsys):
        code, _ = run_cli(capsys, "eval", "--expr", "x", "--at", "x=1",
                          "--order", "5")
        assert code == EXIT_CONFIG


# --- error paths ---------------------------------------------------------------------


class TestErrorExits:
    @pytest.mark.parametrize(
        "argv",
        (
            ("verify", "--case", "heisenberg", "--checks", "gt,bogus"),
            ("verify", "--case", "torus", "--checks", "gt"),
            ("verify", "--case", "class-a", "--beta", "2*(p", "--points", "5"),
            ("verify", "--case", "class-a", "--beta", "y^2", "--points", "5"),
            ("verify", "--case", "heisenberg", "--checks", "gt", "--tol", "-1"),
            ("verify", "--case", "heisenberg", "--f", "0.1*x",
             "--checks", "hypercr", "--points", "5"),
            ("verify", "--case", "from-G", "--checks", "hypercr",
             "--points", "5"),
            ("lift", "--case", "heisenberg", "--checks", "limit"),
            ("verify", "--case", "heisenberg", "--checks", "em",
             "--points", "5"),
        ),
        ids=(
            "unknown-check", "unknown-case", "parse-error", "heat-violation",
            "bad-tol", "hypercr-after-gauge", "hypercr-off-chart",
            "limit-under-lift", "em-under-verify",
        ),
    )
    def test_config_errors(self, capsys, argv):
        code, _ = run_cli(capsys, *argv)
        assert code == EXIT_CONFIG

    def test_guard_starved_domain_exhausts(self, capsys):
        code, _ = run_cli(
            capsys,
            "verify", "--case", "class-a", "--beta", "y-100",
            "--checks", "gt", "--points", "10",
        )
        assert code == EXIT_SAMPLING


# --- config file and output -------------------------------------------------------------


class TestConfigFile:
    def test_file_then_flag_override(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(
            {"case": "heisenberg", "checks": "gt", "points": 20, "tol": 1e-7}
        ))
        code, rep = run_json(capsys, "verify", "--config", str(path))
        assert code == EXIT_PASS
        assert rep["n_points"] == 20
        code, rep = run_json(
            capsys, "verify", "--config", str(path), "--points", "10",
        )
        assert rep["n_points"] == 10

    def test_unknown_key_rejected(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"case": "heisenberg", "mode": "fast"}))
        code, _ = run_cli(capsys, "verify", "--config", str(path))
        assert code == EXIT_CONFIG

    def test_reserved_key_rejected(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"case": "heisenberg", "ell_used": 3.0}))
        code, _ = run_cli(capsys, "verify", "--config", str(path))
        assert code == EXIT_CONFIG

    def test_missing_file(self, capsys, tmp_path):
        code, _ = run_cli(
            capsys, "verify", "--config", str(tmp_path / "absent.json"),
        )
        assert code == EXIT_CONFIG

    def test_out_file_matches_stdout(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        code, out = run_cli(
            capsys,
            "verify", "--case", "heisenberg", "--checks", "gt",
            "--points", "10", "--out", str(path),
        )
        assert code == EXIT_PASS
        assert path.read_text() == out


class TestDeterminism:
    ARGS = (
        "verify", "--case", "heisenberg", "--checks", "gt,monopole",
        "--points", "50", "--seed", "11",
    )

    def test_reports_byte_stable(self, capsys):
        _, first = run_cli(capsys, *self.ARGS)
        _, second = run_cli(capsys, *self.ARGS)
        a = hashlib.sha256(normalize(first).encode()).hexdigest()
        b = hashlib.sha256(normalize(second).encode()).hexdigest()
        assert a == b

    def test_thread_count_does_not_change_report(self, capsys, monkeypatch):
        _, serial = run_cli(capsys, *self.ARGS)
        monkeypatch.setenv("EWBENCH_THREADS", "4")
        _, threaded = run_cli(capsys, *self.ARGS)
        assert normalize(serial) == normalize(threaded)

    def test_seed_changes_worst_point(self, capsys):
        _, a = run_json(capsys, *self.ARGS)
        _, b = run_json(
            capsys,
            "verify", "--case", "heisenberg", "--checks", "gt,monopole",
            "--points", "50", "--seed", "12",
        )
        assert a["checks"]["gt"]["worst_point"] != b["checks"]["gt"]["worst_point"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ewbench", "verify", "--case", "heisenberg",
         "--checks", "gt", "--points", "5"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "pass"
