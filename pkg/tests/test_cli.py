"""CLI dispatch, output formats, determinism, and exit codes."""

import json
import subprocess
import sys

import pytest

from hsep.cli import main


def run_cli(args, capsys):
    rc = main(args)
    out = capsys.readouterr().out
    return rc, out


class TestSubcommands:
    def test_tasep_prob_with_oracle(self, capsys):
        rc, out = run_cli(
            [
                "tasep-prob", "--x", "3,1", "--t", "1", "--alpha", "0.5",
                "--oracle", "--s-max", "15",
            ],
            capsys,
        )
        assert rc == 0
        payload = json.loads(out)
        assert payload["schema"] == 1
        assert payload["difference"] < 1e-9

    def test_asep_prob(self, capsys):
        rc, out = run_cli(
            [
                "asep-prob", "--x", "2,1", "--y", "", "--q", "0.3",
                "--alpha", "0.6", "--t", "0.4", "--nodes", "24",
            ],
            capsys,
        )
        assert rc == 0
        payload = json.loads(out)
        assert 0.0 <= payload["value"] <= 1.0

    def test_joint_and_current(self, capsys):
        rc, out = run_cli(
            ["joint", "--s", "3,1", "--t", "1", "--alpha", "0.5"], capsys
        )
        assert rc == 0
        rc, out = run_cli(
            ["current", "--n", "2", "--t", "1", "--alpha", "0.5"], capsys
        )
        assert rc == 0
        assert 0 < json.loads(out)["value"] < 1

    def test_gt_sum(self, capsys):
        rc, out = run_cli(
            ["gt-sum", "--x", "3,1", "--t", "0.8", "--alpha", "0.6"], capsys
        )
        assert rc == 0
        payload = json.loads(out)
        assert payload["truncation_remainder"] < 1e-8

    def test_conditional(self, capsys):
        rc, out = run_cli(
            [
                "conditional", "--n", "2", "--p", "2", "--a", "1",
                "--t", "1", "--alpha", "0.5",
            ],
            capsys,
        )
        assert rc == 0
        payload = json.loads(out)
        assert "residuals" in payload["conditional"]

    def test_oracle_and_simulate(self, capsys):
        rc, out = run_cli(
            [
                "oracle", "--y", "", "--x", "2,1", "--q", "0", "--alpha", "0.5",
                "--t", "1", "--s-max", "14",
            ],
            capsys,
        )
        assert rc == 0
        assert json.loads(out)["tail_bound"] < 1e-9
        rc, out = run_cli(
            [
                "simulate", "--y", "", "--t", "0.5", "--alpha", "0.7",
                "--n", "1000", "--seed", "7",
            ],
            capsys,
        )
        assert rc == 0
        assert json.loads(out)["n_traj"] == 1000

    def test_csv_format(self, capsys):
        rc, out = run_cli(
            [
                "tasep-prob", "--x", "2", "--t", "1", "--alpha", "0.5",
                "--format", "csv",
            ],
            capsys,
        )
        assert rc == 0
        header, row = out.strip().splitlines()
        assert "value" in header.split(",")


class TestDeterminism:
    def test_identical_runs_identical_output(self, capsys, tmp_path):
        args = [
            "simulate", "--y", "", "--t", "0.5", "--alpha", "0.7",
            "--n", "5000", "--seed", "11",
        ]
        _, out1 = run_cli(args, capsys)
        _, out2 = run_cli(args, capsys)
        assert out1 == out2  # simulate output carries no timestamp

    def test_json_identical_modulo_timestamp(self, capsys):
        args = ["tasep-prob", "--x", "3,1", "--t", "1", "--alpha", "0.5"]
        _, out1 = run_cli(args, capsys)
        _, out2 = run_cli(args, capsys)
        d1, d2 = json.loads(out1), json.loads(out2)
        d1.pop("timestamp")
        d2.pop("timestamp")
        assert d1 == d2


class TestExitCodes:
    def test_parse_error_is_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["tasep-prob", "--x", "3,1"])  # missing required arguments
        assert exc.value.code == 2

    def test_precondition_violation_is_3(self, capsys):
        # Pfaffian validity domain y_M > N-M+1 violated
        rc, _ = run_cli(
            [
                "tasep-prob", "--y", "2,1", "--x", "4,2,1", "--t", "1",
                "--alpha", "0.5",
            ],
            capsys,
        )
        assert rc == 3

    def test_bad_config_is_3(self, capsys):
        rc, _ = run_cli(
            ["tasep-prob", "--x", "1,3", "--t", "1", "--alpha", "0.5"], capsys
        )
        assert rc == 3

    def test_verify_quick_passes(self, capsys):
        rc, out = run_cli(["verify", "--level", "quick"], capsys)
        assert rc == 0
        assert "ALL CHECKS PASS" in out

    def test_entry_point_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "hsep.cli", "current", "--n", "0",
             "--t", "1", "--alpha", "0.5"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
