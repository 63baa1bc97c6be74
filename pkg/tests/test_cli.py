"""End-to-end command-line contracts: flags, reports, data files, exit codes."""

import json
import math

import numpy as np
import pytest

from greypath.cli import main


def run(argv):
    return main(argv)


class TestMlEval:
    def test_exponential_value(self, capsys):
        assert run(["ml-eval", "--beta", "1", "--z", "-2"]) == 0
        out = capsys.readouterr().out.strip()
        assert out == "0.1353352832"

    def test_half_order(self, capsys):
        assert run(["ml-eval", "--beta", "0.5", "--z", "-1"]) == 0
        assert capsys.readouterr().out.strip() == "0.4275835762"


class TestKernelCheck:
    def test_single_h(self, tmp_path):
        out = tmp_path / "r.json"
        assert run(["kernel-check", "--H", "0.7", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["passed"] is True
        assert rep["max_abs_error"] <= 1e-6
        assert rep["checks"][0]["pairs"] == 16

    def test_multiple_h(self, tmp_path):
        out = tmp_path / "r.json"
        assert run(["kernel-check", "--H", "0.55,0.85", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert len(rep["checks"]) == 2


class TestVerifyCm:
    def test_zero_shift_passes_with_zero_z(self, tmp_path):
        out = tmp_path / "r.json"
        code = run(["verify-cm", "--beta", "0.5", "--alpha", "1.5",
                    "--N", "2000", "--steps", "32", "--seed", "3",
                    "--hdot", "const:0", "--coupled-estimator",
                    "--out", str(out)])
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["estimates"]["z_score"] == 0.0
        assert rep["passed"] is True

    def test_small_n_is_usage_error(self):
        assert run(["verify-cm", "--N", "10"]) == 2

    def test_worker_count_invariance(self, tmp_path):
        texts = []
        for w, name in ((1, "a.json"), (3, "b.json")):
            out = tmp_path / name
            assert run(["verify-cm", "--beta", "0.5", "--alpha", "1.5",
                        "--N", "4000", "--steps", "32", "--seed", "5",
                        "--workers", str(w), "--out", str(out)]) == 0
            texts.append(out.read_bytes())
        assert texts[0] == texts[1]


class TestVerifyIbp:
    def test_default_pair(self, tmp_path):
        out = tmp_path / "r.json"
        code = run(["verify-ibp", "--beta", "0.5", "--alpha", "1.5",
                    "--N", "4000", "--steps", "32", "--seed", "6",
                    "--out", str(out)])
        assert code == 0
        rep = json.loads(out.read_text())
        assert abs(rep["estimates"]["z_score"]) <= 3.0

    def test_two_argument_function(self, tmp_path):
        out = tmp_path / "r.json"
        code = run(["verify-ibp", "--f", "sin_tanh", "--g", "logistic",
                    "--times", "0.5,1.0", "--N", "4000", "--steps", "32",
                    "--seed", "7", "--out", str(out)])
        assert code == 0


class TestSimulate:
    def test_csv_and_summary(self, tmp_path):
        out = tmp_path / "r.json"
        csv = tmp_path / "paths.csv"
        code = run(["simulate", "--beta", "0.5", "--alpha", "1.5", "--N", "32",
                    "--steps", "16", "--seed", "8", "--csv", str(csv),
                    "--out", str(out)])
        assert code == 0
        lines = csv.read_text().strip().splitlines()
        assert lines[0] == "draw_id,tau,t,value"
        assert len(lines) == 1 + 32 * 17
        first = lines[1].split(",")
        assert first[0] == "0" and float(first[2]) == 0.0 and float(first[3]) == 0.0
        rep = json.loads(out.read_text())
        # small runs emit data and informational statistics, ungated
        assert rep["checks_gated"] is False
        assert rep["passed"] is True
        names = {c["statistic"] for c in rep["checks"]}
        assert {"moment2", "moment4", "tau_mean"} <= names

    def test_large_run_gates_statistics(self, tmp_path):
        out = tmp_path / "r.json"
        code = run(["simulate", "--beta", "0.5", "--alpha", "1.5",
                    "--N", "20000", "--steps", "32", "--seed", "9",
                    "--out", str(out)])
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["checks_gated"] is True
        assert all(c["passed"] for c in rep["checks"])


class TestSampleSubordinator:
    def test_law_checks_and_csv(self, tmp_path):
        out = tmp_path / "r.json"
        csv = tmp_path / "y.csv"
        code = run(["sample-subordinator", "--beta", "0.5", "--N", "20000",
                    "--seed", "9", "--csv", str(csv), "--out", str(out)])
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["passed"] is True
        assert len(rep["checks"]) == 9  # 5 transform points + 4 moments
        samples = np.loadtxt(csv, skiprows=1)
        assert samples.shape == (20000,)
        assert np.all(samples > 0.0)


class TestConfigFile:
    def test_config_supplies_values(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[ml-eval]\nbeta = 1\nz = -2\n")
        assert run(["--config", str(cfg), "ml-eval"]) == 0
        assert capsys.readouterr().out.strip() == "0.1353352832"

    def test_flags_win_over_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[ml-eval]\nbeta = 1\nz = -2\n")
        assert run(["--config", str(cfg), "ml-eval", "--beta", "0.5",
                    "--z", "-1"]) == 0
        assert capsys.readouterr().out.strip() == "0.4275835762"
