"""End-to-end CLI: JSON in, JSON/CSV out, stable bytes, exit codes."""

import json

import numpy as np
import pytest

from corruptlab.cli import main
from corruptlab.kernels import Space, identity, kernel_to_json
from corruptlab.reconstruct import loss_to_json, zero_one_loss

from helpers import asym_noise, binary_noise


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def coin_problem_file(tmp_path):
    thetas = ["0.4", "0.6"]
    problem = {
        "thetas": thetas,
        "actions": [f"{a / 10:.1f}" for a in range(11)],
        "loss": [[abs(t - a / 10) for a in range(11)] for t in (0.4, 0.6)],
        "experiment": {
            "from": thetas,
            "to": ["tails", "heads"],
            "matrix": [[0.6, 0.4], [0.4, 0.6]],
        },
    }
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(problem))
    return str(path)


def write_json(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


class TestAnalyze:
    def test_identity_kernel(self, tmp_path, capsys):
        path = write_json(tmp_path, "k.json", kernel_to_json(identity(Space(["a", "b"]))))
        code, out, _ = run(capsys, "analyze", "--kernel", path)
        assert code == 0
        report = json.loads(out)
        assert report["alpha"] == 1.0 and report["lambda"] == 0.0
        assert report["reconstructible"] is True and report["row_norm"] == 1.0

    def test_binary_noise_with_loss(self, tmp_path, capsys):
        t = asym_noise(0.1, 0.2)
        kpath = write_json(tmp_path, "k.json", kernel_to_json(t))
        lpath = write_json(tmp_path, "l.json", loss_to_json(zero_one_loss(t.domain)))
        code, out, _ = run(capsys, "analyze", "--kernel", kpath, "--loss", lpath)
        assert code == 0
        report = json.loads(out)
        assert report["alpha"] == pytest.approx(0.7, abs=1e-12)
        assert report["corrected_sup"] == pytest.approx(0.9 / 0.7, abs=1e-9)

    def test_non_reconstructible_reports_null(self, tmp_path, capsys):
        t = asym_noise(0.5, 0.5)
        kpath = write_json(tmp_path, "k.json", kernel_to_json(t))
        lpath = write_json(tmp_path, "l.json", loss_to_json(zero_one_loss(t.domain)))
        code, out, _ = run(capsys, "analyze", "--kernel", kpath, "--loss", lpath)
        assert code == 0
        report = json.loads(out)
        assert report["reconstructible"] is False
        assert report["row_norm"] is None and report["corrected_sup"] is None

    def test_malformed_json_exits_two(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run(capsys, "analyze", "--kernel", str(path))
        assert code == 2 and "JSON" in err

    def test_invalid_kernel_exits_two(self, tmp_path, capsys):
        path = write_json(tmp_path, "k.json",
                          {"from": ["a"], "to": ["x", "y"], "matrix": [[0.5], [0.4]]})
        code, _, err = run(capsys, "analyze", "--kernel", str(path))
        assert code == 2 and err

    def test_byte_stable(self, tmp_path, capsys):
        path = write_json(tmp_path, "k.json", kernel_to_json(binary_noise(0.2)))
        _, out1, _ = run(capsys, "analyze", "--kernel", path)
        _, out2, _ = run(capsys, "analyze", "--kernel", path)
        assert out1 == out2


class TestTables:
    def test_binary_symmetric_row(self, capsys):
        code, out, _ = run(capsys, "tables", "--family", "binary_label_noise",
                           "--grid", "0:0.45:0.05")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("param,alpha_closed,alpha_numeric")
        row = dict(zip(lines[0].split(","), [l for l in lines if l.startswith("0.2,")][0].split(",")))
        assert float(row["alpha_closed"]) == pytest.approx(0.6, abs=1e-12)
        assert float(row["alpha_numeric"]) == pytest.approx(0.6, abs=1e-12)
        assert float(row["max_abs_diff"]) <= 1e-12

    def test_partial_labels_numeric_only(self, capsys):
        code, out, _ = run(capsys, "tables", "--family", "partial_labels",
                           "--grid", "0.3:0.3:0.1")
        assert code == 0
        header, row = out.strip().split("\n")
        cells = dict(zip(header.split(","), row.split(",")))
        assert float(cells["alpha_closed"]) == pytest.approx(0.7, abs=1e-12)
        assert cells["row_norm_closed"] == "" and cells["corrected01_closed"] == ""
        assert cells["row_norm_numeric"] != ""

    def test_non_reconstructible_point_flagged(self, capsys):
        code, out, _ = run(capsys, "tables", "--family", "binary_label_noise",
                           "--grid", "0.4:0.6:0.1")
        assert code == 0
        rows = out.strip().split("\n")[1:]
        flagged = [r for r in rows if r.endswith("non-reconstructible")]
        assert len(flagged) == 1 and flagged[0].startswith("0.5,")
        clean_rows = [r for r in rows if not r.endswith("non-reconstructible")]
        assert all(r.split(",")[4] != "" for r in clean_rows)  # numeric row norm present

    def test_unknown_family_exits_two(self, capsys):
        code, _, err = run(capsys, "tables", "--family", "nope", "--grid", "0:0.4:0.1")
        assert code == 2 and "family" in err

    def test_bad_grid_exits_two(self, capsys):
        code, _, err = run(capsys, "tables", "--family", "partial_labels", "--grid", "0-1-2")
        assert code == 2


class TestPlan:
    def test_plan_report(self, tmp_path, capsys):
        offers = [
            {"name": "A", "alpha": 0.9, "cost": {"num": 3, "den": 1}, "corrected_sup": 2.0},
            {"name": "B", "alpha": 0.5, "cost": {"num": 1, "den": 1}, "corrected_sup": 1.0},
        ]
        path = write_json(tmp_path, "offers.json", offers)
        code, out, _ = run(capsys, "plan", "--offers", path, "--budget", "10")
        assert code == 0
        report = json.loads(out)
        assert report["greedy"]["counts"] == {"B": 10}
        assert report["exact"]["objective"] == pytest.approx(5.0, abs=1e-12)
        assert report["ranking_lower"] == ["B", "A"]
        assert report["ranking_upper"] == ["B", "A"]

    def test_missing_sup_reports_null_upper(self, tmp_path, capsys):
        offers = [{"name": "A", "alpha": 0.9, "cost": {"num": 1, "den": 1}}]
        path = write_json(tmp_path, "offers.json", offers)
        code, out, _ = run(capsys, "plan", "--offers", path, "--budget", "5")
        assert code == 0
        assert json.loads(out)["ranking_upper"] is None

    def test_fractional_budget(self, tmp_path, capsys):
        offers = [{"name": "A", "alpha": 0.7, "cost": {"num": 1, "den": 2}}]
        path = write_json(tmp_path, "offers.json", offers)
        code, out, _ = run(capsys, "plan", "--offers", path, "--budget", "7/2")
        assert code == 0
        assert json.loads(out)["exact"]["counts"] == {"A": 7}

    def test_bad_budget_exits_two(self, tmp_path, capsys):
        path = write_json(tmp_path, "offers.json",
                          [{"name": "A", "alpha": 0.7, "cost": {"num": 1, "den": 1}}])
        code, _, err = run(capsys, "plan", "--offers", path, "--budget", "ten")
        assert code == 2

    def test_capacity_guard_exits_three(self, tmp_path, capsys):
        path = write_json(tmp_path, "offers.json",
                          [{"name": "A", "alpha": 0.7, "cost": {"num": 1, "den": 10**6}}])
        code, _, err = run(capsys, "plan", "--offers", path, "--budget", "100")
        assert code == 3 and "capacity" in err.lower()


class TestSimulate:
    @pytest.fixture
    def config_file(self, tmp_path):
        config = {
            "clean": {"space": ["-1", "+1"], "weights": [0.3, 0.7]},
            "loss": loss_to_json(zero_one_loss(Space(["-1", "+1"]))),
            "corruption": {"family": "binary_label_noise",
                           "params": {"sigma_neg": 0.25, "sigma_pos": 0.25}},
            "sample_sizes": [25, 50],
            "trials": 20,
            "seed": 777,
        }
        return write_json(tmp_path, "config.json", config)

    def test_writes_csv(self, tmp_path, capsys, config_file):
        out_path = tmp_path / "curve.csv"
        code, _, _ = run(capsys, "simulate", "--config", config_file, "--out", str(out_path))
        assert code == 0
        lines = out_path.read_text().strip().split("\n")
        assert lines[0] == "n,mean_excess_risk,std_error,envelope"
        assert len(lines) == 3

    def test_rerun_byte_identical(self, tmp_path, capsys, config_file):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "simulate", "--config", config_file, "--out", str(a))
        run(capsys, "simulate", "--config", config_file, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_fast_rate_mode(self, tmp_path, capsys):
        config = {
            "clean": {"space": ["-1", "+1"], "weights": [0.0, 1.0]},
            "loss": loss_to_json(zero_one_loss(Space(["-1", "+1"]))),
            "corruption": {"family": "binary_label_noise",
                           "params": {"sigma_neg": 0.2, "sigma_pos": 0.2}},
            "sample_sizes": [2, 4, 8],
            "trials": 50,
            "seed": 101,
        }
        path = write_json(tmp_path, "fast.json", config)
        out_path = tmp_path / "fast.csv"
        code, out, _ = run(capsys, "simulate", "--config", path,
                           "--out", str(out_path), "--mode", "fast-rate")
        assert code == 0
        report = json.loads(out)
        assert "mean_ratio" in report and out_path.exists()

    def test_non_separable_fast_rate_exits_two(self, tmp_path, capsys, config_file):
        code, _, err = run(capsys, "simulate", "--config", config_file,
                           "--out", str(tmp_path / "x.csv"), "--mode", "fast-rate")
        assert code == 2 and "separable" in err


class TestLecam:
    def test_replicated_coin(self, capsys, coin_problem_file):
        code, out, _ = run(capsys, "lecam", "--problem", coin_problem_file,
                           "--theta1", "0", "--theta2", "1", "--n", "2")
        assert code == 0
        report = json.loads(out)
        assert report["value"] == pytest.approx(0.03, abs=1e-12)
        assert report["rho"] == pytest.approx(0.2, abs=1e-12)

    def test_corrupted_coin(self, tmp_path, capsys, coin_problem_file):
        noise = {"from": ["tails", "heads"], "to": ["tails", "heads"],
                 "matrix": [[0.75, 0.25], [0.25, 0.75]]}
        kpath = write_json(tmp_path, "noise.json", noise)
        code, out, _ = run(capsys, "lecam", "--problem", coin_problem_file,
                           "--theta1", "0.4", "--theta2", "0.6", "--n", "5",
                           "--kernel", kpath)
        assert code == 0
        report = json.loads(out)
        assert report["value"] == pytest.approx(0.025, abs=1e-12)
        assert report["alpha"] == pytest.approx(0.5, abs=1e-12)

    def test_mixed_sources(self, tmp_path, capsys, coin_problem_file):
        mix = [
            {"count": 10, "alpha": 0.7},
            {"count": 6, "alpha": 0.5},
        ]
        mpath = write_json(tmp_path, "mix.json", mix)
        code, out, _ = run(capsys, "lecam", "--problem", coin_problem_file,
                           "--theta1", "0", "--theta2", "1", "--mix", mpath)
        assert code == 0
        assert json.loads(out)["effective_count"] == pytest.approx(10.0, abs=1e-12)

    def test_bad_theta_exits_two(self, capsys, coin_problem_file):
        code, _, err = run(capsys, "lecam", "--problem", coin_problem_file,
                           "--theta1", "0.5", "--theta2", "0.6")
        assert code == 2

    def test_unknown_flag_rejected(self, coin_problem_file):
        with pytest.raises(SystemExit):
            main(["lecam", "--problem", coin_problem_file, "--theta1", "0",
                  "--theta2", "1", "--frobnicate"])


def test_console_script_installed(tmp_path):
    import subprocess
    kernel = kernel_to_json(identity(Space(["a", "b"])))
    path = tmp_path / "k.json"
    path.write_text(json.dumps(kernel))
    proc = subprocess.run(["corruptlab", "analyze", "--kernel", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["alpha"] == 1.0
