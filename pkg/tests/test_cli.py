import json

import pytest

from bellsim.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCorrelations:
    def test_canonical_angles_text(self, capsys):
        code, out, err = run_cli(capsys, "correlations", "--angles", "60,0,120")
        assert code == 0
        assert "0.250000" in out and "0.750000" in out
        assert "violation margin: 0.250000" in out
        assert err.startswith("config:")

    def test_json_is_a_single_document(self, capsys):
        code, out, _ = run_cli(
            capsys, "correlations", "--angles", "60,0,120", "--format", "json"
        )
        doc = json.loads(out)
        assert doc["violation_margin"] == pytest.approx(0.25)
        assert doc["match_probabilities"][1][2] == pytest.approx(0.75)

    def test_zero_angles(self, capsys):
        code, out, _ = run_cli(
            capsys, "correlations", "--angles", "0,0,0", "--format", "json"
        )
        assert json.loads(out)["violation_margin"] == 0.0

    def test_arity_error_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["correlations", "--angles", "60,0"])
        assert exc.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["correlations", "--angles", "60,0,120", "--frobnicate"])
        assert exc.value.code == 2


class TestTraceProof:
    def test_both_branches_render(self, capsys):
        code, out, _ = run_cli(capsys, "trace-proof")
        assert code == 0
        assert "branch (a):" in out and "branch (b):" in out
        assert out.count("contradiction") >= 2

    def test_json_steps(self, capsys):
        code, out, _ = run_cli(capsys, "trace-proof", "--format", "json")
        doc = json.loads(out)
        assert len(doc["traces"]) == 2
        assert all(t["contradiction"] for t in doc["traces"])

    def test_single_branch_filter(self, capsys):
        code, out, _ = run_cli(capsys, "trace-proof", "--branch", "a", "--format", "json")
        assert [t["branch"] for t in json.loads(out)["traces"]] == ["a"]


class TestSmallAnalyses:
    def test_lhv_max_prints_zero(self, capsys):
        code, out, _ = run_cli(capsys, "lhv-max", "--format", "json")
        assert code == 0
        assert json.loads(out)["max_bell_statistic"] == 0

    def test_stochastic_sup(self, capsys):
        code, out, _ = run_cli(
            capsys, "stochastic-sup", "--grid-steps", "5", "--format", "json"
        )
        doc = json.loads(out)
        assert abs(doc["supremum"]) <= 1e-12
        assert doc["argmax_is_vertex"] is True
        assert doc["evaluations"] == 5**6


class TestSimulateAndTest:
    def test_quantum_pipeline_rejects(self, tmp_path, capsys):
        out_file = tmp_path / "data.csv"
        code, _, _ = run_cli(
            capsys,
            "simulate",
            "--source", "quantum",
            "--angles", "60,0,120",
            "--n", "9000",
            "--seed", "7",
            "--out", str(out_file),
        )
        assert code == 0
        assert (tmp_path / "data.csv.meta.json").exists()
        code, out, _ = run_cli(
            capsys, "test", "--in", str(out_file), "--alpha", "0.01", "--format", "json"
        )
        assert code == 0  # reject
        doc = json.loads(out)
        assert doc["decision"]["reject_lhv"] is True
        assert doc["estimate"]["statistic"] == pytest.approx(0.25, abs=0.05)

    def test_lhv_pipeline_retains(self, tmp_path, capsys):
        from bellsim.counterfactuals import CounterfactualTable, Population
        from bellsim.lhv import DeterministicLhv, save_model

        model_file = tmp_path / "model.json"
        save_model(
            DeterministicLhv(
                Population(
                    units=(
                        CounterfactualTable((1, 1, 1), (-1, -1, -1)),
                        CounterfactualTable((-1, -1, -1), (-1, -1, -1)),
                    ),
                    weights=(0.5, 0.5),
                )
            ),
            model_file,
        )
        data_file = tmp_path / "lhv.csv"
        code, _, _ = run_cli(
            capsys,
            "simulate",
            "--source", "deterministic-lhv",
            "--model", str(model_file),
            "--n", "9000",
            "--seed", "3",
            "--out", str(data_file),
        )
        assert code == 0
        code, _, _ = run_cli(capsys, "test", "--in", str(data_file))
        assert code == 1  # retain

    def test_missing_model_is_usage_error(self, capsys):
        code, _, err = run_cli(
            capsys, "simulate", "--source", "deterministic-lhv", "--n", "10", "--seed", "1"
        )
        assert code == 2
        assert "needs --model" in err

    def test_seed_is_generated_and_echoed_when_absent(self, capsys):
        code, out, err = run_cli(
            capsys, "simulate", "--source", "quantum", "--angles", "0,0,0", "--n", "5"
        )
        assert code == 0
        assert "seed:" in err

    def test_same_seed_reproduces_stdout(self, capsys):
        args = (
            "simulate", "--source", "quantum", "--angles", "60,0,120",
            "--n", "200", "--seed", "42", "--format", "json",
        )
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2
        doc = json.loads(out1)
        assert len(doc["records"]) == 200

    def test_workers_flag_does_not_change_output(self, tmp_path, capsys):
        base = (
            "simulate", "--source", "quantum", "--angles", "60,0,120",
            "--n", "1000", "--seed", "5",
        )
        _, out1, _ = run_cli(capsys, *base)
        _, out2, _ = run_cli(capsys, *base, "--workers", "4")
        assert out1 == out2


class TestLoopholeCommand:
    def test_max_efficiency_frozen_value(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "loophole", "--angles", "60,0,120", "--max-efficiency", "--format", "json",
        )
        assert code == 0
        assert json.loads(out)["max_faking_efficiency"] == pytest.approx(2 / 3, abs=2e-4)

    def test_floor_solve_reports_rates(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "loophole", "--angles", "60,0,120", "--floor", "0.5", "--format", "json",
        )
        doc = json.loads(out)
        assert doc["status"] == "feasible"
        assert doc["min_coincidence_rate"] >= 0.5

    def test_infeasible_at_full_detection(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "loophole", "--angles", "60,0,120", "--floor", "1.0", "--format", "json",
        )
        assert json.loads(out)["status"] == "infeasible"

    def test_demo_solution_feeds_simulate(self, tmp_path, capsys):
        solution_file = tmp_path / "solution.json"
        code, _, _ = run_cli(
            capsys,
            "loophole", "--angles", "60,0,120", "--demo",
            "--save", str(solution_file), "--format", "json",
        )
        assert code == 0 and solution_file.exists()
        data_file = tmp_path / "fake.csv"
        code, _, _ = run_cli(
            capsys,
            "simulate",
            "--source", "loophole",
            "--solution", str(solution_file),
            "--n", "60000",
            "--seed", "9",
            "--out", str(data_file),
        )
        assert code == 0
        code, _, _ = run_cli(capsys, "test", "--in", str(data_file))
        assert code == 0  # coincidences-only analysis is fooled
        code, _, _ = run_cli(
            capsys, "test", "--in", str(data_file), "--conditioning", "all-pairs"
        )
        assert code == 1  # all-pairs accounting is not
