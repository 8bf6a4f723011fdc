"""
Tests for the treeld command-line driver.
"""

from __future__ import annotations

import json

import pandas as pd
import pytest

import treeld.cli as cli
from treeld.checks import CheckRecord, SuiteSummary
from treeld.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main
from treeld.experiments import FIGURES
from treeld.reporting import EXACT_P3_COLUMNS, SIMULATION_COLUMNS, THEORY_COLUMNS


class TestTheoryAndExact:
    def test_theory_to_stdout(self, capsys):
        code = main(["theory", "--structure", "star", "--theta", "0.4", "--n", "200", "400"])
        lines = capsys.readouterr().out.splitlines()
        assert code == EXIT_OK
        assert lines[0] == ",".join(THEORY_COLUMNS)
        assert len(lines) == 3

    def test_theory_to_directory(self, tmp_path):
        code = main(["theory", "--theta", "0.1", "--n", "100", "--out", str(tmp_path)])
        assert code == EXIT_OK
        frame = pd.read_csv(tmp_path / "theory.csv")
        assert frame["n"].tolist() == [100]

    def test_exact(self, capsys):
        assert main(["exact", "--theta", "0.2", "--n", "1", "2", "3"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(EXACT_P3_COLUMNS)
        assert len(lines) == 4

    def test_exact_refuses_large_n(self, capsys):
        assert main(["exact", "--n", "21"]) == EXIT_USAGE
        assert "treeld: error:" in capsys.readouterr().err


class TestSimulate:
    def test_simulate_writes_csv(self, tmp_path):
        argv = [
            "simulate",
            "--theta",
            "0.3",
            "--n",
            "10",
            "--min-errors",
            "5",
            "--max-trials",
            "500",
            "--workers",
            "1",
            "--seed",
            "4",
            "--out",
            str(tmp_path),
        ]
        assert main(argv) == EXIT_OK
        frame = pd.read_csv(tmp_path / "simulation.csv", keep_default_na=False)
        assert list(frame.columns) == SIMULATION_COLUMNS
        assert frame.loc[0, "seed"] == 4
        assert frame.loc[0, "errors"] >= 5

    def test_config_file_with_overrides(self, tmp_path, tree_file, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(
            json.dumps({"theta": 0.2, "n_list": [40], "min_errors": 3, "max_trials": 300}),
            encoding="utf-8",
        )
        argv = ["simulate", "--config", str(config), "--tree-file", str(tree_file)]
        argv += ["--workers", "1"]
        assert main(argv) == EXIT_OK
        out = capsys.readouterr().out
        assert "5 1-2 2-3 2-4 4-5" in out
        assert ",40," in out

    def test_invalid_value_is_a_usage_error(self, capsys):
        assert main(["simulate", "--theta", "0.7", "--n", "10"]) == EXIT_USAGE
        assert "theta" in capsys.readouterr().err

    def test_bad_choice_exits_from_argparse(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["simulate", "--weight", "pearson"])
        assert excinfo.value.code == EXIT_USAGE

    def test_bad_log_level(self, capsys):
        assert main(["--log-level", "LOUD", "tree"]) == EXIT_USAGE
        assert "Unknown log level" in capsys.readouterr().err


class TestOracle:
    def test_passing_suite(self, monkeypatch, capsys, tmp_path):
        summary = SuiteSummary([CheckRecord("ok", {}, 1.0, 1.0, 0.0, True)], 0.01)
        monkeypatch.setattr(cli, "run_oracle_suite", lambda quick: summary)
        assert main(["oracle", "--quick", "--out", str(tmp_path)]) == EXIT_OK
        payload = json.loads((tmp_path / "oracle.json").read_text(encoding="utf-8"))
        assert payload["pass"] is True
        assert payload["checks"][0]["pass"] is True
        assert payload["total"] == 1
        assert "FAILED" not in capsys.readouterr().err

    def test_failing_suite(self, monkeypatch, capsys):
        bad = CheckRecord("k_p_vs_sanov", {"theta": 0.1}, 0.04, 0.05, 1e-9, False)
        monkeypatch.setattr(cli, "run_oracle_suite", lambda quick: SuiteSummary([bad], 0.01))
        assert main(["oracle"]) == EXIT_CHECK_FAILED
        captured = capsys.readouterr()
        assert json.loads(captured.out)["failed"] == 1
        assert "FAILED k_p_vs_sanov" in captured.err


class TestReproduceAndTree:
    def test_reproduce_exponent_figure(self, tmp_path, capsys):
        assert main(["reproduce", "--figure", "fig1a", "--out", str(tmp_path)]) == EXIT_OK
        assert capsys.readouterr().out.strip() == str(tmp_path / "fig1a.csv")

    def test_reproduce_theory_only(self, tmp_path):
        argv = ["reproduce", "--figure", "fig3b", "--theory-only", "--n", "400"]
        argv += ["--out", str(tmp_path)]
        assert main(argv) == EXIT_OK
        assert (tmp_path / "fig3b_theory_q0.02.csv").is_file()
        assert not list(tmp_path.glob("*simulation*"))

    def test_unknown_figure(self, tmp_path, capsys):
        assert main(["reproduce", "--figure", "fig9", "--out", str(tmp_path)]) == EXIT_USAGE
        assert "Unknown figure" in capsys.readouterr().err

    def test_tree_text(self, capsys):
        assert main(["tree", "--structure", "star"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "zeta:   36" in out
        assert "star:   True" in out

    def test_tree_formats(self, capsys, tree_file):
        assert main(["tree", "--tree-file", str(tree_file), "--format", "json"]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["metadata"]["p"] == 5
        assert main(["tree", "--structure", "hybrid", "--format", "dot"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("graph hybrid {")

    def test_reproduce_uses_config_sizes(self, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"n_list": [300, 500]}), encoding="utf-8")
        argv = ["reproduce", "--figure", "fig3a", "--theory-only", "--config", str(config)]
        assert main(argv + ["--out", str(tmp_path)]) == EXIT_OK
        frame = pd.read_csv(tmp_path / "fig3a_theory_q0.csv")
        assert frame["n"].tolist() == [300, 500]

    def test_reproduce_flag_sizes_beat_config(self, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"n_list": [300, 500]}), encoding="utf-8")
        argv = ["reproduce", "--figure", "fig3a", "--theory-only", "--config", str(config)]
        assert main(argv + ["--n", "700", "--out", str(tmp_path)]) == EXIT_OK
        assert pd.read_csv(tmp_path / "fig3a_theory_q0.csv")["n"].tolist() == [700]

    def test_reproduce_keeps_figure_sizes_without_n_list(self, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"seed": 3}), encoding="utf-8")
        argv = ["reproduce", "--figure", "fig3c", "--theory-only", "--config", str(config)]
        assert main(argv + ["--out", str(tmp_path)]) == EXIT_OK
        frame = pd.read_csv(tmp_path / "fig3c_theory_q0.csv")
        assert frame["n"].tolist() == list(FIGURES["fig3c"].n_list)

    def test_reproduce_list(self, capsys):
        assert main(["reproduce", "--list"]) == EXIT_OK
        table = json.loads(capsys.readouterr().out)
        assert [row["figure"] for row in table] == list(FIGURES)

    def test_reproduce_needs_a_figure(self, capsys):
        assert main(["reproduce"]) == EXIT_USAGE
        assert "--figure is required" in capsys.readouterr().err


class TestSampleAndLearn:
    def test_sample_to_stdout(self, capsys):
        argv = ["sample", "--structure", "star", "--p", "12", "--theta", "0.2", "--n", "7"]
        assert main(argv) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 7
        assert all(len(line) == 4 for line in lines)

    def test_noise_changes_the_dump(self, tmp_path):
        clean, noisy = tmp_path / "clean.hex", tmp_path / "noisy.hex"
        argv = ["sample", "--theta", "0.2", "--n", "200", "--seed", "5"]
        assert main(argv + ["--out", str(clean)]) == EXIT_OK
        assert main(argv + ["--q", "0.2", "--out", str(noisy)]) == EXIT_OK
        assert clean.read_text(encoding="utf-8") != noisy.read_text(encoding="utf-8")

    def test_sample_then_learn(self, tmp_path, capsys):
        dump = tmp_path / "star5.hex"
        argv = ["sample", "--structure", "star", "--p", "5", "--theta", "0.1", "--n", "2000"]
        assert main(argv + ["--seed", "3", "--out", str(dump)]) == EXIT_OK
        argv = ["learn", "--samples", str(dump), "--p", "5", "--truth", "star"]
        assert main(argv) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"] == 2000
        assert payload["tree"] == "5 1-2 1-3 1-4 1-5"
        assert payload["error"] is False
        assert [edge["edge"] for edge in payload["edges"]] == [[1, 2], [1, 3], [1, 4], [1, 5]]
        for edge in payload["edges"]:
            assert edge["disagreement_rate"] == pytest.approx(0.1, abs=0.03)

    def test_learn_with_wrong_width(self, tmp_path, capsys):
        dump = tmp_path / "p3.hex"
        assert main(["sample", "--theta", "0.1", "--n", "20", "--out", str(dump)]) == EXIT_OK
        assert main(["learn", "--samples", str(dump), "--p", "9"]) == EXIT_USAGE
        assert "bytes for p=9" in capsys.readouterr().err
