"""
Tests for the Monte Carlo driver, theory tables and figure reproduction.
"""

from __future__ import annotations

import logging
import math

import pandas as pd
import pytest

from treeld.asymptotics import k_p
from treeld.config import ExperimentConfig
from treeld.experiments import (
    FIGURES,
    MAX_CHUNK_TRIALS,
    THETA_GRID,
    SimulationReport,
    chunk_size,
    exact_p3_frame,
    exponent_frame,
    figure_table,
    reproduce,
    run_simulation,
    run_theory,
    wilson_interval,
)
from treeld.learner import EdgeWeight, TiePolicy
from treeld.oracle import exact_error_p3
from treeld.reporting import (
    EXACT_P3_COLUMNS,
    NOISY_EXPONENT_COLUMNS,
    THEORY_COLUMNS,
    frame_to_csv,
    reports_to_frame,
)


def _report(**overrides) -> SimulationReport:
    values = dict(
        tree="3 1-2 2-3",
        theta=0.3,
        q=0.0,
        n=10,
        weight=EdgeWeight.AGREEMENT,
        policy=TiePolicy.RANDOM,
        seed=0,
        trials=100,
        errors=5,
        wilson_ci_95=wilson_interval(5, 100),
        wall_time_s=0.1,
    )
    values.update(overrides)
    return SimulationReport(**values)


class TestWilsonInterval:
    def test_known_value(self):
        low, high = wilson_interval(5, 100)
        assert low == pytest.approx(0.02153, abs=1e-4)
        assert high == pytest.approx(0.11175, abs=1e-4)

    def test_edges_bracket_the_estimate(self):
        assert wilson_interval(0, 10)[0] == 0.0
        assert wilson_interval(10, 10)[1] == 1.0

    @pytest.mark.parametrize("errors, trials", [(3, 0), (-1, 5), (6, 5)])
    def test_invalid_counts(self, errors, trials):
        with pytest.raises(ValueError):
            wilson_interval(errors, trials)


class TestSimulationReport:
    def test_error_rate_is_derived(self):
        report = _report()
        assert report.error_rate == 0.05
        assert list(report.to_row()) == list(reports_to_frame([report]).columns)
        assert "wall_time_s" not in report.to_row()
        assert report.to_dict()["wall_time_s"] == 0.1

    def test_invariants(self):
        with pytest.raises(ValueError):
            _report(errors=101)
        with pytest.raises(ValueError):
            _report(trials=0, errors=0)
        with pytest.raises(ValueError, match="bracket"):
            _report(wilson_ci_95=(0.2, 0.3))


class TestChunking:
    def test_chunk_size(self):
        assert chunk_size(10, 10) == MAX_CHUNK_TRIALS
        assert chunk_size(1000, 10) == 104
        assert chunk_size(10**7, 10) == 1
        assert chunk_size(1000, 10, override=17) == 17


class TestRunSimulation:
    def test_quick_run(self, quick_config):
        reports = run_simulation(quick_config)
        assert [r.n for r in reports] == [10, 20]
        for report in reports:
            assert report.errors >= quick_config.min_errors
            assert report.trials % quick_config.chunk_trials == 0
            assert report.warning == ""
            low, high = report.wilson_ci_95
            assert low <= report.error_rate <= high
            assert report.tree == "3 1-2 2-3"

    def test_stops_after_the_first_sufficient_chunk(self, quick_config):
        # at n=10, theta=0.3 a single 256-trial chunk already holds more than 20 errors
        report = run_simulation(quick_config.with_overrides(n_list=(10,)))[0]
        assert report.trials == quick_config.chunk_trials

    def test_rerun_is_identical(self, quick_config):
        first = frame_to_csv(reports_to_frame(run_simulation(quick_config)))
        second = frame_to_csv(reports_to_frame(run_simulation(quick_config)))
        assert first == second

    def test_worker_count_does_not_change_results(self, quick_config):
        cfg = quick_config.with_overrides(min_errors=60, chunk_trials=64)
        serial = frame_to_csv(reports_to_frame(run_simulation(cfg)))
        parallel = frame_to_csv(reports_to_frame(run_simulation(cfg.with_overrides(workers=2))))
        assert serial == parallel

    def test_seed_changes_results(self, quick_config):
        cfg = quick_config.with_overrides(min_errors=10**6, max_trials=512)
        a = run_simulation(cfg)[0]
        b = run_simulation(cfg.with_overrides(seed=12))[0]
        assert (a.errors, a.ties) != (b.errors, b.ties)

    def test_zero_error_warning(self, quick_config, caplog):
        cfg = quick_config.with_overrides(
            theta=0.05, n_list=(1000,), max_trials=50, min_errors=5, chunk_trials=50
        )
        with caplog.at_level(logging.WARNING, logger="treeld.experiments"):
            report = run_simulation(cfg)[0]
        assert report.errors == 0
        assert report.trials == 50
        assert report.warning == "max_trials reached with zero errors"
        assert report.wilson_ci_95[0] == 0.0
        assert "budget exhausted" in caplog.text

    def test_partial_budget_warning(self, quick_config):
        cfg = quick_config.with_overrides(min_errors=10**6, max_trials=300, chunk_trials=128)
        report = run_simulation(cfg.with_overrides(n_list=(10,)))[0]
        assert report.trials == 300
        assert 0 < report.errors < 10**6
        assert report.warning == f"max_trials reached with {report.errors} < 1000000 errors"

    def test_noisy_mi_run(self, quick_config):
        cfg = quick_config.with_overrides(q=0.1, weight="mi", policy="conservative")
        for report in run_simulation(cfg):
            assert report.q == 0.1
            assert report.weight is EdgeWeight.MUTUAL_INFORMATION
            assert report.errors >= cfg.min_errors

    def test_tree_file_run(self, tree_file):
        cfg = ExperimentConfig(
            structure=str(tree_file),
            theta=0.2,
            n_list=(30,),
            min_errors=5,
            max_trials=2000,
            seed=3,
            workers=1,
            chunk_trials=200,
        )
        report = run_simulation(cfg)[0]
        assert report.tree == "5 1-2 2-3 2-4 4-5"


class TestTheory:
    def test_theory_columns_and_regime(self, quick_config, caplog):
        cfg = quick_config.with_overrides(n_list=(1, 500))
        with caplog.at_level(logging.WARNING, logger="treeld.experiments"):
            frame = run_theory(cfg)
        assert list(frame.columns) == THEORY_COLUMNS
        assert math.isnan(frame.loc[0, "prediction"])
        assert frame.loc[1, "prediction"] > 0
        assert frame.loc[1, "bk_bound"] > 0
        assert (frame["exponent"] == k_p(0.3)).all()
        assert "outside regime" in caplog.text

    def test_exact_frame(self):
        frame = exact_p3_frame(0.2, 0.0, "random", [1, 4])
        assert list(frame.columns) == EXACT_P3_COLUMNS
        assert frame.loc[1, "error"] == exact_error_p3(0.2, 0.0, 4, "random")

    def test_exponent_frames(self):
        noiseless = exponent_frame()
        assert len(noiseless) == len(THETA_GRID) == 49
        assert (noiseless["k_bk"] < noiseless["k_p"]).all()
        noisy = exponent_frame((0.01, 0.1))
        assert list(noisy.columns) == NOISY_EXPONENT_COLUMNS
        assert len(noisy) == 98
        assert (noisy["k_nks"] < noisy["k_q"]).all()


class TestReproduce:
    def test_registry(self):
        assert set(FIGURES) == {"fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b", "fig3c"}
        assert len(figure_table()) == 7

    def test_exponent_figures(self, tmp_path):
        assert reproduce("fig1a", tmp_path) == [tmp_path / "fig1a.csv"]
        paths = reproduce("fig1b", tmp_path)
        assert [p.name for p in paths] == ["fig1b_q0.01.csv", "fig1b_q0.1.csv"]
        frame = pd.read_csv(paths[1])
        assert (frame["q"] == 0.1).all()

    def test_theory_only_curves(self, tmp_path):
        paths = reproduce("fig3a", tmp_path, n_list=(400, 800), simulate=False)
        assert [p.name for p in paths] == ["fig3a_theory_q0.csv", "fig3a_theory_q0.02.csv"]
        frame = pd.read_csv(paths[0])
        assert frame["n"].tolist() == [400, 800]

    def test_simulated_curves(self, tmp_path, quick_config):
        base = quick_config.with_overrides(min_errors=5, max_trials=200, chunk_trials=100)
        paths = reproduce("fig2a", tmp_path, base=base, n_list=(10,))
        assert sorted(p.name for p in paths) == sorted(
            [
                "fig2a_theory_q0.csv",
                "fig2a_simulation_q0_agreement.csv",
                "fig2a_simulation_q0_mi.csv",
                "fig2a_theory_q0.02.csv",
                "fig2a_simulation_q0.02_agreement.csv",
                "fig2a_simulation_q0.02_mi.csv",
            ]
        )
        sim = pd.read_csv(tmp_path / "fig2a_simulation_q0_mi.csv")
        assert sim.loc[0, "weight"] == "mi"
        assert sim.loc[0, "theta"] == 0.1

    def test_unknown_figure(self, tmp_path):
        with pytest.raises(ValueError, match="Unknown figure"):
            reproduce("fig9", tmp_path)
