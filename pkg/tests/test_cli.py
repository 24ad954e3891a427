"""Experiment harness: config handling, output files, determinism."""

import json
import math

import numpy as np
import pytest

from welfareopt.cli import (
    ExperimentConfig,
    RunSummary,
    emit_plot_data,
    load_config,
    main,
    run_experiment,
)
from welfareopt.wireless import generate_scenario


def small_config(out_dir, **overrides):
    defaults = dict(
        n=3,
        seed=5,
        horizon=40,
        step_c=2.0,
        k_values=(1, 3),
        qos_specs=("log", "id"),
        metrics_k=2,
        output_dir=str(out_dir),
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


class TestConfig:
    def test_defaults_sweep_all_k(self):
        cfg = ExperimentConfig(n=4, output_dir="x")
        assert cfg.k_values == (1, 2, 3, 4)

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(n=2, k_values=(3,), output_dir="x")
        with pytest.raises(ValueError):
            ExperimentConfig(n=2, metrics_k=5, output_dir="x")
        with pytest.raises(ValueError):
            ExperimentConfig(power_lower=0.0, output_dir="x")
        with pytest.raises(ValueError):
            ExperimentConfig(power_lower=2.0, power_upper=1.0, output_dir="x")
        with pytest.raises(ValueError):
            ExperimentConfig(qos_specs=("nope",), output_dir="x")

    def test_load_config(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({
            "n": 4, "seed": 9, "horizon": 25, "step_c": 1.5,
            "k_values": [1, 4], "qos": ["log"], "metrics_k": 2,
            "power_lower": 0.1, "power_upper": 0.9,
            "output_dir": str(tmp_path / "out"),
        }))
        cfg = load_config(path)
        assert cfg.n == 4 and cfg.horizon == 25 and cfg.k_values == (1, 4)
        assert cfg.qos_specs == ("log",)

    def test_load_config_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"horizonn": 10}))
        with pytest.raises(ValueError, match="unknown config keys"):
            load_config(path)

    def test_log_power_box(self):
        cfg = ExperimentConfig(n=2, power_lower=0.05, power_upper=1.0,
                               output_dir="x")
        box = cfg.log_power_box()
        np.testing.assert_allclose(box.lower, math.log(0.05))
        np.testing.assert_allclose(box.upper, 0.0)


class TestRunExperiment:
    def test_outputs_and_invariants(self, tmp_path, capsys):
        cfg = small_config(tmp_path / "out")
        summaries = run_experiment(cfg)
        capsys.readouterr()
        assert len(summaries) == 2 * 2  # two k values, two qos maps
        for s in summaries:
            assert s.sinr_min <= s.sinr_lowk <= s.sinr_avg <= s.sinr_max
            assert s.iterations == cfg.horizon
        out = tmp_path / "out"
        assert (out / "summary.csv").exists()
        assert (out / "scenario.json").exists()
        for k in (1, 3):
            for label in ("log", "id"):
                trace = out / f"trace_K{k}_{label}.csv"
                header, *rows = trace.read_text().splitlines()
                assert header == (
                    "t,gamma_t,welfare,min_sinr,avg_sinr,max_sinr,grad_norm"
                )
                assert len(rows) == cfg.horizon
        series = sorted(p.name for p in out.glob("series_*.csv"))
        assert series == sorted(
            f"series_{metric}_{label}.csv"
            for metric in ("min_sinr", "avg_sinr", "max_sinr", "low2_sinr")
            for label in ("log", "id")
        )

    def test_series_file_count_with_four_maps(self, tmp_path, capsys):
        cfg = small_config(
            tmp_path / "out",
            n=2,
            horizon=8,
            k_values=(1, 2),
            qos_specs=("log", "neginv:2", "log1p", "id"),
            metrics_k=1,
        )
        run_experiment(cfg)
        capsys.readouterr()
        series = list((tmp_path / "out").glob("series_*.csv"))
        assert len(series) == 16  # (3 sinr stats + 1 low-k stat) x 4 maps
        for path in series:
            header, *rows = path.read_text().splitlines()
            assert header == "K,value"
            assert [int(r.split(",")[0]) for r in rows] == [1, 2]

    def test_single_agent_full_power(self, tmp_path, capsys):
        cfg = small_config(tmp_path / "out", n=1, seed=3, k_values=(1,),
                           qos_specs=("log",), metrics_k=1)
        (summary,) = run_experiment(cfg)
        capsys.readouterr()
        model = generate_scenario(1, 3)
        # Monotone utility drives the agent to full power p = 1.
        assert summary.sinr_avg == pytest.approx(
            float(model.gains[0, 0]) / 0.2, rel=1e-12
        )

    def test_byte_identical_reruns(self, tmp_path, capsys):
        cfg_a = small_config(tmp_path / "a")
        cfg_b = small_config(tmp_path / "b")
        run_experiment(cfg_a)
        run_experiment(cfg_b)
        capsys.readouterr()
        files_a = sorted(p.name for p in (tmp_path / "a").iterdir())
        files_b = sorted(p.name for p in (tmp_path / "b").iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()


class TestEmitPlotData:
    def test_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot_data([], tmp_path, 1)

    def test_series_sorted_by_k(self, tmp_path):
        summaries = [
            RunSummary(k, "log", 0.0, 1.0, 2.0, 3.0, 1.5, 1, 10, 0.0)
            for k in (3, 1, 2)
        ]
        emit_plot_data(summaries, tmp_path, 1)
        rows = (tmp_path / "series_avg_sinr_log.csv").read_text().splitlines()[1:]
        assert [int(r.split(",")[0]) for r in rows] == [1, 2, 3]


class TestMain:
    def test_cli_overrides(self, tmp_path, capsys):
        rc = main([
            "--n", "2", "--seed", "1", "--T", "10", "--step-c", "1.0",
            "--k", "1,2", "--psi", "log", "--metrics-k", "1",
            "--out", str(tmp_path / "out"),
        ])
        capsys.readouterr()
        assert rc == 0
        assert (tmp_path / "out" / "summary.csv").exists()

    def test_invalid_k_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as err:
            main(["--n", "2", "--k", "5", "--T", "5",
                  "--out", str(tmp_path / "out")])
        assert err.value.code == 2
        assert "outside" in capsys.readouterr().err

    def test_invalid_psi_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            main(["--n", "2", "--psi", "tanh", "--T", "5",
                  "--out", str(tmp_path / "out")])
        assert "unknown QoS map" in capsys.readouterr().err
