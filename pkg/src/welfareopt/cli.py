"""Experiment harness: sweep the low-k solver over k and QoS maps.

One run of :func:`run_experiment` draws a random network from a seed,
converts the linear-power box to log-power bounds (the single place that
conversion happens), runs the low-k ascent for every (k, qos) pair from
full power, and writes:

* ``trace_K{k}_{qos}.csv`` -- per-iteration trace with SINR statistics,
* ``summary.csv`` -- one row per (k, qos) with metrics at the best iterate,
* ``series_{metric}_{qos}.csv`` -- figure-ready (k, value) series for the
  min/avg/max SINR and the low-``metrics_k`` SINR average,
* ``scenario.json`` -- the channel draw, for reproducibility.

Outputs are byte-identical across repeated runs of the same configuration.

Config file schema (JSON, all keys optional, shown with defaults)::

    {
      "n": 10, "seed": 0, "horizon": 2000, "step_c": 5.0,
      "k_values": [1, ..., n], "qos": ["log", "neginv:2", "log1p", "id"],
      "metrics_k": 5, "power_lower": 0.05, "power_upper": 1.0,
      "output_dir": "results"
    }

``step_c`` sets the fixed step size c / sqrt(horizon).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from welfareopt.solver import Box, FixedStep, SolverRun, maximize_lowest_k
from welfareopt.welfare import LowKWelfare
from welfareopt.wireless import (
    QoSMap,
    WirelessUtilityOracle,
    generate_scenario,
    parse_qos,
    save_model,
    sinr_batch,
)

DEFAULT_QOS = ("log", "neginv:2", "log1p", "id")


@dataclass
class ExperimentConfig:
    n: int = 10
    seed: int = 0
    horizon: int = 2000
    step_c: float = 5.0
    k_values: tuple[int, ...] = ()
    qos_specs: tuple[str, ...] = DEFAULT_QOS
    metrics_k: int | None = None
    power_lower: float = 0.05
    power_upper: float = 1.0
    output_dir: str = "results"

    def __post_init__(self):
        if not self.k_values:
            self.k_values = tuple(range(1, self.n + 1))
        if self.metrics_k is None:
            self.metrics_k = min(5, self.n)
        self.validate()

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not self.step_c > 0:
            raise ValueError("step_c must be positive")
        if not 0 < self.power_lower < self.power_upper:
            raise ValueError("need 0 < power_lower < power_upper")
        for k in self.k_values:
            if not 1 <= k <= self.n:
                raise ValueError(f"k={k} outside [1, {self.n}]")
        if not 1 <= self.metrics_k <= self.n:
            raise ValueError(f"metrics_k={self.metrics_k} outside [1, {self.n}]")
        for spec in self.qos_specs:
            parse_qos(spec)

    def qos_maps(self) -> list[QoSMap]:
        return [parse_qos(spec) for spec in self.qos_specs]

    def log_power_box(self) -> Box:
        lo = math.log(self.power_lower)
        hi = math.log(self.power_upper)
        return Box(np.full(self.n, lo), np.full(self.n, hi))


@dataclass
class RunSummary:
    """Metrics of one (k, qos) run, evaluated at the best iterate."""

    k: int
    qos_label: str
    welfare: float
    sinr_min: float
    sinr_avg: float
    sinr_max: float
    sinr_lowk: float
    metrics_k: int
    iterations: int
    wall_time: float


def load_config(path) -> ExperimentConfig:
    doc = json.loads(Path(path).read_text())
    known = {
        "n", "seed", "horizon", "step_c", "k_values", "qos",
        "metrics_k", "power_lower", "power_upper", "output_dir",
    }
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {key: doc[key] for key in known & set(doc) if key != "qos"}
    if "k_values" in kwargs:
        kwargs["k_values"] = tuple(int(k) for k in kwargs["k_values"])
    if "qos" in doc:
        kwargs["qos_specs"] = tuple(str(s) for s in doc["qos"])
    return ExperimentConfig(**kwargs)


def _fmt(x: float) -> str:
    # repr round-trips float64 exactly.
    return repr(float(x))


def _fmt_series(x: float) -> str:
    # Fixed 18 significant digits for the figure-data files.
    return format(float(x), ".17e")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _trace_rows(run: SolverRun, sinr_trace: np.ndarray):
    for t in range(run.horizon):
        row_sinr = sinr_trace[t]
        yield [
            t,
            _fmt(run.gammas[t]),
            _fmt(run.welfare[t]),
            _fmt(row_sinr.min()),
            _fmt(row_sinr.mean()),
            _fmt(row_sinr.max()),
            _fmt(run.grad_norms[t]),
        ]


def run_experiment(config: ExperimentConfig) -> list[RunSummary]:
    """Execute the sweep, write all output files, return the summaries.

    Runs are ordered by (k ascending, qos in config order), which fixes the
    summary row order and makes outputs reproducible.
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = generate_scenario(config.n, config.seed)
    save_model(base, out / "scenario.json", seed=config.seed)
    box = config.log_power_box()
    schedule = FixedStep(config.step_c / math.sqrt(config.horizon))
    theta0 = box.project(np.zeros(config.n))
    lowk_metric = LowKWelfare(config.metrics_k)

    summaries: list[RunSummary] = []
    for k in sorted(set(config.k_values)):
        for qos in config.qos_maps():
            model = base.with_qos(qos)
            oracle = WirelessUtilityOracle(model)
            started = time.perf_counter()
            run = maximize_lowest_k(
                k, oracle, box, theta0, config.horizon, schedule
            )
            elapsed = time.perf_counter() - started

            sinr_trace = sinr_batch(model, run.thetas)
            best_sinr = sinr_trace[run.best_index]
            summary = RunSummary(
                k=k,
                qos_label=qos.label,
                welfare=run.best_value,
                sinr_min=float(best_sinr.min()),
                sinr_avg=float(best_sinr.mean()),
                sinr_max=float(best_sinr.max()),
                sinr_lowk=lowk_metric.evaluate(best_sinr),
                metrics_k=config.metrics_k,
                iterations=run.horizon,
                wall_time=elapsed,
            )
            summaries.append(summary)
            _write_csv(
                out / f"trace_K{k}_{qos.label}.csv",
                ["t", "gamma_t", "welfare", "min_sinr", "avg_sinr",
                 "max_sinr", "grad_norm"],
                _trace_rows(run, sinr_trace),
            )
            print(
                f"K={k} qos={qos.label}: welfare={summary.welfare:.6f} "
                f"avg_sinr={summary.sinr_avg:.4f} min_sinr={summary.sinr_min:.4f} "
                f"({elapsed:.2f}s, {run.backend})"
            )

    # Wall times vary run to run and would break byte-identical outputs, so
    # they stay on stdout only.
    _write_csv(
        out / "summary.csv",
        ["K", "psi", "welfare", "min_sinr", "avg_sinr", "max_sinr",
         "lowk_sinr", "metrics_k", "iterations"],
        [
            [s.k, s.qos_label, _fmt(s.welfare), _fmt(s.sinr_min),
             _fmt(s.sinr_avg), _fmt(s.sinr_max), _fmt(s.sinr_lowk),
             s.metrics_k, s.iterations]
            for s in summaries
        ],
    )
    emit_plot_data(summaries, out, config.metrics_k)
    return summaries


def emit_plot_data(summaries: list[RunSummary], out_dir, metrics_k: int) -> None:
    """Write one (k, value) series file per metric and QoS map."""
    if not summaries:
        raise ValueError("no summaries to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    qos_labels = []
    for s in summaries:
        if s.qos_label not in qos_labels:
            qos_labels.append(s.qos_label)
    metrics = {
        "min_sinr": lambda s: s.sinr_min,
        "avg_sinr": lambda s: s.sinr_avg,
        "max_sinr": lambda s: s.sinr_max,
        f"low{metrics_k}_sinr": lambda s: s.sinr_lowk,
    }
    for label in qos_labels:
        rows = sorted(
            (s for s in summaries if s.qos_label == label), key=lambda s: s.k
        )
        for metric, getter in metrics.items():
            _write_csv(
                out / f"series_{metric}_{label}.csv",
                ["K", "value"],
                [[s.k, _fmt_series(getter(s))] for s in rows],
            )


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="welfareopt",
        description="Sweep low-k welfare maximization over a random "
        "interference network and write trace/summary/series CSV files.",
    )
    parser.add_argument("--config", help="JSON config file (see module docs)")
    parser.add_argument("--n", type=int, help="number of agents")
    parser.add_argument("--seed", type=int, help="scenario seed")
    parser.add_argument("--T", type=int, dest="horizon",
                        help="iteration horizon")
    parser.add_argument("--step-c", type=float, dest="step_c",
                        help="fixed step size c / sqrt(T)")
    parser.add_argument("--k", type=_parse_int_list, dest="k_values",
                        help="comma-separated k values, e.g. 1,2,5")
    parser.add_argument("--psi", dest="qos_specs",
                        help="comma-separated QoS maps: "
                        "log|neginv:ALPHA|log1p|id")
    parser.add_argument("--metrics-k", type=int, dest="metrics_k",
                        help="k used for the low-k SINR summary metric")
    parser.add_argument("--out", dest="output_dir", help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        overrides = {}
        for key in ("n", "seed", "horizon", "step_c", "k_values",
                    "metrics_k", "output_dir"):
            value = getattr(args, key)
            if value is not None:
                overrides[key] = value
        if args.qos_specs is not None:
            overrides["qos_specs"] = tuple(
                tok.strip() for tok in args.qos_specs.split(",") if tok.strip()
            )
        if "n" in overrides and not args.config:
            # Re-derive n-dependent defaults unless explicitly overridden.
            overrides.setdefault("k_values", ())
            overrides.setdefault("metrics_k", None)
        config = replace(config, **overrides)
        config.validate()
        run_experiment(config)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
