"""Tune-refit-test runs over dataset configuration files."""

import json
import os
import time
from dataclasses import dataclass

from .datagen import LorenzParams, SplitSpec, gen_lorenz, gen_sine, gen_sum_sines, load_csv, split
from .pipeline import forecast, train
from .tuner import Grid, grid_search


@dataclass
class BenchmarkRow:
    dataset: str
    label: str
    model: str
    mse: float
    validation_mse: float
    n_trials: int
    tune_time: float
    fit_time: float
    forecast_time: float
    config: dict
    mse_per_dim: tuple


def load_dataset(spec, base_dir="."):
    """Materialize the ``data`` block of a benchmark config."""
    if "csv" in spec:
        path = spec["csv"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        return load_csv(path, has_header=spec.get("header", False), columns=spec.get("columns"))
    gen = spec.get("generator")
    params = spec.get("params", {})
    if gen == "lorenz":
        return gen_lorenz(LorenzParams(**params))
    if gen == "sine":
        return gen_sine(**params)
    if gen == "sum-sines":
        return gen_sum_sines(**params)
    raise ValueError(f"data block needs 'csv' or a known 'generator', got {spec!r}")


def run_dataset(cfg, base_dir=".", jobs=1, log=None):
    series = load_dataset(cfg["data"], base_dir)
    sp = SplitSpec.parse(cfg["split"])
    train_s, test_s = split(series, sp)
    rows = []
    for label, mcfg in cfg["models"].items():
        kind = mcfg.get("model", "mvrkm")
        grid = Grid.from_dict(mcfg["grid"])
        t0 = time.perf_counter()
        trials = grid_search(train_s, grid, kind, jobs=jobs,
                             validation_fraction=mcfg.get("validation_fraction", 0.15))
        t1 = time.perf_counter()
        best = trials[0].config
        model = train(train_s, best)
        t2 = time.perf_counter()
        res = forecast(model, best, sp.n_test, test_s.values)
        t3 = time.perf_counter()
        row = BenchmarkRow(cfg["name"], label, kind, res.mse, trials[0].validation_mse, len(trials),
                           t1 - t0, t2 - t1, t3 - t2, best.to_dict(),
                           tuple(float(v) for v in res.mse_per_dim))
        if log:
            log(f"{cfg['name']:>10s} {label:>14s}  test MSE {res.mse:10.4f}  "
                f"(val {row.validation_mse:.4f}, {len(trials)} trials, {t1 - t0:.1f}s)")
        rows.append(row)
    return rows


def run_benchmark(config_paths, jobs=1, log=None):
    if not config_paths:
        raise ValueError("benchmark needs at least one dataset configuration")
    rows = []
    for path in config_paths:
        with open(path) as fh:
            cfg = json.load(fh)
        rows.extend(run_dataset(cfg, os.path.dirname(os.path.abspath(path)), jobs, log))
    return rows
