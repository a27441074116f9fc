"""Command-line front end: ``mvrkm generate|train|forecast|tune|benchmark``."""

import csv
import glob
import hashlib
import json
import os
import platform
import sys
import time

import click
import numpy as np

from . import __version__, _accel
from .benchmark import run_benchmark
from .datagen import (
    LorenzParams, SplitSpec, gen_lorenz, gen_sine, gen_sum_sines, load_csv, split, write_csv,
)
from .embedding import initial_window
from .modelio import load_model, save_model
from .pipeline import ModelConfig, forecast, train
from .tuner import Grid, grid_search


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _columns(text):
    if text is None:
        return None
    return [int(v) for v in text.split(",") if v.strip()]


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command, config, inputs, seed, timings):
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs},
        "seed": seed,
        "tool_version": __version__,
        "backend": _accel.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "timings": timings,
    }
    path = os.path.join(out_dir or ".", "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(path):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    return d


def _fail(msg):
    raise click.ClickException(msg)


seed_option = click.option("--seed", type=int, default=0, show_default=True,
                           help="Recorded in the manifest; the core uses no randomness.")


@click.group()
@click.version_option(__version__)
def main():
    """Multi-view RKM time series forecasting."""


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


@main.group()
def generate():
    """Write a synthetic series to CSV."""


@generate.command("sine")
@click.option("--n", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--freq", type=float, default=1.0, show_default=True)
@click.option("--amplitude", type=float, default=1.0, show_default=True)
@click.option("--phase", type=float, default=0.0, show_default=True)
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), default=0.01, show_default=True)
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False))
@seed_option
def generate_sine(n, freq, amplitude, phase, dt, out, seed):
    t0 = time.perf_counter()
    series = gen_sine(n, freq, amplitude, phase, dt)
    _out_dir(out)
    write_csv(out, series.values, header=["x"])
    write_manifest(_out_dir(out), "generate sine",
                   {"n": n, "freq": freq, "amplitude": amplitude, "phase": phase, "dt": dt},
                   [], seed, {"total": time.perf_counter() - t0})


@generate.command("sum-sines")
@click.option("--n", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--amplitudes", default="1,0.2", show_default=True)
@click.option("--freqs", default="1,20", show_default=True)
@click.option("--phases", default="0,0", show_default=True)
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), default=0.01, show_default=True)
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False))
@seed_option
def generate_sum_sines(n, amplitudes, freqs, phases, dt, out, seed):
    t0 = time.perf_counter()
    try:
        series = gen_sum_sines(n, _floats(amplitudes), _floats(freqs), _floats(phases), dt)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _out_dir(out)
    write_csv(out, series.values, header=["x"])
    write_manifest(_out_dir(out), "generate sum-sines",
                   {"n": n, "amplitudes": amplitudes, "freqs": freqs, "phases": phases, "dt": dt},
                   [], seed, {"total": time.perf_counter() - t0})


@generate.command("lorenz")
@click.option("--a", type=float, default=10.0, show_default=True)
@click.option("--r", type=float, default=28.0, show_default=True)
@click.option("--b", type=float, default=2.667, show_default=True)
@click.option("--x0", type=float, default=1.0, show_default=True)
@click.option("--y0", type=float, default=-1.0, show_default=True)
@click.option("--z0", type=float, default=1.05, show_default=True)
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), default=0.01, show_default=True)
@click.option("--steps", type=click.IntRange(min=1), default=4001, show_default=True)
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False))
@seed_option
def generate_lorenz(a, r, b, x0, y0, z0, dt, steps, out, seed):
    t0 = time.perf_counter()
    params = LorenzParams(a, r, b, x0, y0, z0, dt, steps)
    try:
        series = gen_lorenz(params)
    except FloatingPointError as exc:
        _fail(str(exc))
    _out_dir(out)
    write_csv(out, series.values, header=["x", "y", "z"])
    write_manifest(_out_dir(out), "generate lorenz", params.__dict__, [], seed,
                   {"total": time.perf_counter() - t0})


# ---------------------------------------------------------------------------
# train / forecast
# ---------------------------------------------------------------------------


def _load_series(path, header, columns, split_text):
    try:
        series = load_csv(path, has_header=header, columns=_columns(columns))
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    if split_text is None:
        return series, None
    try:
        return split(series, SplitSpec.parse(split_text))
    except ValueError as exc:
        _fail(str(exc))


data_options = [
    click.option("--header/--no-header", default=False, help="Skip the first CSV row."),
    click.option("--columns", default=None, help="Comma-separated column indices to use."),
    click.option("--split", "split_text", default=None, metavar="N_TRAIN:N_TEST",
                 help="Use the first N_TRAIN rows for training, the next N_TEST as test."),
]


def with_data_options(fn):
    for opt in reversed(data_options):
        fn = opt(fn)
    return fn


@main.command("train")
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON config (e.g. best_config.json from tune); flags override it.")
@click.option("--model", "model_kind", type=click.Choice(["mvrkm", "lssvm"]), default=None)
@click.option("--lag", type=int, default=None)
@click.option("--kx", default=None, metavar="rbf:SIGMA|linear")
@click.option("--ky", default=None, metavar="rbf:SIGMA|linear")
@click.option("--components", type=int, default=None)
@click.option("--preimage", default=None, metavar="linear|smoother:NR|krr:LAMBDA:SIGMA_H")
@click.option("--gamma", type=float, default=None, help="LS-SVM regularization.")
@click.option("--center/--no-center", default=None)
@click.option("--standardize/--no-standardize", default=None)
@with_data_options
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False), help="Model file.")
@seed_option
def train_cmd(data, config_path, model_kind, lag, kx, ky, components, preimage, gamma,
              center, standardize, header, columns, split_text, out, seed):
    """Fit a model on DATA (the training split when --split is given)."""
    t0 = time.perf_counter()
    cfg_dict = {}
    if config_path:
        with open(config_path) as fh:
            try:
                cfg_dict = json.load(fh)
            except json.JSONDecodeError as exc:
                _fail(f"{config_path}: malformed config: {exc}")
    overrides = {"model": model_kind, "lag": lag, "kx": kx, "ky": ky, "components": components,
                 "preimage": preimage, "gamma": gamma, "center": center, "standardize": standardize}
    cfg_dict.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = ModelConfig.from_dict(cfg_dict)
    except (TypeError, ValueError) as exc:
        _fail(f"invalid configuration: {exc}")
    train_s, _ = _load_series(data, header, columns, split_text)
    t1 = time.perf_counter()
    try:
        model = train(train_s, cfg)
    except (ValueError, np.linalg.LinAlgError) as exc:
        _fail(str(exc))
    t2 = time.perf_counter()
    _out_dir(out)
    save_model(out, model, cfg.to_dict())
    write_manifest(_out_dir(out), "train", cfg.to_dict(), [data] + ([config_path] if config_path else []),
                   seed, {"load": t1 - t0, "fit": t2 - t1, "total": time.perf_counter() - t0})
    click.echo(f"trained {cfg.model} on {train_s.n} points -> {out}")


@main.command("forecast")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--horizon", type=click.IntRange(min=1), required=True)
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Series whose last points seed the forecast (default: continue after training).")
@click.option("--truth", "truth_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV of observed values; with --split only its test block is used.")
@click.option("--preimage", default=None, help="Override the stored pre-image method.")
@with_data_options
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False))
@seed_option
def forecast_cmd(model_path, horizon, data_path, truth_path, preimage, header, columns,
                 split_text, out, seed):
    """Recursively forecast HORIZON steps with a saved model."""
    t0 = time.perf_counter()
    model, cfg_dict = load_model(model_path)
    cfg_dict = dict(cfg_dict or {})
    if preimage is not None:
        cfg_dict["preimage"] = preimage
    try:
        cfg = ModelConfig.from_dict(cfg_dict)
    except (TypeError, ValueError) as exc:
        _fail(f"invalid configuration: {exc}")
    d = model.Y_train.shape[1]
    x0 = None
    if data_path is not None:
        hist, _ = _load_series(data_path, header, columns, split_text)
        if hist.d != d:
            _fail(f"data has d={hist.d}, model was trained with d={d}")
        x0 = initial_window(hist, model.p)
    truth = None
    if truth_path is not None:
        t_train, t_test = _load_series(truth_path, header, columns, split_text)
        truth = (t_test if t_test is not None else t_train).values
        if truth.shape[1] != d:
            _fail(f"truth has d={truth.shape[1]}, model forecasts d={d}")
        if truth.shape[0] < horizon:
            _fail(f"truth has {truth.shape[0]} rows, horizon is {horizon}")
    t1 = time.perf_counter()
    try:
        res = forecast(model, cfg, horizon, truth, x0=x0)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _fail(str(exc))
    t2 = time.perf_counter()
    head = ["step"] + [f"dim_{j}" for j in range(d)]
    cols = [np.arange(1, horizon + 1)[:, None], res.predictions]
    if res.truth is not None:
        head += [f"truth_{j}" for j in range(d)] + ["sq_error"]
        cols += [res.truth, np.mean((res.predictions - res.truth) ** 2, axis=1)[:, None]]
    _out_dir(out)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(head)
        for row in np.hstack(cols):
            w.writerow([str(int(row[0]))] + [repr(float(v)) for v in row[1:]])
    inputs = [model_path] + [p for p in (data_path, truth_path) if p]
    write_manifest(_out_dir(out), "forecast", {"horizon": horizon, **cfg.to_dict()}, inputs, seed,
                   {"load": t1 - t0, "forecast": t2 - t1, "total": time.perf_counter() - t0})
    if res.mse is not None:
        click.echo(f"MSE: {res.mse!r}")
        if d > 1:
            click.echo("MSE per dim: " + ", ".join(repr(float(v)) for v in res.mse_per_dim))
    click.echo(f"wrote {horizon} steps -> {out}")


# ---------------------------------------------------------------------------
# tune / benchmark
# ---------------------------------------------------------------------------


CONFIG_FIELDS = ["model", "lag", "kx", "ky", "components", "preimage", "gamma", "center", "standardize"]


def write_trials(out_dir, trials, d):
    with open(os.path.join(out_dir, "trials.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "status", "validation_mse"] + [f"mse_dim_{j}" for j in range(d)]
                   + CONFIG_FIELDS + ["error"])
        for i, t in enumerate(trials, start=1):
            cd = t.config.to_dict()
            per = list(t.mse_per_dim) or [float("nan")] * d
            w.writerow([i if t.ok else "", "ok" if t.ok else "failed", repr(t.validation_mse)]
                       + [repr(v) for v in per] + [cd.get(k, "") for k in CONFIG_FIELDS]
                       + [t.error or ""])
    with open(os.path.join(out_dir, "timings.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["config", "train_time", "forecast_time"])
        for t in sorted(trials, key=lambda t: t.config.key()):
            w.writerow([t.config.key(), f"{t.train_time:.6f}", f"{t.forecast_time:.6f}"])


@main.command("tune")
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", "grid_path", required=True, type=click.Path(dir_okay=False))
@click.option("--model", "model_kind", type=click.Choice(["mvrkm", "lssvm"]), default=None,
              help="Defaults to the grid file's 'model' entry, else mvrkm.")
@click.option("--validation-fraction", type=click.FloatRange(0, 1, min_open=True, max_open=True),
              default=None)
@with_data_options
@click.option("--jobs", type=int, default=0, help="Worker processes (0 = all cores).")
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@seed_option
def tune_cmd(data, grid_path, model_kind, validation_fraction, header, columns, split_text,
             jobs, out_dir, seed):
    """Grid-search hyperparameters on the training split of DATA."""
    t0 = time.perf_counter()
    try:
        with open(grid_path) as fh:
            raw = json.load(fh)
        grid = Grid.from_dict(raw)
    except OSError as exc:
        _fail(f"{grid_path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(f"{grid_path}: malformed grid file: {exc}")
    except (TypeError, ValueError) as exc:
        _fail(f"{grid_path}: bad grid definition: {exc}")
    kind = model_kind or raw.get("model", "mvrkm")
    frac = validation_fraction or raw.get("validation_fraction", 0.15)
    train_s, _ = _load_series(data, header, columns, split_text)
    os.makedirs(out_dir, exist_ok=True)
    try:
        trials = grid_search(train_s, grid, kind, jobs=jobs or None, validation_fraction=frac)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    write_trials(out_dir, trials, train_s.d)
    best = trials[0]
    with open(os.path.join(out_dir, "best_config.json"), "w") as fh:
        json.dump(best.config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(out_dir, "tune", {"grid": raw, "model": kind, "validation_fraction": frac},
                   [data, grid_path], seed, {"total": time.perf_counter() - t0})
    n_ok = sum(t.ok for t in trials)
    click.echo(f"{n_ok}/{len(trials)} trials succeeded; best validation MSE {best.validation_mse!r}")
    click.echo(json.dumps(best.config.to_dict(), sort_keys=True))


@main.command("benchmark")
@click.argument("config_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--jobs", type=int, default=0, help="Worker processes per grid search (0 = all cores).")
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False))
@seed_option
def benchmark_cmd(config_dir, jobs, out, seed):
    """Tune, refit and test every model listed in CONFIG_DIR/*.json."""
    t0 = time.perf_counter()
    paths = sorted(glob.glob(os.path.join(config_dir, "*.json")))
    if not paths:
        _fail(f"no dataset configurations (*.json) in {config_dir}")
    try:
        rows = run_benchmark(paths, jobs=jobs or None, log=click.echo)
    except (ValueError, RuntimeError, OSError) as exc:
        _fail(str(exc))
    _out_dir(out)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "label", "model", "test_mse", "validation_mse", "n_trials",
                    "tune_time", "fit_time", "forecast_time", "mse_per_dim", "config"])
        for r in rows:
            w.writerow([r.dataset, r.label, r.model, repr(r.mse), repr(r.validation_mse), r.n_trials,
                        f"{r.tune_time:.3f}", f"{r.fit_time:.3f}", f"{r.forecast_time:.3f}",
                        ";".join(repr(v) for v in r.mse_per_dim), json.dumps(r.config, sort_keys=True)])
    write_manifest(_out_dir(out), "benchmark", {"configs": paths}, paths, seed,
                   {"total": time.perf_counter() - t0})


if __name__ == "__main__":  # pragma: no cover
    main()
