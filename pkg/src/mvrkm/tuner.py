"""Exhaustive grid search scored by recursive-forecast MSE on a validation split.

Trials sharing lag, kernels and centering reuse one eigendecomposition, so a
group of component counts / pre-image settings costs a single O(N^3) solve.
"""

import itertools
import json
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .embedding import fit_standardization
from .forecaster import ClosedFormLinear, KernelSmoother, KrrPreimage, mse  # noqa: F401
from .kernels import KernelSpec
from .pipeline import ModelConfig, forecast, prepare, train
from .trainer import decompose, model_from_spectrum

FAILURES = (ValueError, ArithmeticError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class Grid:
    lags: list
    sigmas_x: list
    components: list = field(default_factory=lambda: [50])
    ky_family: list = field(default_factory=lambda: ["linear"])
    sigmas_y: list = field(default_factory=lambda: [1.0])
    preimage: list = field(default_factory=lambda: ["smoother"])
    n_r: list = field(default_factory=lambda: [1])
    lambdas: list = field(default_factory=lambda: [1e-3])
    sigmas_h: list = field(default_factory=lambda: [1.0])
    gammas: list = field(default_factory=lambda: [1.0])
    center: bool = True
    standardize: bool = True

    def __post_init__(self):
        for name in ("lags", "sigmas_x", "components", "ky_family", "sigmas_y",
                     "preimage", "n_r", "lambdas", "sigmas_h", "gammas"):
            v = getattr(self, name)
            if isinstance(v, (int, float, str)):
                v = [v]
            if not v:
                raise ValueError(f"grid list {name!r} is empty")
            object.__setattr__(self, name, list(v))
        for p in self.lags:
            if int(p) < 1:
                raise ValueError(f"grid lag {p} is not a positive integer")
        for name in ("sigmas_x", "sigmas_y", "lambdas", "sigmas_h", "gammas"):
            for v in getattr(self, name):
                if not float(v) > 0:
                    raise ValueError(f"grid entry {name}={v} must be positive")
        for fam in self.ky_family:
            if fam not in ("linear", "rbf"):
                raise ValueError(f"unknown ky family {fam!r}")
        for pre in self.preimage:
            if pre not in ("smoother", "krr"):
                raise ValueError(f"unknown pre-image method {pre!r}; grid accepts smoother, krr")

    @classmethod
    def from_dict(cls, d):
        d = {k: v for k, v in d.items() if k not in ("model", "validation_fraction", "comment")}
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: malformed grid file: {exc}") from None
        try:
            return cls.from_dict(raw)
        except TypeError as exc:
            raise ValueError(f"{path}: bad grid definition: {exc}") from None

    def _ky_specs(self):
        out = []
        for fam in self.ky_family:
            if fam == "linear":
                out.append(KernelSpec("linear"))
            else:
                out.extend(KernelSpec("rbf", float(s)) for s in self.sigmas_y)
        return out

    def _preimages(self, ky):
        if ky.is_linear:
            return [ClosedFormLinear()]
        out = []
        for method in self.preimage:
            if method == "smoother":
                out.extend(KernelSmoother(int(n)) for n in self.n_r)
            else:
                out.extend(KrrPreimage(float(l), float(s))
                           for l, s in itertools.product(self.lambdas, self.sigmas_h))
        return out

    def configs(self, model_kind):
        """Cartesian expansion into concrete configurations."""
        cfgs = []
        if model_kind == "lssvm":
            for p, sx, g in itertools.product(self.lags, self.sigmas_x, self.gammas):
                cfgs.append(ModelConfig("lssvm", p, KernelSpec("rbf", float(sx)), gamma=g,
                                        standardize=self.standardize))
            return cfgs
        if model_kind != "mvrkm":
            raise ValueError(f"unknown model kind {model_kind!r}")
        for p, sx, ky in itertools.product(self.lags, self.sigmas_x, self._ky_specs()):
            for s, pre in itertools.product(self.components, self._preimages(ky)):
                cfgs.append(ModelConfig("mvrkm", p, KernelSpec("rbf", float(sx)), ky, s, pre,
                                        center=self.center, standardize=self.standardize))
        return cfgs

    def size(self, model_kind):
        return len(self.configs(model_kind))


@dataclass
class TrialResult:
    config: ModelConfig
    validation_mse: float
    mse_per_dim: tuple = ()
    train_time: float = 0.0
    forecast_time: float = 0.0
    error: str | None = None

    @property
    def ok(self):
        return self.error is None

    def rank_key(self):
        c = self.config
        s = c.components if c.model == "mvrkm" else 0
        return (self.validation_mse, s, c.lag, c.key())


def validation_split(series, fraction=0.15):
    n_val = max(1, int(round(fraction * series.n)))
    if n_val >= series.n:
        raise ValueError(f"series of length {series.n} too short for a validation split")
    return series[: series.n - n_val], series[series.n - n_val:]


def _group_key(cfg):
    if cfg.model == "lssvm":
        return (cfg.model, cfg.lag, str(cfg.kx), cfg.gamma, cfg.standardize)
    return (cfg.model, cfg.lag, str(cfg.kx), str(cfg.ky), cfg.center, cfg.standardize)


def _failed(cfg, exc):
    return TrialResult(cfg, math.inf, error=f"{type(exc).__name__}: {exc}")


def _scored(cfg, result, t_train, t_fc):
    err = result.mse
    if not np.isfinite(err):
        return TrialResult(cfg, math.inf, error="FloatingPointError: non-finite validation MSE")
    return TrialResult(cfg, err, tuple(float(v) for v in result.mse_per_dim), t_train, t_fc)


def _run_group(task):
    """Evaluate every config of one group; runs in a worker process when parallel."""
    cfgs, fit_series, val_values = task
    out = []
    first = cfgs[0]
    horizon = val_values.shape[0]
    if first.model == "lssvm":
        for cfg in cfgs:
            try:
                t0 = time.perf_counter()
                model = train(fit_series, cfg)
                t1 = time.perf_counter()
                res = forecast(model, cfg, horizon, val_values)
                out.append(_scored(cfg, res, t1 - t0, time.perf_counter() - t1))
            except FAILURES as exc:
                out.append(_failed(cfg, exc))
        return out
    t0 = time.perf_counter()
    try:
        data, st = prepare(fit_series, first)
        spectrum = decompose(data, first.kx, first.ky, first.center)
    except FAILURES as exc:
        return [_failed(cfg, exc) for cfg in cfgs]
    t_decomp = time.perf_counter() - t0
    models = {}
    for cfg in cfgs:
        try:
            t0 = time.perf_counter()
            if cfg.components not in models:
                models[cfg.components] = model_from_spectrum(
                    spectrum, data, cfg.kx, cfg.ky, cfg.components, st)
            model = models[cfg.components]
            t1 = time.perf_counter()
            res = forecast(model, cfg, horizon, val_values)
            out.append(_scored(cfg, res, t_decomp + t1 - t0, time.perf_counter() - t1))
        except FAILURES as exc:
            out.append(_failed(cfg, exc))
    return out


def grid_search(series, grid, model_kind="mvrkm", jobs=1, validation_fraction=0.15):
    """Rank every grid configuration by validation MSE (original units).

    The last ``validation_fraction`` of ``series`` is forecast recursively
    from the window that ends the remaining fit portion. Successful trials
    come first, ordered by (MSE, components, lag, config); failed trials
    follow, ordered by config.
    """
    cfgs = grid.configs(model_kind)
    fit_series, val = validation_split(series, validation_fraction)
    max_lag = max(c.lag for c in cfgs)
    if fit_series.n < max_lag + 2:
        raise ValueError(f"series too short for lag {max_lag} after holding out validation data")
    if grid.standardize:
        fit_standardization(fit_series.values)  # fail early on constant columns

    groups = {}
    for cfg in cfgs:
        groups.setdefault(_group_key(cfg), []).append(cfg)
    tasks = [(sorted(g, key=lambda c: c.key()), fit_series, val.values)
             for _, g in sorted(groups.items(), key=lambda kv: repr(kv[0]))]

    if jobs is None or jobs < 1:
        jobs = os.cpu_count() or 1
    if jobs == 1 or len(tasks) == 1:
        chunks = [_run_group(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_run_group, tasks))
    trials = [t for chunk in chunks for t in chunk]

    ok = sorted((t for t in trials if t.ok), key=TrialResult.rank_key)
    bad = sorted((t for t in trials if not t.ok), key=lambda t: t.config.key())
    if not ok:
        causes = Counter(t.error.split(":", 1)[0] for t in bad)
        summary = ", ".join(f"{k} x{v}" for k, v in sorted(causes.items()))
        first = bad[0].error if bad else "no trials"
        raise RuntimeError(f"all {len(bad)} trials failed ({summary}); first error: {first}")
    return ok + bad


def refit_best(series, trials):
    """Train the winning configuration on the full (train + validation) series."""
    return train(series, trials[0].config)
