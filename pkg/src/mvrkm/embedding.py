"""Time series container and the lagged (NAR) input/target layout.

A lag vector holds ``p + 1`` values per dimension, stored as contiguous
per-dimension blocks, each ordered newest to oldest::

    [x_i^(1), ..., x_{i-p}^(1), ..., x_i^(d), ..., x_{i-p}^(d)]
"""

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, values):
        return (np.asarray(values, dtype=float) - self.mean) / self.std

    def invert(self, values):
        return np.asarray(values, dtype=float) * self.std + self.mean

    @classmethod
    def identity(cls, d):
        return cls(np.zeros(d), np.ones(d))


@dataclass(frozen=True)
class TimeSeries:
    """``n x d`` observations; ``standardization`` is set once values are scaled."""

    values: np.ndarray
    standardization: Standardization | None = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError(f"time series values must be n x d, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, item):
        return replace(self, values=self.values[item])


@dataclass(frozen=True)
class LaggedDataset:
    X: np.ndarray
    Y: np.ndarray
    p: int

    @property
    def N(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.Y.shape[1]


def fit_standardization(values):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    for j, s in enumerate(std):
        if not s > 0:
            raise ValueError(f"column {j} has zero variance; cannot standardize")
    return Standardization(mean, std)


def standardize(series, stats_from=None):
    """Scale each column to zero mean / unit population std.

    Statistics come from ``stats_from`` (the raw training split, or a
    ready-made ``Standardization``) when given, otherwise from ``series``.
    """
    if isinstance(stats_from, Standardization):
        st = stats_from
    else:
        ref = series if stats_from is None else stats_from
        if ref.d != series.d:
            raise ValueError(f"statistics series has d={ref.d}, data has d={series.d}")
        st = fit_standardization(ref.values)
    if st.mean.shape[0] != series.d:
        raise ValueError(f"statistics have d={st.mean.shape[0]}, data has d={series.d}")
    return TimeSeries(st.apply(series.values), st)


def destandardize(series):
    if series.standardization is None:
        return series
    return TimeSeries(series.standardization.invert(series.values), None)


def lag_embed(series, p):
    """Paired lag windows and one-step-ahead targets, ``N = n - p - 1`` rows."""
    values = series.values if isinstance(series, TimeSeries) else np.atleast_2d(np.asarray(series, float))
    p = int(p)
    if p < 1:
        raise ValueError(f"lag must be a positive integer, got {p}")
    n, d = values.shape
    if n < p + 2:
        raise ValueError(f"series too short for lag {p}: need at least {p + 2} points, got {n}")
    N = n - p - 1
    # row r uses newest index i = r + p, target i + 1
    idx = (np.arange(N)[:, None] + p) - np.arange(p + 1)[None, :]
    X = values[idx]                      # N x (p+1) x d
    X = np.transpose(X, (0, 2, 1)).reshape(N, d * (p + 1))
    Y = values[p + 1:].copy()
    return LaggedDataset(np.ascontiguousarray(X), Y, p)


def initial_window(series, p):
    """Lag vector built from the last ``p + 1`` points of ``series``."""
    values = series.values if isinstance(series, TimeSeries) else np.atleast_2d(np.asarray(series, float))
    n, d = values.shape
    if n < p + 1:
        raise ValueError(f"series too short for lag {p}: need at least {p + 1} points, got {n}")
    tail = values[n - p - 1:][::-1]      # newest first, (p+1) x d
    return np.ascontiguousarray(tail.T.reshape(-1))


def shift_window(x, y_new, d):
    """Push ``y_new`` into the newest slot of every dimension block, dropping the oldest."""
    W = np.asarray(x, dtype=float).reshape(d, -1).copy()
    W[:, 1:] = W[:, :-1]
    W[:, 0] = y_new
    return W.reshape(-1)


def newest(x, d):
    """Most recent point encoded in a lag vector."""
    return np.asarray(x).reshape(d, -1)[:, 0]
