"""Synthetic series, CSV input/output and train/test splitting."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .embedding import TimeSeries


@dataclass(frozen=True)
class LorenzParams:
    a: float = 10.0
    r: float = 28.0
    b: float = 2.667
    x0: float = 1.0
    y0: float = -1.0
    z0: float = 1.05
    dt: float = 0.01
    steps: int = 4001

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.steps) < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    n_test: int = 0

    @classmethod
    def parse(cls, text):
        a, sep, b = str(text).partition(":")
        if not sep:
            raise ValueError(f"split must look like N_TRAIN:N_TEST, got {text!r}")
        return cls(int(a), int(b))


def gen_sine(n, freq=1.0, amplitude=1.0, phase=0.0, dt=0.01):
    """``amplitude * sin(2 pi freq t dt + phase)`` for ``t = 0..n-1``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    t = np.arange(n) * dt
    return TimeSeries(amplitude * np.sin(2.0 * math.pi * freq * t + phase))


def gen_sum_sines(n, amplitudes=(1.0, 0.2), freqs=(1.0, 20.0), phases=(0.0, 0.0), dt=0.01):
    if not len(amplitudes) == len(freqs) == len(phases):
        raise ValueError(
            f"parameter lists differ in length: {len(amplitudes)} amplitudes, "
            f"{len(freqs)} freqs, {len(phases)} phases"
        )
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    values = np.zeros(n)
    for amp, f, ph in zip(amplitudes, freqs, phases):
        values += gen_sine(n, f, amp, ph, dt).values[:, 0]
    return TimeSeries(values)


def gen_lorenz(params=None):
    """Explicit-Euler Lorenz trajectory; row 0 is the initial condition."""
    params = params or LorenzParams()
    out = _accel.euler_lorenz(
        np.array([params.x0, params.y0, params.z0], dtype=float),
        params.a, params.r, params.b, params.dt, int(params.steps),
    )
    bad = np.flatnonzero(~np.all(np.isfinite(out), axis=1))
    if bad.size:
        raise FloatingPointError(f"Lorenz integration blew up at step {bad[0]} (dt={params.dt} too large?)")
    return TimeSeries(out)


def load_csv(path, has_header=False, columns=None):
    """Read a numeric CSV: rows are timesteps, (selected) columns are dimensions."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if lineno == 1 and has_header:
                continue
            if not record or all(not c.strip() for c in record):
                continue
            try:
                vals = [float(c) for c in record]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value in {record!r}") from None
            if rows and len(vals) != len(rows[0][1]):
                raise ValueError(f"{path}:{lineno}: expected {len(rows[0][1])} columns, got {len(vals)}")
            rows.append((lineno, vals))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array([v for _, v in rows], dtype=float)
    if columns is not None:
        columns = list(columns)
        for c in columns:
            if not 0 <= c < data.shape[1]:
                raise ValueError(f"{path}: column {c} out of range (file has {data.shape[1]} columns)")
        data = data[:, columns]
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        r, c = bad[0]
        raise ValueError(f"{path}:{rows[r][0]}: non-finite value in column {c}")
    return TimeSeries(data)


def write_csv(path, values, header=None):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in values:
            w.writerow([repr(float(v)) for v in row])


def split(series, spec):
    """Contiguous train prefix and the test block that immediately follows it."""
    if spec.n_train < 0 or spec.n_test < 0:
        raise ValueError(f"split sizes must be non-negative: {spec}")
    if spec.n_train + spec.n_test > series.n:
        raise ValueError(
            f"split {spec.n_train}+{spec.n_test} exceeds series length {series.n}"
        )
    train = series[: spec.n_train]
    test = series[spec.n_train: spec.n_train + spec.n_test]
    return train, test
