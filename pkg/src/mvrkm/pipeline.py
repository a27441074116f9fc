"""Model configurations and the standardize -> embed -> fit -> forecast pipeline."""

import json
from dataclasses import dataclass, field

from .embedding import Standardization, fit_standardization, lag_embed, standardize
from .forecaster import (
    ClosedFormLinear,
    ForecastConfig,
    KrrPreimage,
    parse_preimage,
    preimage_krr_fit,
    recursive_forecast,
)
from .kernels import KernelSpec
from .lssvm import lssvm_fit, lssvm_forecast
from .trainer import decompose, model_from_spectrum

MODEL_KINDS = ("mvrkm", "lssvm")


def _spec(v):
    return v if isinstance(v, KernelSpec) else KernelSpec.parse(v)


@dataclass(frozen=True)
class ModelConfig:
    """Everything needed to train one model and forecast with it."""

    model: str = "mvrkm"
    lag: int = 10
    kx: KernelSpec = field(default_factory=lambda: KernelSpec("rbf", 1.0))
    ky: KernelSpec = field(default_factory=lambda: KernelSpec("linear"))
    components: int = 50
    preimage: object = field(default_factory=ClosedFormLinear)
    gamma: float = 1.0
    center: bool = True
    standardize: bool = True

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.model!r}; expected one of {MODEL_KINDS}")
        if int(self.lag) < 1:
            raise ValueError(f"lag must be a positive integer, got {self.lag}")
        object.__setattr__(self, "lag", int(self.lag))
        object.__setattr__(self, "kx", _spec(self.kx))
        object.__setattr__(self, "ky", _spec(self.ky))
        object.__setattr__(self, "components", int(self.components))
        if isinstance(self.preimage, str):
            object.__setattr__(self, "preimage", parse_preimage(self.preimage))
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.model == "mvrkm" and isinstance(self.preimage, ClosedFormLinear) and not self.ky.is_linear:
            raise ValueError("closed-form output needs a linear ky; pick smoother:NR or krr:LAMBDA:SIGMA_H")
        if self.model == "lssvm" and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    def to_dict(self):
        d = {"model": self.model, "lag": self.lag, "kx": str(self.kx)}
        if self.model == "mvrkm":
            d.update(ky=str(self.ky), components=self.components,
                     preimage=str(self.preimage), center=self.center)
        else:
            d["gamma"] = self.gamma
        d["standardize"] = self.standardize
        return d

    @classmethod
    def from_dict(cls, d):
        known = {"model", "lag", "kx", "ky", "components", "preimage", "gamma", "center", "standardize"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def key(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def prepare(series, cfg, stats=None):
    """Standardize (when configured) and lag-embed a training series."""
    if cfg.standardize:
        st = stats if stats is not None else fit_standardization(series.values)
        scaled = standardize(series, st)
    else:
        st = Standardization.identity(series.d)
        scaled = series
    return lag_embed(scaled, cfg.lag), st


def train(series, cfg):
    data, st = prepare(series, cfg)
    if cfg.model == "lssvm":
        return lssvm_fit(data, cfg.kx, cfg.gamma, st)
    if cfg.components > data.N:
        raise ValueError(f"s exceeds sample count: s={cfg.components}, N={data.N}")
    spectrum = decompose(data, cfg.kx, cfg.ky, cfg.center)
    return model_from_spectrum(spectrum, data, cfg.kx, cfg.ky, cfg.components, st)


def forecast(model, cfg, horizon, truth=None, x0=None, pmap=None):
    """Recursive forecast continuing after the training data (or from ``x0``)."""
    if cfg.model == "lssvm":
        return lssvm_forecast(model, x0, horizon, truth)
    if isinstance(cfg.preimage, KrrPreimage) and pmap is None:
        pmap = preimage_krr_fit(model, cfg.preimage.lam, cfg.preimage.sigma_h)
    return recursive_forecast(model, x0, ForecastConfig(horizon, cfg.preimage), truth, pmap=pmap)


def fit_and_forecast(train_series, cfg, horizon, truth=None):
    return forecast(train(train_series, cfg), cfg, horizon, truth)
