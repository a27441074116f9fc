"""Recursive multi-step forecasting with a fitted two-view model.

Each step maps the current lag window to a latent code, then to an output
either in closed form (linear output kernel) or through similarities to the
training targets followed by a pre-image solver.
"""

from dataclasses import dataclass

import numpy as np

from .embedding import initial_window, shift_window
from .kernels import KernelSpec, center_kernel_vector, cross_gram, gram, kernel_vector


@dataclass(frozen=True)
class ClosedFormLinear:
    def __str__(self):
        return "linear"


@dataclass(frozen=True)
class KernelSmoother:
    n_r: int = 1

    def __post_init__(self):
        if int(self.n_r) < 1:
            raise ValueError(f"smoother neighbour count must be >= 1, got {self.n_r}")
        object.__setattr__(self, "n_r", int(self.n_r))

    def __str__(self):
        return f"smoother:{self.n_r}"


@dataclass(frozen=True)
class KrrPreimage:
    lam: float = 1e-3
    sigma_h: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"ridge parameter must be positive, got {self.lam}")
        if not self.sigma_h > 0:
            raise ValueError(f"latent bandwidth must be positive, got {self.sigma_h}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "sigma_h", float(self.sigma_h))

    def __str__(self):
        return f"krr:{self.lam!r}:{self.sigma_h!r}"


def parse_preimage(text):
    """``linear`` | ``smoother:NR`` | ``krr:LAMBDA:SIGMA_H``."""
    parts = str(text).strip().split(":")
    try:
        if parts == ["linear"]:
            return ClosedFormLinear()
        if parts[0] == "smoother" and len(parts) == 2:
            return KernelSmoother(int(parts[1]))
        if parts[0] == "krr" and len(parts) == 3:
            return KrrPreimage(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ValueError(f"bad pre-image spec {text!r}: {exc}") from None
    raise ValueError(f"cannot parse pre-image {text!r}; use linear, smoother:NR or krr:LAMBDA:SIGMA_H")


@dataclass(frozen=True)
class ForecastConfig:
    horizon: int
    preimage: object = ClosedFormLinear()

    def __post_init__(self):
        if int(self.horizon) < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if isinstance(self.preimage, str):
            object.__setattr__(self, "preimage", parse_preimage(self.preimage))


@dataclass
class ForecastResult:
    predictions: np.ndarray     # horizon x d, original units
    latents: np.ndarray         # horizon x s
    mse: float | None = None
    mse_per_dim: np.ndarray | None = None
    truth: np.ndarray | None = None


# ---------------------------------------------------------------------------
# single-step operations
# ---------------------------------------------------------------------------


def input_kernel_vector(model, x):
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.X_train.shape[1]:
        raise ValueError(f"lag vector has length {x.shape[0]}, model expects {model.X_train.shape[1]}")
    k = kernel_vector(model.kx, model.X_train, x)
    if model.center:
        k = center_kernel_vector(k, model.cx)
    return k


def latent_code(model, x):
    """Latent code of a lag vector (standardized units): ``M_inv H k_x(x)``."""
    return model.M_inv @ (model.H @ input_kernel_vector(model, x))


def predict_linear(model, h):
    """Closed-form output for a linear output kernel: ``Y^T H^T h``."""
    if not model.ky.is_linear:
        raise ValueError("closed-form output requires a linear output kernel; use a pre-image method")
    return model.y_mean + model.output_weights @ np.asarray(h, dtype=float)


def output_kernel_vector(model, h):
    """Similarities of the implicit prediction to every training target: ``Ky H^T h``."""
    h = np.asarray(h, dtype=float)
    if h.shape[0] != model.s:
        raise ValueError(f"latent vector has length {h.shape[0]}, model has {model.s} components")
    return model.KyHt @ h


def preimage_identity(model, k_y_vec):
    """Exact inverse when the output feature map is the identity (linear kernel).

    Solves ``(Y - mean) y = k`` in least squares; used to cross-check the
    kernel-trick route against the closed form.
    """
    if not model.ky.is_linear:
        raise ValueError("identity feature inversion only applies to a linear output kernel")
    Yc = model.Y_train - model.y_mean
    sol, *_ = np.linalg.lstsq(Yc, np.asarray(k_y_vec, dtype=float), rcond=None)
    return model.y_mean + sol


def preimage_smoother(model, k_y_vec, n_r):
    """Similarity-weighted mean of the ``n_r`` most similar training targets."""
    k = np.asarray(k_y_vec, dtype=float)
    N = model.N
    n_r = int(n_r)
    if not 1 <= n_r <= N:
        raise ValueError(f"n_r must lie in [1, {N}], got {n_r}")
    if not np.any(k):
        raise ValueError("prediction outside kernel support: all similarities are zero")
    if n_r == N:
        top = np.argsort(-k, kind="stable")
    else:
        part = np.argpartition(-k, n_r - 1)[:n_r]
        top = part[np.argsort(-k[part], kind="stable")]
    w = np.maximum(k[top], 0.0)
    total = w.sum()
    # n_r = 1 must hand back the target itself; w * y / w can be off by an ulp
    if n_r == 1 or total <= 1e-12 * np.max(np.abs(k[top])):
        return model.Y_train[top[0]].copy()
    return (w @ model.Y_train[top]) / total


@dataclass(frozen=True)
class PreimageMap:
    """Kernel ridge map from latent codes back to output space."""

    latents: np.ndarray     # N x s, training codes (columns of H)
    alpha: np.ndarray       # N x d
    offset: np.ndarray      # d
    sigma_h: float
    lam: float

    def __call__(self, h):
        k = kernel_vector(KernelSpec("rbf", self.sigma_h), self.latents, h)
        return self.offset + k @ self.alpha


def preimage_krr_fit(model, lam, sigma_h):
    """Fit ``alpha = (K^T K + lam I)^-1 K Y`` over the training latent codes."""
    if not lam > 0:
        raise ValueError(f"ridge parameter must be positive, got {lam}")
    latents = np.ascontiguousarray(model.H.T)
    K = gram(KernelSpec("rbf", sigma_h), latents)
    offset = model.y_mean.copy()
    Yc = model.Y_train - offset
    # K is symmetric: solve through its eigenbasis, K = Q diag(w) Q^T
    w, Q = np.linalg.eigh(K)
    denom = w * w + lam
    if denom.min() <= 1e-15 * denom.max():
        raise np.linalg.LinAlgError(
            f"pre-image ridge system is ill-conditioned (lambda={lam}); use a larger lambda"
        )
    alpha = Q @ ((w / denom)[:, None] * (Q.T @ Yc))
    return PreimageMap(latents, alpha, offset, float(sigma_h), float(lam))


# ---------------------------------------------------------------------------
# recursion
# ---------------------------------------------------------------------------


def output_step(model, h, preimage, pmap=None):
    """Map one latent code to an output (standardized units)."""
    if isinstance(preimage, ClosedFormLinear):
        return predict_linear(model, h)
    if isinstance(preimage, KernelSmoother):
        return preimage_smoother(model, output_kernel_vector(model, h), preimage.n_r)
    if isinstance(preimage, KrrPreimage):
        if pmap is None:
            pmap = preimage_krr_fit(model, preimage.lam, preimage.sigma_h)
        return pmap(h)
    raise TypeError(f"unknown pre-image method {preimage!r}")


def training_window(model):
    """Lag vector (standardized units) that continues right after the training data."""
    return shift_window(model.X_train[-1], model.Y_train[-1], model.d)


def mse(pred, truth):
    """Mean squared error averaged over timesteps and dimensions."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: predictions {pred.shape} vs truth {truth.shape}")
    return float(np.mean((pred - truth) ** 2))


def _score(result, truth, d):
    if truth is None:
        return result
    truth = np.asarray(truth, dtype=float)
    if truth.ndim == 1:
        truth = truth[:, None] if d == 1 else truth[None, :]
    if truth.shape[1] != d:
        raise ValueError(f"truth has d={truth.shape[1]}, model forecasts d={d}")
    h = result.predictions.shape[0]
    if truth.shape[0] < h:
        raise ValueError(f"truth has {truth.shape[0]} rows, horizon is {h}")
    truth = truth[:h]
    result.truth = truth
    result.mse = mse(result.predictions, truth)
    result.mse_per_dim = np.mean((result.predictions - truth) ** 2, axis=0)
    return result


def recursive_forecast(model, x0, config, truth=None, pmap=None, standardized=False):
    """Forecast ``config.horizon`` steps, feeding each prediction back in.

    ``x0`` is a lag vector (see ``initial_window``) in original units unless
    ``standardized``; ``None`` continues from the end of the training data.
    Predictions and the optional MSE against ``truth`` are in original units.
    """
    st = model.standardization
    d = model.d
    if x0 is None:
        x = training_window(model)
    else:
        x = np.asarray(x0, dtype=float).ravel()
        if x.shape[0] != model.X_train.shape[1]:
            raise ValueError(f"initial window has length {x.shape[0]}, model expects {model.X_train.shape[1]}")
        if not standardized:
            x = ((x.reshape(d, -1) - st.mean[:, None]) / st.std[:, None]).reshape(-1)
    pre = config.preimage
    if isinstance(pre, KrrPreimage) and pmap is None:
        pmap = preimage_krr_fit(model, pre.lam, pre.sigma_h)
    preds = np.empty((config.horizon, d))
    latents = np.empty((config.horizon, model.s))
    for i in range(config.horizon):
        if i:
            x = shift_window(x, preds[i - 1], d)
        h = latent_code(model, x)
        y = output_step(model, h, pre, pmap)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite prediction at step {i}")
        latents[i] = h
        preds[i] = y
    result = ForecastResult(st.invert(preds), latents)
    return _score(result, truth, d)


def forecast_series(model, history, config, truth=None):
    """Forecast after the raw series ``history`` (original units)."""
    return recursive_forecast(model, initial_window(history, model.p), config, truth)


def teacher_forced(model, X, preimage, pmap=None):
    """One-step outputs for each row of ``X`` (standardized units), no recursion."""
    if isinstance(preimage, KrrPreimage) and pmap is None:
        pmap = preimage_krr_fit(model, preimage.lam, preimage.sigma_h)
    Kx = cross_gram(model.kx, model.X_train, X)
    if model.center:
        Kx = center_kernel_vector(Kx, model.cx)
    Hl = (model.M_inv @ (model.H @ Kx)).T
    return np.array([output_step(model, h, preimage, pmap) for h in Hl])
