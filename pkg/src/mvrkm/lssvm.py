"""NAR least-squares SVM regression baseline."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .embedding import Standardization, shift_window
from .forecaster import ForecastResult, _score
from .kernels import gram, kernel_vector


@dataclass(frozen=True, eq=False)
class LssvmModel:
    alpha: np.ndarray       # N x d
    b: np.ndarray           # d
    gamma: float
    kx: object
    X_train: np.ndarray
    Y_train: np.ndarray
    p: int
    standardization: Standardization

    @property
    def d(self):
        return self.alpha.shape[1]

    @property
    def N(self):
        return self.alpha.shape[0]


def bordered_system(K, gamma):
    N = K.shape[0]
    A = np.empty((N + 1, N + 1))
    A[0, 0] = 0.0
    A[0, 1:] = 1.0
    A[1:, 0] = 1.0
    A[1:, 1:] = K + np.eye(N) / gamma
    return A


def lssvm_fit(data, kx, gamma, standardization=None):
    """Solve ``[[0, 1^T], [1, K + I/gamma]] [b; alpha] = [0; y]`` for every output column."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    A = bordered_system(gram(kx, data.X), gamma)
    rhs = np.vstack([np.zeros((1, data.d)), data.Y])
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            sol = scipy.linalg.solve(A, rhs, assume_a="sym")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise np.linalg.LinAlgError(f"LS-SVM system is singular (gamma={gamma}): {exc}") from exc
    if standardization is None:
        standardization = Standardization.identity(data.d)
    return LssvmModel(sol[1:], sol[0], float(gamma), kx, data.X, data.Y, data.p, standardization)


def lssvm_predict(model, x):
    """Dual expansion ``sum_i alpha_i k(x_i, x) + b`` (standardized units)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.X_train.shape[1]:
        raise ValueError(f"lag vector has length {x.shape[0]}, model expects {model.X_train.shape[1]}")
    return kernel_vector(model.kx, model.X_train, x) @ model.alpha + model.b


def lssvm_forecast(model, x0, horizon, truth=None, standardized=False):
    """Recursive forecast; same window handling as the two-view forecaster."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    st = model.standardization
    d = model.d
    if x0 is None:
        x = shift_window(model.X_train[-1], model.Y_train[-1], d)
    else:
        x = np.asarray(x0, dtype=float).ravel()
        if not standardized:
            x = ((x.reshape(d, -1) - st.mean[:, None]) / st.std[:, None]).reshape(-1)
    preds = np.empty((horizon, d))
    for i in range(horizon):
        if i:
            x = shift_window(x, preds[i - 1], d)
        y = lssvm_predict(model, x)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite prediction at step {i}")
        preds[i] = y
    return _score(ForecastResult(st.invert(preds), np.empty((horizon, 0))), truth, d)
