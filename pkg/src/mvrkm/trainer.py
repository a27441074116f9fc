"""Training: eigendecomposition of the summed input/output-view Gram matrices."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .embedding import Standardization
from .kernels import center_gram, gram


class SingularLatentOperator(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition of ``Kx + Ky``, reusable across component counts."""

    evals: np.ndarray   # descending
    evecs: np.ndarray   # columns, sign-normalized
    Kx: np.ndarray      # centered when ``center``
    Ky: np.ndarray
    cx: object
    cy: object
    center: bool


@dataclass(frozen=True, eq=False)
class TrainedModel:
    H: np.ndarray               # s x N, orthonormal rows
    lambdas: np.ndarray         # s, descending
    X_train: np.ndarray         # N x (p+1)d, standardized units
    Y_train: np.ndarray         # N x d
    kx: object
    ky: object
    center: bool
    cx: object                  # CenteringStats or None
    cy: object
    Ky: np.ndarray              # centered when ``center``
    M_inv: np.ndarray           # (diag(lambdas) - H Ky H^T)^-1
    jitter: float
    p: int
    standardization: Standardization

    @property
    def s(self):
        return self.H.shape[0]

    @property
    def N(self):
        return self.H.shape[1]

    @property
    def d(self):
        return self.Y_train.shape[1]

    @cached_property
    def y_mean(self):
        return self.Y_train.mean(axis=0) if self.center else np.zeros(self.d)

    @cached_property
    def KyHt(self):
        """``Ky H^T`` (N x s): output similarities are ``KyHt @ h``."""
        return self.Ky @ self.H.T

    @cached_property
    def output_weights(self):
        """``Y^T H^T`` (d x s) in the output view's (centered) coordinates."""
        return (self.Y_train - self.y_mean).T @ self.H.T


def sign_normalize(V):
    """Flip columns so each one's largest-magnitude entry is positive."""
    V = np.array(V, dtype=float, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)  # first occurrence breaks ties
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def eigen_sum(Kx, Ky):
    """Descending, sign-normalized eigenpairs of ``Kx + Ky``."""
    K = Kx + Ky
    K = 0.5 * (K + K.T)
    try:
        w, V = scipy.linalg.eigh(K)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise np.linalg.LinAlgError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], sign_normalize(V[:, order])


def invert_latent_operator(lambdas, H, Ky):
    """Return ``((diag(lambdas) - H Ky H^T)^-1, jitter)``.

    Jitter ``1e-10 * trace(diag(lambdas)) / s`` is added to the diagonal only
    when the plain matrix is numerically singular.
    """
    s = lambdas.shape[0]
    M = np.diag(lambdas) - H @ Ky @ H.T
    M = 0.5 * (M + M.T)
    jitter = 0.0
    if not _well_conditioned(M):
        jitter = 1e-10 * abs(float(np.sum(lambdas))) / s
        if jitter == 0.0:
            jitter = 1e-10
        M = M + jitter * np.eye(s)
        if not _well_conditioned(M, limit=1e15):
            raise SingularLatentOperator(
                "latent operator (Lambda - H Ky H^T) is singular even after jitter; "
                "try fewer components or different kernel bandwidths"
            )
    return np.linalg.inv(M), jitter


def _well_conditioned(M, limit=1e12):
    if not np.all(np.isfinite(M)):
        return False
    with np.errstate(all="ignore"):
        c = np.linalg.cond(M)
    return bool(np.isfinite(c) and c < limit)


def decompose(data, kx, ky, center=True):
    Kx = gram(kx, data.X)
    Ky = gram(ky, data.Y)
    cx = cy = None
    if center:
        Kx, cx = center_gram(Kx)
        Ky, cy = center_gram(Ky)
    evals, evecs = eigen_sum(Kx, Ky)
    return Spectrum(evals, evecs, Kx, Ky, cx, cy, center)


def model_from_spectrum(spectrum, data, kx, ky, s, standardization=None):
    N = data.N
    s = int(s)
    if s < 1:
        raise ValueError(f"component count must be at least 1, got {s}")
    if s > N:
        raise ValueError(f"s exceeds sample count: s={s}, N={N}")
    H = np.ascontiguousarray(spectrum.evecs[:, :s].T)
    lambdas = spectrum.evals[:s].copy()
    M_inv, jitter = invert_latent_operator(lambdas, H, spectrum.Ky)
    if standardization is None:
        standardization = Standardization.identity(data.d)
    return TrainedModel(
        H=H, lambdas=lambdas, X_train=data.X, Y_train=data.Y, kx=kx, ky=ky,
        center=spectrum.center, cx=spectrum.cx, cy=spectrum.cy, Ky=spectrum.Ky,
        M_inv=M_inv, jitter=jitter, p=data.p, standardization=standardization,
    )


def fit(data, kx, ky, s=None, center=True, standardization=None):
    """Fit the two-view model on a lagged dataset.

    Parameters
    ----------
    data : LaggedDataset
        Inputs and one-step targets, already in model (standardized) units.
    kx, ky : KernelSpec
        Input-view and output-view kernels.
    s : int, optional
        Number of latent components, ``1 <= s <= N``; defaults to ``min(N, 50)``.
    center : bool
        Center both Gram matrices in feature space.
    standardization : Standardization, optional
        Scaling that maps raw series values into ``data``'s units.
    """
    if s is None:
        s = min(data.N, 50)
    if s > data.N:
        raise ValueError(f"s exceeds sample count: s={s}, N={data.N}")
    spectrum = decompose(data, kx, ky, center)
    return model_from_spectrum(spectrum, data, kx, ky, s, standardization)


def latent_operator(model):
    return model.M_inv
