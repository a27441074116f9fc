"""Kernel evaluation, Gram matrices and feature-space centering."""

from dataclasses import dataclass

import numpy as np

from . import _accel

FAMILIES = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth (``sigma`` is ignored for ``linear``)."""

    family: str = "rbf"
    sigma: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "rbf":
            if not (np.isfinite(self.sigma) and self.sigma > 0):
                raise ValueError(f"rbf bandwidth must be positive, got {self.sigma!r}")
            object.__setattr__(self, "sigma", float(self.sigma))
        else:
            object.__setattr__(self, "sigma", 0.0)

    @classmethod
    def parse(cls, text):
        """Parse ``"linear"`` or ``"rbf:SIGMA"``."""
        text = str(text).strip()
        if text == "linear":
            return cls("linear")
        family, sep, value = text.partition(":")
        if family != "rbf" or not sep:
            raise ValueError(f"cannot parse kernel {text!r}; use 'linear' or 'rbf:SIGMA'")
        try:
            sigma = float(value)
        except ValueError:
            raise ValueError(f"cannot parse rbf bandwidth in {text!r}") from None
        return cls("rbf", sigma)

    def __str__(self):
        return "linear" if self.family == "linear" else f"rbf:{self.sigma!r}"

    @property
    def is_linear(self):
        return self.family == "linear"


@dataclass(frozen=True)
class CenteringStats:
    """Training-Gram statistics needed to center new kernel vectors."""

    gram_row_means: np.ndarray
    gram_total_mean: float

    @property
    def n(self):
        return self.gram_row_means.shape[0]


def eval_kernel(spec, a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"kernel arguments differ in length: {a.size} vs {b.size}")
    if spec.is_linear:
        return float(a @ b)
    diff = a - b
    return float(np.exp(-(diff @ diff) / (2.0 * spec.sigma ** 2)))


def cross_gram(spec, A, B):
    """Matrix of k(A[i], B[j])."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"kernel arguments differ in length: {A.shape[1]} vs {B.shape[1]}")
    if spec.is_linear:
        return A @ B.T
    return _accel.rbf_cross(A, B, spec.sigma)


def gram(spec, data):
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] == 0:
        raise ValueError("cannot build a Gram matrix from empty data")
    K = cross_gram(spec, data, data)
    # exact symmetry; eigh only reads one triangle anyway
    K = 0.5 * (K + K.T)
    if not spec.is_linear:
        np.fill_diagonal(K, 1.0)
    return K


def kernel_vector(spec, data, x):
    """Similarities k(data[i], x) for every training row."""
    return cross_gram(spec, data, np.asarray(x, dtype=float).reshape(1, -1))[:, 0]


def center_gram(K):
    """Double-center K; returns the centered matrix and the statistics used."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {K.shape}")
    row_means = K.mean(axis=1)
    col_means = K.mean(axis=0)
    total = float(row_means.mean())
    Kc = K - row_means[:, None] - col_means[None, :] + total
    return Kc, CenteringStats(row_means, total)


def center_kernel_vector(k_vec, stats):
    """Center test similarities k(x_i, x*) against the training statistics.

    ``k_vec`` may also be a matrix whose columns are kernel vectors.
    """
    k_vec = np.asarray(k_vec, dtype=float)
    if k_vec.shape[0] != stats.n:
        raise ValueError(f"kernel vector has length {k_vec.shape[0]}, model was trained on {stats.n} points")
    rm = stats.gram_row_means if k_vec.ndim == 1 else stats.gram_row_means[:, None]
    return k_vec - rm - k_vec.mean(axis=0) + stats.gram_total_mean
