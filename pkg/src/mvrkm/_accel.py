"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from ``MVRKM_BACKEND``
(``numba`` or ``numpy``; default ``numba`` when it can be imported).
Both implementations are always importable so they can be compared
directly, see ``benchmarks/bench_backends.py``.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_requested = os.environ.get("MVRKM_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"MVRKM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

HAVE_NUMBA = numba is not None
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"

# fastmath stays off: the Euler integrator must be bit-reproducible.
_jit_kwargs = {"cache": True, "nogil": True}


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(**_jit_kwargs)(fn)


# ---------------------------------------------------------------------------
# squared euclidean distances
# ---------------------------------------------------------------------------


def sqdist_numpy(A, B):
    """Pairwise squared distances via ||a||^2 + ||b||^2 - 2 a.b, clamped at 0."""
    aa = np.einsum("ij,ij->i", A, A)
    bb = np.einsum("ij,ij->i", B, B)
    D = aa[:, None] + bb[None, :] - 2.0 * (A @ B.T)
    np.maximum(D, 0.0, out=D)
    return D


@_njit
def _sqdist_loop(A, B):
    n, m = A.shape
    k = B.shape[0]
    D = np.empty((n, k))
    for i in range(n):
        for j in range(k):
            acc = 0.0
            for c in range(m):
                t = A[i, c] - B[j, c]
                acc += t * t
            D[i, j] = acc
    return D


def sqdist_numba(A, B):
    return _sqdist_loop(np.ascontiguousarray(A, dtype=np.float64),
                        np.ascontiguousarray(B, dtype=np.float64))


def rbf_cross_numpy(A, B, sigma):
    D = sqdist_numpy(A, B)
    D *= -1.0 / (2.0 * sigma * sigma)
    return np.exp(D)


@_njit
def _rbf_cross_loop(A, B, scale):
    n, m = A.shape
    k = B.shape[0]
    out = np.empty((n, k))
    for i in range(n):
        for j in range(k):
            acc = 0.0
            for c in range(m):
                t = A[i, c] - B[j, c]
                acc += t * t
            out[i, j] = np.exp(-acc * scale)
    return out


def rbf_cross_numba(A, B, sigma):
    return _rbf_cross_loop(np.ascontiguousarray(A, dtype=np.float64),
                           np.ascontiguousarray(B, dtype=np.float64),
                           1.0 / (2.0 * sigma * sigma))


# ---------------------------------------------------------------------------
# explicit Euler for the Lorenz system
# ---------------------------------------------------------------------------


def euler_lorenz_numpy(state0, a, r, b, dt, steps):
    out = np.empty((steps, 3))
    x, y, z = float(state0[0]), float(state0[1]), float(state0[2])
    out[0] = (x, y, z)
    for k in range(1, steps):
        dx = -a * x + a * y
        dy = -x * z + r * x - y
        dz = x * y - b * z
        x = x + dt * dx
        y = y + dt * dy
        z = z + dt * dz
        out[k, 0] = x
        out[k, 1] = y
        out[k, 2] = z
    return out


@_njit
def _euler_lorenz_loop(state0, a, r, b, dt, steps):
    out = np.empty((steps, 3))
    x = state0[0]
    y = state0[1]
    z = state0[2]
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    for k in range(1, steps):
        dx = -a * x + a * y
        dy = -x * z + r * x - y
        dz = x * y - b * z
        x = x + dt * dx
        y = y + dt * dy
        z = z + dt * dz
        out[k, 0] = x
        out[k, 1] = y
        out[k, 2] = z
    return out


def euler_lorenz_numba(state0, a, r, b, dt, steps):
    return _euler_lorenz_loop(np.asarray(state0, dtype=np.float64),
                              float(a), float(r), float(b), float(dt), int(steps))


if BACKEND == "numba":
    sqdist = sqdist_numba
    rbf_cross = rbf_cross_numba
    euler_lorenz = euler_lorenz_numba
else:
    sqdist = sqdist_numpy
    rbf_cross = rbf_cross_numpy
    euler_lorenz = euler_lorenz_numpy
