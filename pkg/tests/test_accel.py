import os
import subprocess
import sys

import numpy as np
import pytest

from mvrkm import _accel

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def test_sqdist_agree(rng):
    A = rng.normal(size=(40, 7))
    B = rng.normal(size=(25, 7))
    np.testing.assert_allclose(_accel.sqdist_numba(A, B), _accel.sqdist_numpy(A, B), rtol=1e-10, atol=1e-12)
    direct = ((A[:, None, :] - B[None, :, :]) ** 2).sum(-1)
    np.testing.assert_allclose(_accel.sqdist_numba(A, B), direct, rtol=1e-12)


def test_rbf_agree(rng):
    A = rng.normal(size=(30, 4))
    B = rng.normal(size=(11, 4))
    np.testing.assert_allclose(_accel.rbf_cross_numba(A, B, 1.3), _accel.rbf_cross_numpy(A, B, 1.3),
                               rtol=1e-10, atol=1e-14)


def test_euler_bit_identical():
    s0 = np.array([1.0, -1.0, 1.05])
    a = _accel.euler_lorenz_numba(s0, 10.0, 28.0, 2.667, 0.01, 4001)
    b = _accel.euler_lorenz_numpy(s0, 10.0, 28.0, 2.667, 0.01, 4001)
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("flag", ["numpy", "numba"])
def test_env_flag(flag):
    env = dict(os.environ, MVRKM_BACKEND=flag)
    out = subprocess.run([sys.executable, "-c", "from mvrkm import _accel; print(_accel.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == flag


def test_env_flag_rejects_unknown():
    env = dict(os.environ, MVRKM_BACKEND="cuda")
    out = subprocess.run([sys.executable, "-c", "import mvrkm._accel"], env=env, capture_output=True, text=True)
    assert out.returncode != 0 and "MVRKM_BACKEND" in out.stderr
