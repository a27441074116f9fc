import os

import numpy as np
import pytest

from mvrkm.datagen import gen_sine
from mvrkm.embedding import Standardization, lag_embed, standardize
from mvrkm.kernels import KernelSpec, center_gram, gram
from mvrkm.trainer import Spectrum, eigen_sum, model_from_spectrum

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.path.join(ROOT, "data")
CONFIG_DIR = os.path.join(ROOT, "configs")


def model_from_grams(data, Kx, Ky, s, kx=None, ky=None, center=False, cx=None, cy=None):
    """Build a model straight from (possibly synthetic) Gram matrices."""
    evals, evecs = eigen_sum(Kx, Ky)
    spec = Spectrum(evals, evecs, Kx, Ky, cx, cy, center)
    return model_from_spectrum(spec, data, kx or KernelSpec("linear"), ky or KernelSpec("linear"), s,
                               Standardization.identity(data.d))


def centered_grams(data, kx, ky):
    Kx, cx = center_gram(gram(kx, data.X))
    Ky, cy = center_gram(gram(ky, data.Y))
    return Kx, Ky, cx, cy


@pytest.fixture
def sine_data():
    series = standardize(gen_sine(200, 1.0, 1.0, 0.0, 0.02))
    return lag_embed(series, 10)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
