import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvrkm.embedding import LaggedDataset
from mvrkm.kernels import KernelSpec, eval_kernel
from mvrkm.trainer import (
    SingularLatentOperator,
    decompose,
    eigen_sum,
    fit,
    invert_latent_operator,
    latent_operator,
    sign_normalize,
)

from conftest import model_from_grams

RBF = KernelSpec("rbf", 1.0)
LIN = KernelSpec("linear")


def check_invariants(model, K):
    H, lam = model.H, model.lambdas
    np.testing.assert_allclose(H @ H.T, np.eye(model.s), atol=1e-8)
    resid = np.linalg.norm(K @ H.T - H.T * lam, "fro")
    assert resid <= 1e-8 * np.linalg.norm(K, "fro")
    assert np.all(np.diff(lam) <= 0)
    assert lam.min() >= -1e-8 * np.trace(K)


def oracle_sum_matrix(data, kx, ky):
    """Pointwise Gram construction and explicit centering-matrix products."""
    n = data.N
    Kx = np.array([[eval_kernel(kx, a, b) for b in data.X] for a in data.X])
    Ky = np.array([[eval_kernel(ky, a, b) for b in data.Y] for a in data.Y])
    C = np.eye(n) - np.ones((n, n)) / n
    return C @ Kx @ C + C @ Ky @ C


class TestEigenSum:
    def test_diagonal(self):
        w, V = eigen_sum(np.diag([2.0, 1.0]), np.diag([1.0, 0.0]))
        np.testing.assert_allclose(w, [3.0, 1.0])
        np.testing.assert_allclose(V, np.eye(2), atol=1e-15)

    def test_sign_convention(self):
        V = sign_normalize(np.array([[0.6, -0.1], [-0.8, -0.9], [0.0, 0.3]]))
        np.testing.assert_allclose(V[:, 0], [-0.6, 0.8, 0.0])
        np.testing.assert_allclose(V[:, 1], [0.1, 0.9, -0.3])
        # exact tie: lowest index wins
        np.testing.assert_allclose(sign_normalize(np.array([[-0.5], [0.5]]))[:, 0], [0.5, -0.5])

    def test_diag_model(self):
        data = LaggedDataset(np.zeros((2, 2)), np.zeros((2, 1)), 1)
        m = model_from_grams(data, np.diag([2.0, 1.0]), np.diag([1.0, 0.0]), 2)
        np.testing.assert_allclose(m.lambdas, [3.0, 1.0])
        np.testing.assert_allclose(m.H, np.eye(2), atol=1e-15)


class TestFit:
    def test_full_spectrum_reconstruction(self, sine_data):
        m = fit(sine_data, RBF, LIN, s=sine_data.N)
        K = oracle_sum_matrix(sine_data, RBF, LIN)
        np.testing.assert_allclose(m.H.T @ np.diag(m.lambdas) @ m.H, K, atol=1e-8)

    def test_sine_dataset_against_oracle(self, sine_data):
        m = fit(sine_data, RBF, LIN, s=20)
        K = oracle_sum_matrix(sine_data, RBF, LIN)
        check_invariants(m, K)
        lead = np.linalg.eigvalsh(K)[-1]
        assert m.lambdas[0] == pytest.approx(lead, rel=1e-8)
        # an independent route for the top eigenvalue: power iteration
        v = np.ones(K.shape[0])
        for _ in range(2000):
            v = K @ v
            v /= np.linalg.norm(v)
        assert m.lambdas[0] == pytest.approx(v @ K @ v, rel=1e-8)

    def test_s_bounds(self, sine_data):
        with pytest.raises(ValueError, match="s exceeds sample count"):
            fit(sine_data, RBF, LIN, s=sine_data.N + 1)
        with pytest.raises(ValueError):
            fit(sine_data, RBF, LIN, s=0)

    def test_default_components(self, sine_data):
        assert fit(sine_data, RBF, LIN).s == min(sine_data.N, 50)

    def test_deterministic(self, sine_data):
        a = fit(sine_data, RBF, LIN, s=15)
        b = fit(sine_data, RBF, LIN, s=15)
        np.testing.assert_array_equal(a.H, b.H)
        np.testing.assert_array_equal(a.M_inv, b.M_inv)

    def test_permutation_leaves_spectrum(self, rng):
        X = rng.normal(size=(40, 3))
        Y = rng.normal(size=(40, 1))
        perm = rng.permutation(40)
        a = fit(LaggedDataset(X, Y, 2), RBF, KernelSpec("rbf", 0.7), s=40)
        b = fit(LaggedDataset(X[perm], Y[perm], 2), RBF, KernelSpec("rbf", 0.7), s=40)
        np.testing.assert_allclose(a.lambdas, b.lambdas, atol=1e-8)

    def test_self_view_doubles_pca(self, rng):
        X = rng.normal(size=(30, 4)) @ np.diag([3.0, 2.0, 1.0, 0.5])
        m = fit(LaggedDataset(X, X, 3), LIN, LIN, s=4)
        sv = np.linalg.svd(X - X.mean(axis=0), compute_uv=False)
        np.testing.assert_allclose(m.lambdas, 2 * sv ** 2, rtol=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(3, 40), st.integers(1, 3), st.floats(0.2, 5.0), st.booleans(), st.data())
    def test_invariants_random(self, n, m, sigma, center, draw):
        rng = np.random.default_rng(draw.draw(st.integers(0, 2**31)))
        X = rng.normal(size=(n, m))
        Y = rng.normal(size=(n, 1))
        s = draw.draw(st.integers(1, n))
        data = LaggedDataset(X, Y, 1)
        try:
            model = fit(data, KernelSpec("rbf", sigma), LIN, s=s, center=center)
        except SingularLatentOperator:
            return
        sp = decompose(data, KernelSpec("rbf", sigma), LIN, center)
        K = sp.Kx + sp.Ky
        check_invariants(model, K)
        if s == n:
            recon = (model.H.T * model.lambdas) @ model.H
            np.testing.assert_allclose(recon, K, atol=1e-8 * max(1.0, np.abs(K).max()))


class TestLatentOperator:
    def test_scalar(self):
        M_inv, jitter = invert_latent_operator(np.array([2.0]), np.array([[1.0]]), np.array([[0.5]]))
        assert M_inv[0, 0] == pytest.approx(1 / 1.5, rel=1e-15)
        assert jitter == 0.0

    def test_zero_output_gram(self):
        lam = np.array([4.0, 2.0, 0.5])
        M_inv, _ = invert_latent_operator(lam, np.eye(3), np.zeros((3, 3)))
        np.testing.assert_allclose(M_inv, np.diag(1 / lam), rtol=1e-14)

    def test_dense_inverse_oracle(self, rng):
        N, s = 12, 5
        A = rng.normal(size=(N, N))
        Ky = A @ A.T
        H = np.linalg.qr(rng.normal(size=(N, s)))[0].T
        lam = np.sort(rng.uniform(50, 100, size=s))[::-1]
        M_inv, jitter = invert_latent_operator(lam, H, Ky)
        M = np.diag(lam) - H @ Ky @ H.T
        oracle = np.linalg.solve(M, np.eye(s))
        np.testing.assert_allclose(M_inv, oracle, rtol=1e-8, atol=1e-12)
        assert jitter == 0.0

    def test_jitter_on_singular(self):
        lam = np.array([1.0, 1.0])
        H = np.eye(2)
        Ky = np.diag([0.0, 1.0])      # second component fully explained by Ky
        M_inv, jitter = invert_latent_operator(lam, H, Ky)
        assert jitter == pytest.approx(1e-10)
        assert np.all(np.isfinite(M_inv))

    def test_singular_after_jitter(self):
        with pytest.raises(SingularLatentOperator):
            invert_latent_operator(np.array([1.0, 1.0]), np.eye(2), np.diag([0.0, np.nan]))

    def test_model_accessor(self, sine_data):
        m = fit(sine_data, RBF, LIN, s=10)
        M = np.diag(m.lambdas) - m.H @ m.Ky @ m.H.T
        np.testing.assert_allclose(latent_operator(m) @ M, np.eye(10), atol=1e-8)
