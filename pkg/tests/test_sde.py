import numpy as np
import pytest

from mlpicard import randomness as rnd
from mlpicard.errors import SingularDiffusionError
from mlpicard.sde import (CoefficientSet, euler_path, euler_sample, exact_brownian_path,
                          exact_brownian_sample, steps_for_level)


def constant_coefficients(d, c=1.0):
    return CoefficientSet(
        mu=lambda t, x: np.zeros_like(x),
        sigma=lambda t, x: np.broadcast_to(c * np.eye(d), x.shape[:-1] + (d, d)),
        dmu=lambda t, x: np.zeros(x.shape[:-1] + (d, d)),
        dsigma=lambda t, x: np.zeros(x.shape[:-1] + (d, d, d)),
    )


def many_keys(root, n, tag=0):
    return rnd.fork_grid(rnd.key_array(rnd.fork(root, tag)), np.arange(n))


def test_zero_length_sample(root):
    x = np.array([0.3, -1.0])
    for sample in (exact_brownian_sample(root, 0, 0.4, x, 0.4),
                   euler_sample(constant_coefficients(2), root, 0, 0.4, x, 0.4, 5)):
        np.testing.assert_array_equal(sample.state, x)
        assert sample.weight.tolist() == [1.0, 0.0, 0.0]


def test_exact_weight_moments(root):
    n = 1_000_000
    (state, weight), = exact_brownian_path(many_keys(root, n), 0.0, np.zeros((n, 1)), [1.0])
    assert np.all(weight[:, 0] == 1.0)
    assert abs(np.mean(weight[:, 1] * state[:, 0]) - 1.0) <= 0.01
    assert abs(np.mean(weight[:, 1])) <= 0.005


@pytest.mark.parametrize("d", [1, 2, 3])
def test_exact_weight_covariance(root, d):
    n = 100_000
    s, t = 0.2, 0.7
    (_, weight), = exact_brownian_path(many_keys(root, n, d), s, np.zeros((n, d)), [t])
    w = weight[:, 1:]
    se = np.sqrt(1.0 / (t - s) / n)
    assert np.all(np.abs(w.mean(axis=0)) <= 4 * se)
    cov = np.cov(w, rowvar=False).reshape(d, d)
    target = np.eye(d) / (t - s)
    # variance of a sample covariance entry of Gaussians is about (var^2 (1 + delta)) / n
    band = 4 * np.sqrt(2.0 / n) / (t - s)
    assert np.all(np.abs(cov - target) <= band)


def test_single_step_euler_equals_exact(root):
    x = np.array([0.5, -0.25, 1.0])
    exact = exact_brownian_sample(root, 3, 0.1, x, 0.9)
    euler = euler_sample(constant_coefficients(3), root, 3, 0.1, x, 0.9, 1)
    np.testing.assert_allclose(euler.state, exact.state, rtol=0, atol=1e-15)
    np.testing.assert_allclose(euler.weight, exact.weight, rtol=0, atol=1e-14)


def test_constant_diffusion_weight(root):
    c = 2.5
    x = np.array([1.0])
    sample = euler_sample(constant_coefficients(1, c), root, 0, 0.0, x, 0.8, 4)
    dW = sum(rnd.brownian_increment(root, i, 0.0, 0.2, 1).values for i in range(4))
    np.testing.assert_allclose(sample.state, x + c * dW, atol=1e-14)
    # sigma(s, x)^T / (t - s) * (dW / c)
    np.testing.assert_allclose(sample.weight[1:], dW / 0.8, atol=1e-14)


def gbm(mu=0.05, vol=0.2):
    return CoefficientSet(
        mu=lambda t, x: mu * x,
        sigma=lambda t, x: (vol * x)[..., None],
        dmu=lambda t, x: np.full(x.shape[:-1] + (1, 1), mu),
        dsigma=lambda t, x: np.full(x.shape[:-1] + (1, 1, 1), vol),
    )


def test_gbm_mean(root):
    n = 100_000
    X0 = np.ones((n, 1))
    (state, weight), = euler_path(gbm(), many_keys(root, n), 0.0, X0, [1.0], 256)
    se = state[:, 0].std() / np.sqrt(n)
    assert abs(state[:, 0].mean() - np.exp(0.05)) <= 3 * se


def ou():
    return CoefficientSet(
        mu=lambda t, x: -x,
        sigma=lambda t, x: np.broadcast_to(0.2 * np.eye(1), x.shape[:-1] + (1, 1)),
        dmu=lambda t, x: np.full(x.shape[:-1] + (1, 1), -1.0),
        dsigma=lambda t, x: np.zeros(x.shape[:-1] + (1, 1, 1)),
    )


def test_euler_weak_order_one(root):
    n = 100_000
    keys = many_keys(root, n)
    bias = []
    for steps in (4, 8):
        (state, _), = euler_path(ou(), keys, 0.0, np.ones((n, 1)), [1.0], steps)
        bias.append(np.exp(-1.0) - state[:, 0].mean())
    assert bias[0] > 0 and bias[1] > 0
    assert 1.5 <= bias[0] / bias[1] <= 3.0


def test_path_outputs_and_counters(root):
    keys = many_keys(root, 4)
    x = np.zeros((4, 2))
    out = euler_path(constant_coefficients(2), keys, 0.0, x, [0.25, 0.5, 1.0], 2)
    assert len(out) == 3
    ledger = rnd.CostLedger()
    exact_brownian_path(keys, 0.0, x, [0.0, 0.5], ledger)
    assert ledger.normals == 4 * 2  # the zero-length segment draws nothing


def test_singular_diffusion_rejected(root):
    coeffs = CoefficientSet(
        mu=lambda t, x: np.zeros_like(x),
        sigma=lambda t, x: np.zeros(x.shape[:-1] + (2, 2)),
        dmu=lambda t, x: np.zeros(x.shape[:-1] + (2, 2)),
        dsigma=lambda t, x: np.zeros(x.shape[:-1] + (2, 2, 2)),
    )
    with pytest.raises(SingularDiffusionError):
        euler_sample(coeffs, root, 0, 0.0, np.zeros(2), 1.0, 2)


def test_missing_jacobians(root):
    coeffs = CoefficientSet(mu=lambda t, x: x, sigma=lambda t, x: x[..., None])
    with pytest.raises(ValueError):
        euler_sample(coeffs, root, 0, 0.0, np.ones(1), 1.0, 2)


def test_steps_for_level():
    assert [steps_for_level(level, 4.0) for level in range(4)] == [1, 2, 4, 8]
    assert steps_for_level(0, 1.0) == 1
