import numpy as np
import pytest

from robustood.datasets import LabeledDataset
from robustood.models import (
    fit_ridge,
    init_random_feature_net,
    logistic_loss,
    logistic_second_derivative,
)
from robustood.sharpness import (
    SharpnessReport,
    diag_sharpness,
    estimate_n_prime,
    feature_layer_sharpness,
    hessian_trace_fd,
    rf_sharpness,
    ridge_sharpness,
)
from robustood.models import exp_loss, RandomFeatureNet, RidgeModel
from robustood.seeding import derive_rng


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------

def test_fd_trace_quadratic():
    dim = 5
    trace = hessian_trace_fd(lambda w: float(w @ w), np.ones(dim), h=1e-4)
    assert trace == pytest.approx(2 * dim, abs=1e-8 * 2 * dim)


def test_fd_trace_anisotropic():
    trace = hessian_trace_fd(lambda w: w[0] ** 2 + 3 * w[1] ** 2, np.array([0.3, -0.7]))
    assert trace == pytest.approx(8.0, rel=1e-8)


def test_fd_trace_linear():
    trace = hessian_trace_fd(lambda w: 4.0 * w[0] - w[1], np.zeros(2))
    assert abs(trace) <= 1e-8


def test_fd_trace_rejects_nonfinite():
    with pytest.raises(ValueError):
        hessian_trace_fd(lambda w: float("nan"), np.zeros(2))


# ---------------------------------------------------------------------------
# ridge sharpness
# ---------------------------------------------------------------------------

def test_ridge_sharpness_zero_theta():
    model = RidgeModel(theta_hat=np.zeros(3), beta=1.0, n_train=4)
    assert ridge_sharpness(model, np.ones((4, 3))).kappa == 0.0


def test_ridge_sharpness_hand_example():
    model = fit_ridge(np.eye(2), np.array([1.0, 1.0]), beta=0.0)
    report = ridge_sharpness(model, np.eye(2))
    assert report.kappa == pytest.approx(2.0)


def test_ridge_sharpness_conventions():
    X = derive_rng(0, "conv").standard_normal((10, 4))
    model = fit_ridge(X, X @ np.ones(4), beta=0.5)
    paper = ridge_sharpness(model, X, trace_convention="paper").kappa
    dimensional = ridge_sharpness(model, X, trace_convention="dimensional").kappa
    norm_sq = float(model.theta_hat @ model.theta_hat)
    assert dimensional - paper == pytest.approx(norm_sq * (4 - 1) * 0.5, rel=1e-12)
    with pytest.raises(ValueError):
        ridge_sharpness(model, X, trace_convention="banana")


def test_ridge_sharpness_matches_fd_oracle():
    rng = derive_rng(1, "ridge-fd")
    X = rng.standard_normal((8, 3))
    y = rng.standard_normal(8)
    beta = 0.3
    model = fit_ridge(X, y, beta)
    report = ridge_sharpness(model, X, trace_convention="dimensional")

    def loss_at(theta):
        return float(np.sum((X @ theta - y) ** 2) / (2 * len(y)) + beta * theta @ theta / 2)

    trace = hessian_trace_fd(loss_at, model.theta_hat)
    norm_sq = float(model.theta_hat @ model.theta_hat)
    assert report.kappa == pytest.approx(norm_sq * trace, rel=1e-6)


def test_ridge_sharpness_beta_monotone():
    rng = derive_rng(2, "beta-mono")
    X = rng.standard_normal((50, 100))
    y = X @ (rng.standard_normal(100) / 10.0)
    kappas = [ridge_sharpness(fit_ridge(X, y, b), X).kappa for b in (0.01, 0.1, 1.0, 2.0)]
    assert all(a > b for a, b in zip(kappas, kappas[1:]))


def test_ridge_sharpness_scaling_in_theta():
    X = derive_rng(3, "scale").standard_normal((6, 4))
    model = fit_ridge(X, X @ np.ones(4), beta=0.2)
    base = ridge_sharpness(model, X)
    scaled_model = RidgeModel(theta_hat=3.0 * model.theta_hat, beta=0.2, n_train=6)
    scaled = ridge_sharpness(scaled_model, X)
    assert scaled.kappa == pytest.approx(9.0 * base.kappa, rel=1e-12)
    assert np.allclose(scaled.per_sample_trace, base.per_sample_trace)


# ---------------------------------------------------------------------------
# random-feature sharpness
# ---------------------------------------------------------------------------

def test_rf_sharpness_zero_head():
    net = init_random_feature_net(d=4, m=8, seed=5)
    data = LabeledDataset(features=np.ones((3, 4)), labels=np.ones(3))
    report = rf_sharpness(net, data, np.full(3, 2.0))
    assert report.kappa == 0.0


def test_rf_sharpness_hand_example():
    # squared loss (2nd derivative 2), m=1, d=1, a=(1), x=(2), w=(3)
    net = RandomFeatureNet(A=np.array([[1.0]]), w=np.array([3.0]), d=1, m=1)
    data = LabeledDataset(features=np.array([[2.0]]), labels=np.array([1.0]))
    report = rf_sharpness(net, data, np.array([2.0]))
    assert report.kappa == pytest.approx(72.0)


def _rf_instance(seed, n=10, d=5, m=20, h=1e-4):
    """Random logistic instance, resampled until clear of ReLU kinks."""
    rng = derive_rng(seed, "rf-instance")
    while True:
        net = init_random_feature_net(d, m, int(rng.integers(2**31)))
        X = rng.standard_normal((n, d))
        if np.min(np.abs(X @ net.A)) > 10 * h:
            break
    labels = rng.integers(0, 2, n) * 2.0 - 1.0
    w = rng.standard_normal(m) / np.sqrt(m)
    from dataclasses import replace

    return replace(net, w=w), LabeledDataset(features=X, labels=labels)


def test_rf_sharpness_matches_fd_oracle():
    net, data = _rf_instance(seed=7)
    scores = net.predict_scores(data.features)
    report = rf_sharpness(net, data, logistic_second_derivative(scores))

    def loss_at(w):
        from dataclasses import replace

        f = replace(net, w=w).predict_scores(data.features)
        return float(logistic_loss(f, data.labels).mean())

    trace = hessian_trace_fd(loss_at, net.w)
    norm_sq = float(net.w @ net.w)
    assert report.kappa == pytest.approx(norm_sq * trace, rel=1e-4)


def test_rf_sharpness_nonnegative_for_convex_loss():
    rng = derive_rng(8, "nonneg")
    for _ in range(10):
        net, data = _rf_instance(int(rng.integers(2**31)), n=6, d=3, m=9)
        d2 = rng.uniform(0.0, 3.0, data.n)
        assert rf_sharpness(net, data, d2).kappa >= 0.0


# ---------------------------------------------------------------------------
# diagonal-net sharpness
# ---------------------------------------------------------------------------

def test_diag_sharpness_zero_theta():
    X = np.ones((3, 4))
    _, r = exp_loss(np.zeros(3), X)
    assert diag_sharpness(np.zeros(3), X, r).kappa == 0.0


def test_diag_sharpness_hand_example():
    # single sample x=(1,0), theta=(0,5): r=1, kappa = 25 * 1
    X = np.array([[1.0], [0.0]])
    theta = np.array([0.0, 5.0])
    _, r = exp_loss(theta, X)
    assert r[0] == pytest.approx(1.0)
    assert diag_sharpness(theta, X, r).kappa == pytest.approx(25.0)


def test_diag_sharpness_matches_fd_oracle():
    rng = derive_rng(9, "diag-fd")
    X = rng.standard_normal((3, 5))
    theta = rng.standard_normal(3) * 0.5
    _, r = exp_loss(theta, X)
    report = diag_sharpness(theta, X, r)

    def loss_at(th):
        return exp_loss(th, X)[0]

    trace = hessian_trace_fd(loss_at, theta)
    assert report.kappa == pytest.approx(float(theta @ theta) * trace, rel=1e-5)


# ---------------------------------------------------------------------------
# feature-layer sharpness
# ---------------------------------------------------------------------------

def test_feature_layer_sharpness_zero_features():
    assert feature_layer_sharpness(np.zeros((3, 2)), lambda F: float(np.sum(F**2))) == 0.0


def test_feature_layer_sharpness_single_feature():
    value = feature_layer_sharpness(np.array([[2.0]]), lambda F: float(F[0, 0] ** 2))
    assert value == pytest.approx(8.0, rel=1e-6)


def test_feature_layer_sharpness_matches_rf_on_relu_features():
    # Mapping: F = relu(X A); the loss field reapplies the frozen linear head.
    net, data = _rf_instance(seed=10, n=5, d=3, m=4)
    F = net.features(data.features)

    def loss_at_features(feats):
        scores = feats @ net.w / np.sqrt(net.d)
        return float(logistic_loss(scores, data.labels).mean())

    value = feature_layer_sharpness(F, loss_at_features)
    scores = net.predict_scores(data.features)
    # Head-space kappa = |w|^2 tr(H_w); the feature-layer formula swaps the
    # roles of head and features, which coincide for a frozen linear head.
    expected = rf_sharpness(net, data, logistic_second_derivative(scores)).kappa
    assert value == pytest.approx(expected, rel=1e-3)


def test_feature_layer_sharpness_rejects_nonfinite():
    with pytest.raises(ValueError):
        feature_layer_sharpness(np.array([[np.inf]]), lambda F: 0.0)


# ---------------------------------------------------------------------------
# n' estimation and report invariants
# ---------------------------------------------------------------------------

def test_estimate_n_prime_values():
    assert estimate_n_prime(np.ones(7)) == pytest.approx(1.0)
    assert estimate_n_prime(np.array([0.0, 0.0, 5.0])) == pytest.approx(3.0)
    assert estimate_n_prime(np.array([1.0, 1.0, 2.0])) == pytest.approx(1.5)


def test_estimate_n_prime_errors():
    with pytest.raises(ValueError):
        estimate_n_prime(np.zeros(3))
    with pytest.raises(ValueError):
        estimate_n_prime(np.array([1.0, -0.5]))
    with pytest.raises(ValueError):
        estimate_n_prime(np.array([]))


def test_estimate_n_prime_range():
    rng = derive_rng(11, "nprime")
    for _ in range(100):
        n = int(rng.integers(1, 30))
        trace = rng.uniform(0.0, 1.0, n)
        trace[int(rng.integers(n))] += 0.1  # ensure not all zero
        value = estimate_n_prime(trace)
        assert 1.0 - 1e-12 <= value <= n + 1e-12


def test_sharpness_report_self_consistency():
    with pytest.raises(ValueError):
        SharpnessReport(
            kappa=5.0, per_sample_trace=np.array([1.0, 1.0]), n_prime_hat=1.0, param_sq_norm=1.0
        )
    report = SharpnessReport(
        kappa=2.0, per_sample_trace=np.array([1.0, 1.0]), n_prime_hat=1.0, param_sq_norm=1.0
    )
    payload = report.to_json_dict()
    assert payload["kappa"] == 2.0
    assert payload["per_sample_trace"] == [1.0, 1.0]
