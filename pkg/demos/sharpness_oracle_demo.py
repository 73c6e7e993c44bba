"""Analytic sharpness versus the finite-difference trace oracle.

Each model family's closed-form kappa is checked against
|params|^2 * (central-difference Hessian trace), and the feature-layer
variant is shown to agree with the head-space formula for a frozen
linear head.
"""

from dataclasses import replace

import numpy as np

from robustood import fit_ridge, init_random_feature_net
from robustood.datasets import LabeledDataset
from robustood.models import exp_loss, logistic_loss, logistic_second_derivative
from robustood.sharpness import (
    diag_sharpness,
    estimate_n_prime,
    feature_layer_sharpness,
    hessian_trace_fd,
    rf_sharpness,
    ridge_sharpness,
)
from robustood.seeding import derive_rng

rng = derive_rng(0, "oracle-demo")

# ridge: trace is exact for quadratics
X = rng.standard_normal((12, 6))
y = rng.standard_normal(12)
model = fit_ridge(X, y, beta=0.3)
analytic = ridge_sharpness(model, X, trace_convention="dimensional")
fd = hessian_trace_fd(
    lambda th: float(np.sum((X @ th - y) ** 2) / 24 + 0.15 * th @ th), model.theta_hat
)
print(f"ridge   analytic {analytic.kappa:.6f}  oracle {float(model.theta_hat @ model.theta_hat) * fd:.6f}")

# random-feature logistic head
net = replace(init_random_feature_net(d=5, m=12, seed=1), w=rng.standard_normal(12) / 4)
data = LabeledDataset(features=rng.standard_normal((8, 5)), labels=rng.integers(0, 2, 8) * 2.0 - 1.0)
scores = net.predict_scores(data.features)
analytic = rf_sharpness(net, data, logistic_second_derivative(scores))


def head_loss(w):
    f = replace(net, w=w).predict_scores(data.features)
    return float(logistic_loss(f, data.labels).mean())


fd = hessian_trace_fd(head_loss, net.w)
print(f"rf      analytic {analytic.kappa:.6f}  oracle {float(net.w @ net.w) * fd:.6f}")
print(f"        per-sample trace concentration n' = {estimate_n_prime(analytic.per_sample_trace):.3f}")

# the feature-layer formula collapses to the same number for a frozen head
F = net.features(data.features)


def loss_at_features(feats):
    f = feats @ net.w / np.sqrt(net.d)
    return float(logistic_loss(f, data.labels).mean())


print(f"feature-layer variant {feature_layer_sharpness(F, loss_at_features):.6f}")

# diagonal net under exp-loss
Xd = rng.standard_normal((4, 9))
theta = rng.standard_normal(4) / 2
_, r = exp_loss(theta, Xd)
analytic = diag_sharpness(theta, Xd, r)
fd = hessian_trace_fd(lambda th: exp_loss(th, Xd)[0], theta)
print(f"diag    analytic {analytic.kappa:.6f}  oracle {float(theta @ theta) * fd:.6f}")
