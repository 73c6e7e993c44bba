"""The three analytic model families and their trainers.

* closed-form ridge regression,
* random-feature ReLU networks (frozen sphere directions, trainable linear
  head) fit by full-batch gradient descent on logistic loss,
* depth-2 diagonal linear networks trained by gradient descent on
  exponential loss (labels pre-folded into the design, all +1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.special

from .datasets import LabeledDataset, sample_sphere
from .seeding import derive_rng

EXP_OVERFLOW_LIMIT = 700.0


class SingularSystemError(ValueError):
    """Raised when an unregularized ridge system is rank-deficient."""


class DivergedLossError(RuntimeError):
    """Raised when a training loss becomes non-finite."""


# ---------------------------------------------------------------------------
# Ridge regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RidgeModel:
    theta_hat: np.ndarray
    beta: float
    n_train: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.theta_hat


def fit_ridge(X: np.ndarray, y: np.ndarray, beta: float) -> RidgeModel:
    """Exact minimizer of ``|X theta - y|^2 / (2n) + beta |theta|^2 / 2``.

    Solves the normal equations ``(X'X + n beta I) theta = X'y`` with a
    symmetric positive-definite factorization.  ``beta = 0`` is allowed only
    when ``X'X`` is numerically invertible; no silent pseudo-inverse.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a nonempty matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("y length must match rows of X")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    n = X.shape[0]
    gram = X.T @ X + n * beta * np.eye(X.shape[1])
    rhs = X.T @ y
    try:
        chol = scipy.linalg.cho_factor(gram, check_finite=False)
        theta = scipy.linalg.cho_solve(chol, rhs, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "X'X + n*beta*I is not positive definite; supply beta > 0 or a full-rank design"
        ) from exc
    denom = np.linalg.norm(rhs)
    if denom > 0:
        residual = np.linalg.norm(gram @ theta - rhs) / denom
        if not residual <= 1e-8:
            raise SingularSystemError(
                f"normal-equation residual {residual:.3e} exceeds 1e-8; system is ill-conditioned"
            )
    return RidgeModel(theta_hat=theta, beta=float(beta), n_train=n)


# ---------------------------------------------------------------------------
# Random-feature ReLU network
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomFeatureNet:
    """Frozen directions ``A`` (columns on the radius-sqrt(d) sphere) and head ``w``."""

    A: np.ndarray  # d x m
    w: np.ndarray  # m
    d: int
    m: int
    seed: int | None = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        w = np.asarray(self.w, dtype=np.float64)
        if A.shape != (self.d, self.m) or w.shape != (self.m,):
            raise ValueError("parameter shapes are inconsistent with (d, m)")
        norms = np.linalg.norm(A, axis=0)
        if norms.size and np.max(np.abs(norms - np.sqrt(self.d))) > 1e-9:
            raise ValueError("every column of A must have norm sqrt(d)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "w", w)

    def features(self, X: np.ndarray) -> np.ndarray:
        """ReLU layer outputs, one row per sample."""
        return np.maximum(np.asarray(X, dtype=np.float64) @ self.A, 0.0)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return self.features(X) @ self.w / np.sqrt(self.d)

    def predict_signs(self, X: np.ndarray) -> np.ndarray:
        scores = self.predict_scores(X)
        return np.where(scores >= 0.0, 1.0, -1.0)


def rf_forward(net: RandomFeatureNet, x: np.ndarray) -> float:
    """Scalar output ``(1/sqrt(d)) sum_i w_i relu(a_i' x)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.d,):
        raise ValueError("input dimension mismatch")
    return float(net.w @ np.maximum(net.A.T @ x, 0.0) / np.sqrt(net.d))


def init_random_feature_net(d: int, m: int, seed: int) -> RandomFeatureNet:
    """Draw the frozen direction matrix; the head starts at zero."""
    rng = derive_rng(seed, "rf-directions")
    cols = [sample_sphere(d, np.sqrt(d), rng) for _ in range(m)]
    return RandomFeatureNet(A=np.column_stack(cols), w=np.zeros(m), d=d, m=m, seed=seed)


def logistic_loss(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-sample ``log(1 + exp(-y f))`` evaluated stably."""
    margin = labels * scores
    return np.logaddexp(0.0, -margin)


def logistic_second_derivative(scores: np.ndarray) -> np.ndarray:
    """``d^2/df^2 log(1+exp(-y f)) = sigma(f)(1 - sigma(f))`` (label-free)."""
    p = scipy.special.expit(scores)
    return p * (1.0 - p)


def train_rf_logistic(
    data: LabeledDataset,
    m: int,
    steps: int,
    lr: float,
    l2: float,
    seed: int,
) -> RandomFeatureNet:
    """Full-batch gradient descent on mean logistic loss plus ``l2/2 |w|^2``.

    The direction matrix is drawn once from the seed and frozen; only the
    head moves.  Raises :class:`DivergedLossError` if the loss leaves the
    finite range.
    """
    if not np.all(np.isin(data.labels, (-1.0, 1.0))):
        raise ValueError("labels must be +-1 for logistic training")
    net = init_random_feature_net(data.dim, m, seed)
    phi = net.features(data.features) / np.sqrt(net.d)  # n x m
    y = data.labels
    w = net.w.copy()
    n = data.n
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            scores = phi @ w
            margin = y * scores
            if not np.all(np.isfinite(margin)):
                raise DivergedLossError("logistic training diverged")
            # grad of mean log(1+exp(-y f)) wrt w, plus the ridge pull
            sig = scipy.special.expit(-margin)
            grad = -(phi.T @ (y * sig)) / n + l2 * w
            w = w - lr * grad
    if not np.all(np.isfinite(w)):
        raise DivergedLossError("logistic training diverged")
    return replace(net, w=w)


# ---------------------------------------------------------------------------
# Diagonal linear network under exponential loss
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalNetState:
    u_plus: np.ndarray
    u_minus: np.ndarray
    alpha_init: float
    t: int = 0

    def __post_init__(self):
        up = np.asarray(self.u_plus, dtype=np.float64)
        um = np.asarray(self.u_minus, dtype=np.float64)
        if up.shape != um.shape or up.ndim != 1:
            raise ValueError("u_plus and u_minus must be vectors of equal length")
        if not (np.all(np.isfinite(up)) and np.all(np.isfinite(um))):
            raise ValueError("parameters must be finite")
        if self.alpha_init <= 0:
            raise ValueError("alpha_init must be positive")
        object.__setattr__(self, "u_plus", up)
        object.__setattr__(self, "u_minus", um)


def init_diagonal_net(d: int, alpha_init: float) -> DiagonalNetState:
    """Balanced start ``u_plus = u_minus = alpha * 1`` so the predictor is zero."""
    ones = np.full(d, float(alpha_init))
    return DiagonalNetState(u_plus=ones, u_minus=ones.copy(), alpha_init=float(alpha_init), t=0)


def diag_theta(state: DiagonalNetState) -> np.ndarray:
    """Effective linear predictor ``u_plus^2 - u_minus^2`` (elementwise)."""
    return state.u_plus**2 - state.u_minus**2


def exp_loss(theta: np.ndarray, X: np.ndarray) -> tuple[float, np.ndarray]:
    """Exponential loss of ``theta`` on column-sample design ``X`` (d x n).

    Labels are assumed folded into the columns (``x_i <- y_i x_i``).  Returns
    ``(loss, r)`` with ``r_i = exp(-x_i' theta) / n`` and ``loss = sum r``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != theta.size:
        raise ValueError("X must be d x n with d matching theta")
    exponents = -(X.T @ theta)
    if np.any(exponents > EXP_OVERFLOW_LIMIT):
        raise OverflowError("exponential-loss exponent exceeded 700")
    r = np.exp(exponents) / X.shape[1]
    return float(r.sum()), r


def diag_step(state: DiagonalNetState, X: np.ndarray, lr: float) -> DiagonalNetState:
    """One full-batch gradient-descent step taken directly in u-space."""
    if lr <= 0:
        raise ValueError("lr must be positive")
    _, r = exp_loss(diag_theta(state), X)
    xr = np.asarray(X, dtype=np.float64) @ r
    # dL/du+ = -2 u+ o (X r),  dL/du- = +2 u- o (X r)
    u_plus = state.u_plus + 2.0 * lr * state.u_plus * xr
    u_minus = state.u_minus - 2.0 * lr * state.u_minus * xr
    return DiagonalNetState(
        u_plus=u_plus, u_minus=u_minus, alpha_init=state.alpha_init, t=state.t + 1
    )


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def model_to_json(model) -> str:
    """Serialize any of the three model kinds to a JSON string."""
    if isinstance(model, RidgeModel):
        payload = {
            "kind": "ridge",
            "beta": model.beta,
            "theta_hat": model.theta_hat.tolist(),
            "n_train": model.n_train,
        }
    elif isinstance(model, RandomFeatureNet):
        payload = {
            "kind": "random_feature",
            "d": model.d,
            "m": model.m,
            "A": model.A.ravel().tolist(),
            "w": model.w.tolist(),
            "seed": model.seed,
        }
    elif isinstance(model, DiagonalNetState):
        payload = {
            "kind": "diagonal",
            "alpha_init": model.alpha_init,
            "u_plus": model.u_plus.tolist(),
            "u_minus": model.u_minus.tolist(),
            "t": model.t,
        }
    else:
        raise TypeError(f"unsupported model type: {type(model)!r}")
    return json.dumps(payload, sort_keys=True)


def model_from_json(text: str):
    payload = json.loads(text)
    kind = payload.get("kind")
    if kind == "ridge":
        return RidgeModel(
            theta_hat=np.asarray(payload["theta_hat"], dtype=np.float64),
            beta=float(payload["beta"]),
            n_train=int(payload["n_train"]),
        )
    if kind == "random_feature":
        d, m = int(payload["d"]), int(payload["m"])
        return RandomFeatureNet(
            A=np.asarray(payload["A"], dtype=np.float64).reshape(d, m),
            w=np.asarray(payload["w"], dtype=np.float64),
            d=d,
            m=m,
            seed=payload.get("seed"),
        )
    if kind == "diagonal":
        return DiagonalNetState(
            u_plus=np.asarray(payload["u_plus"], dtype=np.float64),
            u_minus=np.asarray(payload["u_minus"], dtype=np.float64),
            alpha_init=float(payload["alpha_init"]),
            t=int(payload["t"]),
        )
    raise ValueError(f"unknown model kind: {kind!r}")
