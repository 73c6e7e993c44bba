"""Synthetic source/target distributions and prediction scoring.

Two generators are provided: a spurious-correlation classification benchmark
(a strong-noise core block plus a low-noise spurious block whose sign agrees
with the label with probability ``p_maj``) and a noiseless linear-regression
family whose ground-truth direction can be rotated to simulate distribution
shift.  Scoring includes worst-group 0-1 error over the four (label,
attribute) groups.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .seeding import derive_rng

N_GROUPS = 4

# (sign(y), sign(a)) -> group id; order is fixed so CSV columns stay stable.
#   (+,+)=0  (+,-)=1  (-,+)=2  (-,-)=3
def _group_index(y: np.ndarray, a: np.ndarray) -> np.ndarray:
    return 2 * (y < 0).astype(np.int64) + (a < 0).astype(np.int64)


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable (features, labels, optional groups) triple.

    ``labels`` are +-1 for classification and arbitrary reals for regression.
    ``groups``, when present, holds integers in ``{0, 1, 2, 3}``.
    """

    features: np.ndarray
    labels: np.ndarray
    groups: np.ndarray | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.float64)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise ValueError("labels length must match feature rows")
        groups = self.groups
        if groups is not None:
            groups = np.asarray(groups, dtype=np.int64)
            if groups.shape != labels.shape:
                raise ValueError("groups length must match feature rows")
            if groups.size and (groups.min() < 0 or groups.max() >= N_GROUPS):
                raise ValueError("group labels must lie in {0,1,2,3}")
            groups.setflags(write=False)
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "groups", groups)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SpuriousConfig:
    """Parameters of the spurious-correlation generator."""

    n: int
    d: int  # half-dimension: core and spurious blocks are d wide each
    p_maj: float
    sigma_core: float
    sigma_spu: float
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")
        if not 0.0 <= self.p_maj <= 1.0:
            raise ValueError("p_maj must lie in [0, 1]")
        if self.sigma_core <= 0 or self.sigma_spu <= 0:
            raise ValueError("noise levels must be positive")


@dataclass(frozen=True)
class ShiftBasis:
    """Orthonormal pair spanning the plane in which the ground truth rotates."""

    theta0: np.ndarray
    theta_perp: np.ndarray

    def __post_init__(self):
        t0 = np.asarray(self.theta0, dtype=np.float64)
        tp = np.asarray(self.theta_perp, dtype=np.float64)
        if abs(np.linalg.norm(t0) - 1.0) > 1e-12 or abs(np.linalg.norm(tp) - 1.0) > 1e-12:
            raise ValueError("basis vectors must be unit norm")
        if abs(float(t0 @ tp)) > 1e-12:
            raise ValueError("basis vectors must be orthogonal")
        t0.setflags(write=False)
        tp.setflags(write=False)
        object.__setattr__(self, "theta0", t0)
        object.__setattr__(self, "theta_perp", tp)


def random_shift_basis(d: int, seed: int) -> ShiftBasis:
    """Draw a random unit vector and a random perpendicular unit vector."""
    rng = derive_rng(seed, "shift-basis")
    t0 = rng.standard_normal(d)
    t0 /= np.linalg.norm(t0)
    v = rng.standard_normal(d)
    v -= (v @ t0) * t0
    tp = v / np.linalg.norm(v)
    # One Gram-Schmidt pass leaves O(eps) overlap; polish to meet the 1e-12 gate.
    tp -= (tp @ t0) * t0
    tp /= np.linalg.norm(tp)
    return ShiftBasis(theta0=t0, theta_perp=tp)


def rotate_theta(basis: ShiftBasis, alpha: float) -> np.ndarray:
    """Rotate the ground truth by ``alpha`` radians inside the basis plane."""
    return basis.theta0 * np.cos(alpha) + basis.theta_perp * np.sin(alpha)


def gen_spurious(cfg: SpuriousConfig) -> LabeledDataset:
    """Sample the two-block spurious-correlation dataset.

    Features are ``[x_core, x_spu]`` with ``x_core ~ N(y*1, sigma_core^2 I)``
    and ``x_spu ~ N(a*1, sigma_spu^2 I)`` where the attribute ``a`` equals the
    label with probability ``p_maj``.  Groups encode the (y, a) sign pair.
    """
    rng = derive_rng(cfg.seed, "spurious")
    y = rng.integers(0, 2, size=cfg.n) * 2 - 1
    agree = rng.random(cfg.n) < cfg.p_maj
    a = np.where(agree, y, -y)
    x_core = y[:, None] + cfg.sigma_core * rng.standard_normal((cfg.n, cfg.d))
    x_spu = a[:, None] + cfg.sigma_spu * rng.standard_normal((cfg.n, cfg.d))
    features = np.hstack([x_core, x_spu])
    return LabeledDataset(
        features=features,
        labels=y.astype(np.float64),
        groups=_group_index(y, a),
    )


def gen_linear_regression(theta_star: np.ndarray, n: int, seed: int) -> LabeledDataset:
    """Gaussian design with exact noiseless labels ``y = X theta_star``."""
    theta_star = np.asarray(theta_star, dtype=np.float64)
    if theta_star.ndim != 1 or theta_star.size < 1:
        raise ValueError("theta_star must be a nonempty vector")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = derive_rng(seed, "linreg")
    X = rng.standard_normal((n, theta_star.size))
    return LabeledDataset(features=X, labels=X @ theta_star)


def worst_group_error(preds: np.ndarray, data: LabeledDataset) -> float:
    """Maximum mean 0-1 error over the four (y, a) groups; empty groups skipped."""
    if data.groups is None:
        raise ValueError("dataset carries no group labels")
    preds = np.asarray(preds, dtype=np.float64)
    if preds.shape != data.labels.shape:
        raise ValueError("predictions length must match dataset size")
    wrong = preds != data.labels
    errors = []
    for g in range(N_GROUPS):
        mask = data.groups == g
        if mask.any():
            errors.append(float(wrong[mask].mean()))
    if not errors:
        raise ValueError("all groups are empty")
    return max(errors)


def sample_sphere(d: int, radius: float, seed: int | np.random.Generator) -> np.ndarray:
    """Uniform draw from the radius-``radius`` sphere in ``d`` dimensions."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(seed, "sphere")
    while True:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm > 0.0:  # measure-zero retry
            return v * (radius / norm)


def dataset_to_csv(data: LabeledDataset, path) -> None:
    """Write ``x0..x{p-1},y[,group]`` rows; the group column is optional."""
    header = [f"x{j}" for j in range(data.dim)] + ["y"]
    if data.groups is not None:
        header.append("group")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(data.n):
            row = [repr(float(v)) for v in data.features[i]] + [repr(float(data.labels[i]))]
            if data.groups is not None:
                row.append(str(int(data.groups[i])))
            writer.writerow(row)


def dataset_from_csv(path) -> LabeledDataset:
    """Inverse of :func:`dataset_to_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        has_group = header[-1] == "group"
        p = len(header) - (2 if has_group else 1)
        feats, labels, groups = [], [], []
        for row in reader:
            feats.append([float(v) for v in row[:p]])
            labels.append(float(row[p]))
            if has_group:
                groups.append(int(row[p + 1]))
    return LabeledDataset(
        features=np.asarray(feats, dtype=np.float64).reshape(len(labels), p),
        labels=np.asarray(labels),
        groups=np.asarray(groups, dtype=np.int64) if has_group else None,
    )
