import numpy as np
import pytest

from robustood.datasets import (
    LabeledDataset,
    ShiftBasis,
    SpuriousConfig,
    dataset_from_csv,
    dataset_to_csv,
    gen_linear_regression,
    gen_spurious,
    random_shift_basis,
    rotate_theta,
    sample_sphere,
    worst_group_error,
)
from robustood.seeding import derive_rng


def test_spurious_config_validation():
    with pytest.raises(ValueError):
        SpuriousConfig(n=0, d=10, p_maj=0.9, sigma_core=1, sigma_spu=1, seed=0)
    with pytest.raises(ValueError):
        SpuriousConfig(n=10, d=0, p_maj=0.9, sigma_core=1, sigma_spu=1, seed=0)
    with pytest.raises(ValueError):
        SpuriousConfig(n=10, d=10, p_maj=1.5, sigma_core=1, sigma_spu=1, seed=0)
    with pytest.raises(ValueError):
        SpuriousConfig(n=10, d=10, p_maj=0.5, sigma_core=0, sigma_spu=1, seed=0)


def test_gen_spurious_shapes_and_groups():
    cfg = SpuriousConfig(n=500, d=100, p_maj=0.9, sigma_core=10, sigma_spu=1, seed=7)
    data = gen_spurious(cfg)
    assert data.features.shape == (500, 200)
    assert set(np.unique(data.labels)) <= {-1.0, 1.0}
    assert data.groups is not None
    # group ids encode (sign(y), sign(a)): 0=(+,+) 1=(+,-) 2=(-,+) 3=(-,-)
    counts = np.bincount(data.groups, minlength=4)
    assert counts.sum() == 500
    majority = counts[0] + counts[3]
    assert majority > 400  # expectation 450 at p_maj=0.9


def test_gen_spurious_majority_fraction_p_half():
    # Replay the generator's own Bernoulli draws to predict the exact counts.
    cfg = SpuriousConfig(n=400, d=5, p_maj=0.5, sigma_core=1, sigma_spu=1, seed=3)
    data = gen_spurious(cfg)
    rng = derive_rng(3, "spurious")
    rng.integers(0, 2, size=400)  # label draw
    agree = rng.random(400) < 0.5
    majority = int(np.sum(data.groups == 0) + np.sum(data.groups == 3))
    assert majority == int(agree.sum())


def test_gen_spurious_majority_fraction_converges():
    cfg = SpuriousConfig(n=10**5, d=2, p_maj=0.9, sigma_core=1, sigma_spu=1, seed=11)
    data = gen_spurious(cfg)
    frac = float(np.mean((data.groups == 0) | (data.groups == 3)))
    band = 4 * np.sqrt(0.9 * 0.1 / 10**5)
    assert abs(frac - 0.9) <= band


def test_gen_spurious_group_means():
    cfg = SpuriousConfig(n=2000, d=4, p_maj=0.8, sigma_core=0.1, sigma_spu=0.1, seed=5)
    data = gen_spurious(cfg)
    y_pos = data.labels > 0
    assert np.allclose(data.features[y_pos, :4].mean(axis=0), 1.0, atol=0.05)
    minority_pos = (data.groups == 1)  # y=+1, a=-1
    assert np.allclose(data.features[minority_pos, 4:].mean(axis=0), -1.0, atol=0.1)


def test_gen_spurious_deterministic():
    cfg = SpuriousConfig(n=50, d=3, p_maj=0.7, sigma_core=2, sigma_spu=1, seed=42)
    a, b = gen_spurious(cfg), gen_spurious(cfg)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.groups, b.groups)


def test_shift_basis_orthonormal():
    basis = random_shift_basis(64, seed=1)
    assert abs(np.linalg.norm(basis.theta0) - 1) <= 1e-12
    assert abs(np.linalg.norm(basis.theta_perp) - 1) <= 1e-12
    assert abs(basis.theta0 @ basis.theta_perp) <= 1e-12


def test_shift_basis_rejects_bad_pairs():
    v = np.zeros(4)
    v[0] = 1.0
    with pytest.raises(ValueError):
        ShiftBasis(theta0=v, theta_perp=v)  # not orthogonal
    with pytest.raises(ValueError):
        ShiftBasis(theta0=2 * v, theta_perp=v)  # not unit


def test_rotate_theta_endpoints():
    basis = random_shift_basis(16, seed=2)
    assert np.allclose(rotate_theta(basis, 0.0), basis.theta0)
    assert np.allclose(rotate_theta(basis, np.pi / 2), basis.theta_perp)


@pytest.mark.parametrize("alpha", [0.3, 1.7, 3.0])
def test_rotate_theta_unit_norm(alpha):
    basis = random_shift_basis(32, seed=4)
    assert abs(np.linalg.norm(rotate_theta(basis, alpha)) - 1) <= 1e-12


def test_rotate_theta_periodic():
    basis = random_shift_basis(8, seed=9)
    for alpha in (0.0, 0.5, 2.0):
        delta = rotate_theta(basis, alpha) - rotate_theta(basis, alpha + 2 * np.pi)
        assert np.max(np.abs(delta)) <= 1e-12


def test_gen_linear_regression_exact_labels():
    theta = derive_rng(0, "t").standard_normal(12)
    data = gen_linear_regression(theta, n=30, seed=5)
    assert np.array_equal(data.labels, data.features @ theta)
    assert data.groups is None


def test_gen_linear_regression_zero_map():
    data = gen_linear_regression(np.zeros(6), n=10, seed=5)
    assert np.all(data.labels == 0.0)


def test_gen_linear_regression_deterministic():
    theta = np.ones(4)
    a = gen_linear_regression(theta, n=8, seed=123)
    b = gen_linear_regression(theta, n=8, seed=123)
    assert np.array_equal(a.features, b.features)


def test_worst_group_error_perfect_and_total():
    data = LabeledDataset(
        features=np.zeros((8, 2)),
        labels=np.array([1, 1, 1, 1, -1, -1, -1, -1], dtype=float),
        groups=np.array([0, 0, 1, 1, 2, 2, 3, 3]),
    )
    assert worst_group_error(data.labels.copy(), data) == 0.0
    preds = data.labels.copy()
    preds[data.groups == 3] *= -1
    assert worst_group_error(preds, data) == 1.0


def test_worst_group_error_hand_patterns():
    labels = np.array([1, 1, 1, 1, -1, -1, -1, -1], dtype=float)
    groups = np.array([0, 0, 1, 1, 2, 2, 3, 3])
    data = LabeledDataset(features=np.zeros((8, 2)), labels=labels, groups=groups)
    # one wrong in group 1, both wrong in group 3 -> max(0, 0.5, 0, 1) = 1
    preds = labels.copy()
    preds[2] *= -1
    preds[6] *= -1
    preds[7] *= -1
    assert worst_group_error(preds, data) == 1.0
    # one wrong in groups 1 and 3 -> 0.5
    preds = labels.copy()
    preds[2] *= -1
    preds[6] *= -1
    assert worst_group_error(preds, data) == 0.5


def test_worst_group_error_dominates_mean_error():
    rng = derive_rng(17, "wge")
    for _ in range(50):
        n = int(rng.integers(4, 40))
        labels = rng.integers(0, 2, n) * 2.0 - 1.0
        groups = rng.integers(0, 4, n)
        preds = rng.integers(0, 2, n) * 2.0 - 1.0
        data = LabeledDataset(features=np.zeros((n, 1)), labels=labels, groups=groups)
        assert worst_group_error(preds, data) >= np.mean(preds != labels) - 1e-12


def test_worst_group_error_requires_groups():
    data = gen_linear_regression(np.ones(3), n=5, seed=0)
    with pytest.raises(ValueError):
        worst_group_error(np.ones(5), data)


def test_sample_sphere_norm_and_1d():
    v = sample_sphere(20, 3.5, seed=0)
    assert abs(np.linalg.norm(v) - 3.5) <= 1e-12
    w = sample_sphere(1, 2.0, seed=1)
    assert w[0] in (2.0, -2.0)


def test_sample_sphere_mean_concentrates():
    d, radius, n = 100, 2.0, 10**4
    rng = derive_rng(6, "sphere-mc")
    draws = np.stack([sample_sphere(d, radius, rng) for _ in range(n)])
    mean_norm = np.linalg.norm(draws.mean(axis=0))
    assert mean_norm <= 0.05 * radius * np.sqrt(d) / np.sqrt(n) * 3


def test_dataset_csv_roundtrip(tmp_path):
    cfg = SpuriousConfig(n=20, d=3, p_maj=0.6, sigma_core=1, sigma_spu=2, seed=8)
    data = gen_spurious(cfg)
    path = tmp_path / "data.csv"
    dataset_to_csv(data, path)
    header = path.read_text().splitlines()[0]
    assert header == ",".join([f"x{j}" for j in range(6)] + ["y", "group"])
    back = dataset_from_csv(path)
    assert np.array_equal(back.features, data.features)
    assert np.array_equal(back.labels, data.labels)
    assert np.array_equal(back.groups, data.groups)


def test_dataset_csv_no_groups(tmp_path):
    data = gen_linear_regression(np.ones(2), n=5, seed=3)
    path = tmp_path / "reg.csv"
    dataset_to_csv(data, path)
    assert path.read_text().splitlines()[0] == "x0,x1,y"
    back = dataset_from_csv(path)
    assert back.groups is None
    assert np.array_equal(back.features, data.features)


def test_labeled_dataset_validation():
    with pytest.raises(ValueError):
        LabeledDataset(features=np.zeros((3, 2)), labels=np.zeros(4))
    with pytest.raises(ValueError):
        LabeledDataset(features=np.zeros((3, 2)), labels=np.zeros(3), groups=np.array([0, 1, 7]))
