import math

import numpy as np
import pytest

from robustood.bounds import (
    BOUND_CSV_HEADER,
    BoundReport,
    GaussianHeadPosterior,
    concentration_term,
    default_posterior_scale,
    empirical_dis_rho,
    pacbayes_dis_bound,
    proxy_a_distance,
    robust_ood_bound,
    sharpness_robustness_rhs,
    success_probability,
    zhao_bound,
)
from robustood.datasets import SpuriousConfig, gen_spurious
from robustood.models import train_rf_logistic
from robustood.seeding import derive_rng

# High-precision reference values (40-digit evaluation of the closed forms).
CONCENTRATION_K1000_N500 = 5.0086024158946907618
ZHAO_T1_D100_N500 = 1.0216531529700479272
ZHAO_T2_N500 = 0.060736146190830516859
ZHAO_T3_D100_N500 = 6.6595689528523722122
PACBAYES_BASE_ALPHA1 = 1.1565176427496656518
PACBAYES_PINNED = 1.9186882951300174114


# ---------------------------------------------------------------------------
# concentration term
# ---------------------------------------------------------------------------

def test_concentration_term_pinned_value():
    assert concentration_term(1.0, 1000, 500, 0.05) == pytest.approx(
        CONCENTRATION_K1000_N500, rel=1e-12
    )


def test_concentration_term_linear_in_M():
    base = concentration_term(1.0, 200, 100, 0.1)
    assert concentration_term(2.0, 200, 100, 0.1) == pytest.approx(2 * base, rel=1e-12)


def test_concentration_term_model_size_free():
    # same inputs, same output: no model-size parameter exists to vary
    values = {concentration_term(1.0, 1000, 500, 0.05) for _ in range(5)}
    assert len(values) == 1


def test_concentration_term_domain_errors():
    with pytest.raises(ValueError):
        concentration_term(0.0, 10, 10, 0.05)
    with pytest.raises(ValueError):
        concentration_term(1.0, 0, 10, 0.05)
    with pytest.raises(ValueError):
        concentration_term(1.0, 10, 0, 0.05)
    with pytest.raises(ValueError):
        concentration_term(1.0, 10, 10, 1.5)


# ---------------------------------------------------------------------------
# robust bound assembly
# ---------------------------------------------------------------------------

def test_robust_ood_bound_no_shift():
    report = robust_ood_bound(0.4, M=1.0, dtv=0.0, epsilon=0.0, K=100, n=200, delta=0.1)
    assert report.total == pytest.approx(0.4 + report.concentration_term)
    assert report.distance_term == 0.0
    assert report.robustness_term == 0.0


def test_robust_ood_bound_linear_in_epsilon():
    a = robust_ood_bound(0.1, 1.0, 0.5, 0.2, 100, 200, 0.1)
    b = robust_ood_bound(0.1, 1.0, 0.5, 0.2 + 0.05, 100, 200, 0.1)
    assert b.total - a.total == pytest.approx(2 * 0.05, rel=1e-12)


def test_robust_ood_bound_exceeds_source_risk():
    rng = derive_rng(0, "rb")
    for _ in range(50):
        report = robust_ood_bound(
            float(rng.uniform(0, 2)),
            float(rng.uniform(0.1, 3)),
            float(rng.uniform(0, 2)),
            float(rng.uniform(0, 1)),
            int(rng.integers(1, 2000)),
            int(rng.integers(1, 1000)),
            float(rng.uniform(0.01, 0.5)),
        )
        assert report.total >= report.empirical_source_risk


def test_robust_ood_bound_vanishing_M_limit():
    eps = concentration_term(1e-12, 1000, 500, 0.05)
    assert eps <= 1e-10


def test_robust_ood_bound_validates_inputs():
    with pytest.raises(ValueError):
        robust_ood_bound(0.1, 1.0, 2.5, 0.0, 10, 10, 0.05)
    with pytest.raises(ValueError):
        robust_ood_bound(0.1, 1.0, 0.5, -0.1, 10, 10, 0.05)


def test_bound_report_invariants_and_csv():
    report = robust_ood_bound(0.25, 1.5, 0.4, 0.1, 64, 128, 0.05)
    row = report.csv_row()
    fields = row.split(",")
    assert BOUND_CSV_HEADER.startswith("method,")
    assert fields[0] == "robust"
    assert float(fields[1]) == 0.25
    assert float(fields[5]) == pytest.approx(report.total)
    with pytest.raises(ValueError):
        BoundReport(
            empirical_source_risk=0.1,
            distance_term=0.0,
            robustness_term=0.0,
            concentration_term=0.0,
            total=5.0,  # inconsistent
            method="robust",
        )
    with pytest.raises(ValueError):
        BoundReport(
            empirical_source_risk=-0.1,
            distance_term=0.0,
            robustness_term=0.0,
            concentration_term=0.0,
            total=-0.1,
            method="robust",
        )


# ---------------------------------------------------------------------------
# sharpness-substituted robustness
# ---------------------------------------------------------------------------

def test_sharpness_rhs_hand_value():
    value = sharpness_robustness_rhs(1.0, 1.0, 2.0, 10, 100, 3.0)
    assert value == pytest.approx(3.8166666666666667, rel=1e-12)


def test_sharpness_rhs_flat_floor():
    value = sharpness_robustness_rhs(1.0, 1.0, 2.0, 10, 100, 0.0)
    assert value == pytest.approx(0.5 * (4.0 / 3.0), rel=1e-12)


def test_sharpness_rhs_lipschitz_scaling():
    base = sharpness_robustness_rhs(1.0, 1.0, 2.0, 10, 100, 3.0)
    assert sharpness_robustness_rhs(1.0, 2.0, 2.0, 10, 100, 3.0) == pytest.approx(
        base / 4.0, rel=1e-12
    )


def test_sharpness_rhs_domain():
    with pytest.raises(ValueError):
        sharpness_robustness_rhs(0.0, 1.0, 1.0, 5, 10, 1.0)
    with pytest.raises(ValueError):
        sharpness_robustness_rhs(1.0, 1.0, 1.0, 5, 0, 1.0)


# ---------------------------------------------------------------------------
# success probability
# ---------------------------------------------------------------------------

def test_success_probability_hand_values():
    assert success_probability(2, 4.0) == pytest.approx(2.0 / 3.0, rel=1e-12)
    for d in (1, 2, 3, 17):
        assert success_probability(d, 1.0) == 0.0


def test_success_probability_monotone_in_R_d2():
    values = [success_probability(2, R) for R in (1.0, 2.0, 4.0, 16.0)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_success_probability_range_grid():
    for d in range(1, 101):
        for R in (1.0, 10.0, 100.0, 1e4):
            p = success_probability(d, R)
            assert 0.0 <= p <= 1.0


def test_success_probability_range_extreme_grid():
    for d in (1, 2, 3, 10, 100, 1000, 10**4):
        for R in (1.0, 10.0, 1e4, 1e6, 1e8):
            p = success_probability(d, R)
            assert 0.0 <= p <= 1.0


def test_success_probability_domain():
    with pytest.raises(ValueError):
        success_probability(2, 0.5)
    with pytest.raises(ValueError):
        success_probability(0, 2.0)


def test_success_probability_skips_degenerate_branch():
    # d <= 2 must use the arccos branch only; R huge would otherwise make the
    # second branch the minimum.
    assert success_probability(1, 1e8) == pytest.approx(
        (2 / math.pi) * math.acos(1e-4), rel=1e-9
    )


# ---------------------------------------------------------------------------
# pseudo-dimension baseline
# ---------------------------------------------------------------------------

def test_zhao_bound_pinned_terms():
    report = zhao_bound(0.0, 0.0, 100, 500, 0.05)
    expected = ZHAO_T1_D100_N500 + ZHAO_T2_N500 + ZHAO_T3_D100_N500
    assert report.concentration_term == pytest.approx(expected, rel=1e-12)
    assert report.distance_term == 0.0
    assert report.total == pytest.approx(expected, rel=1e-12)


def test_zhao_bound_distance_halved():
    report = zhao_bound(0.0, 0.8, 100, 500, 0.05)
    assert report.distance_term == pytest.approx(0.4)


def test_zhao_bound_grows_with_capacity():
    lo = zhao_bound(0.0, 0.0, 101, 500, 0.05)
    hi = zhao_bound(0.0, 0.0, 1001, 500, 0.05)
    # the sqrt(d' ln 2n / n) part more than doubles from d'=101 to 1001
    part = lambda d: 4 * math.sqrt((2 * d * math.log(1000) + math.log(80)) / 500)
    assert part(1001) >= 2 * part(101)
    assert hi.concentration_term > lo.concentration_term


def test_zhao_bound_domain():
    with pytest.raises(ValueError):
        zhao_bound(0.0, 0.0, 0, 500, 0.05)
    with pytest.raises(ValueError):
        zhao_bound(0.0, -0.1, 10, 500, 0.05)
    with pytest.raises(ValueError):
        zhao_bound(0.0, 0.0, 10**6, 500, 0.05)  # d' > e*n


# ---------------------------------------------------------------------------
# proxy A-distance
# ---------------------------------------------------------------------------

def test_proxy_a_distance_identical_domains():
    values = []
    for seed in range(5):
        rng = derive_rng(seed, "pad-same")
        source = rng.standard_normal((60, 8))
        target = rng.standard_normal((60, 8))
        values.append(proxy_a_distance(source, target, seed))
    assert np.mean(values) <= 0.15


def test_proxy_a_distance_separated_domains():
    rng = derive_rng(1, "pad-far")
    source = rng.standard_normal((60, 8))
    target = rng.standard_normal((60, 8)) + 10.0
    assert proxy_a_distance(source, target, 0) >= 1.8


def test_proxy_a_distance_range_and_determinism():
    rng = derive_rng(2, "pad-rng")
    for _ in range(5):
        source = rng.standard_normal((20, 4))
        target = rng.standard_normal((20, 4)) + rng.uniform(0, 2)
        a = proxy_a_distance(source, target, 3)
        b = proxy_a_distance(source, target, 3)
        assert a == b
        assert 0.0 <= a <= 2.0


def test_proxy_a_distance_degenerate_split():
    with pytest.raises(ValueError):
        proxy_a_distance(np.zeros((3, 2)), np.zeros((10, 2)), 0)


# ---------------------------------------------------------------------------
# PAC-Bayes pieces
# ---------------------------------------------------------------------------

def test_pacbayes_dis_bound_base_value():
    assert pacbayes_dis_bound(0.0, 0.0, 500, 1.0, 0.05) == pytest.approx(
        PACBAYES_BASE_ALPHA1, rel=1e-12
    )


def test_pacbayes_dis_bound_pinned_value():
    assert pacbayes_dis_bound(0.3, 2.0, 500, 1.0, 0.05) == pytest.approx(
        PACBAYES_PINNED, rel=1e-12
    )


def test_pacbayes_dis_bound_monotone_in_kl():
    values = [pacbayes_dis_bound(0.2, kl, 300, 1.0, 0.05) for kl in (0.0, 1.0, 5.0)]
    assert values[0] < values[1] < values[2]


def test_pacbayes_dis_bound_domain():
    with pytest.raises(ValueError):
        pacbayes_dis_bound(0.1, 1.0, 0, 1.0, 0.05)
    with pytest.raises(ValueError):
        pacbayes_dis_bound(0.1, 1.0, 10, 0.0, 0.05)
    with pytest.raises(ValueError):
        pacbayes_dis_bound(-0.1, 1.0, 10, 1.0, 0.05)


def _trained_net_and_data(seed=0, n=80, m=30):
    cfg = SpuriousConfig(n=n, d=6, p_maj=0.8, sigma_core=1.0, sigma_spu=1.0, seed=seed)
    train = gen_spurious(cfg)
    test = gen_spurious(
        SpuriousConfig(n=n, d=6, p_maj=0.5, sigma_core=1.0, sigma_spu=1.0, seed=seed + 1000)
    )
    net = train_rf_logistic(train, m=m, steps=60, lr=0.05, l2=1e-3, seed=seed)
    return net, train, test


def test_empirical_dis_rho_zero_on_identical_domains():
    net, train, _ = _trained_net_and_data()
    posterior = GaussianHeadPosterior(net, default_posterior_scale(net))
    assert empirical_dis_rho(posterior, train, train, n_draws=64, seed=5) == 0.0


def test_empirical_dis_rho_deterministic():
    net, train, test = _trained_net_and_data()
    posterior = GaussianHeadPosterior(net, default_posterior_scale(net))
    a = empirical_dis_rho(posterior, train, test, n_draws=128, seed=7)
    b = empirical_dis_rho(posterior, train, test, n_draws=128, seed=7)
    assert a == b
    assert a >= 0.0


def test_empirical_dis_rho_stabilizes():
    net, train, test = _trained_net_and_data(seed=3, n=200, m=40)
    posterior = GaussianHeadPosterior(net, default_posterior_scale(net))
    est_2k = empirical_dis_rho(posterior, train, test, n_draws=2000, seed=11)
    est_4k = empirical_dis_rho(posterior, train, test, n_draws=4000, seed=11)
    assert abs(est_2k - est_4k) <= 0.05


def test_gaussian_posterior_kl():
    net, _, _ = _trained_net_and_data()
    scale = default_posterior_scale(net)
    posterior = GaussianHeadPosterior(net, scale)
    expected = float(net.w @ net.w) / (2 * scale**2)
    assert posterior.kl() == pytest.approx(expected)
    # default scale of 0.1 |w| pins KL at 50
    assert posterior.kl() == pytest.approx(50.0)
