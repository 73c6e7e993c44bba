"""Spurious-correlation benchmark: one full bound comparison.

Trains a random-feature logistic model on correlated data (p_maj = 0.9),
evaluates it on a balanced target sample, and prints the decomposition of
the robust OOD bound next to the pseudo-dimension and PAC-Bayes baselines.
"""

from robustood import (
    GaussianHeadPosterior,
    SpuriousConfig,
    build_partition,
    cell_counts,
    empirical_dis_rho,
    empirical_epsilon,
    gen_spurious,
    pacbayes_dis_bound,
    proxy_a_distance,
    robust_ood_bound,
    train_rf_logistic,
    tv_distance,
    worst_group_error,
    zhao_bound,
)
from robustood.bounds import default_posterior_scale
from robustood.models import logistic_loss

n, d, m, K_target, delta = 500, 100, 500, 1000, 0.05
train = gen_spurious(SpuriousConfig(n, d, 0.9, sigma_core=10, sigma_spu=1, seed=0))
test = gen_spurious(SpuriousConfig(n, d, 0.5, sigma_core=10, sigma_spu=1, seed=1))

net = train_rf_logistic(train, m=m, steps=200, lr=1e-4, l2=1e-3, seed=2)
wge = worst_group_error(net.predict_signs(test.features), test)
print(f"worst-group error on the balanced target: {wge:.3f}")

loss_of = lambda X, y: logistic_loss(net.predict_scores(X), y)
train_losses = loss_of(train.features, train.labels)
test_losses = loss_of(test.features, test.labels)
source_risk = float(train_losses.mean())
M = float(max(train_losses.max(), test_losses.max()))

partition = build_partition(train, K_target, seed=3)
dtv = tv_distance(cell_counts(partition, train), cell_counts(partition, test))
eps = empirical_epsilon(partition, loss_of, train, test)
robust = robust_ood_bound(source_risk, M, dtv, eps, partition.K, n, delta)
print(f"\nrobust bound   total {robust.total:7.3f}  "
      f"(risk {robust.empirical_source_risk:.3f} + distance {robust.distance_term:.3f} "
      f"+ robustness {robust.robustness_term:.3f} + concentration {robust.concentration_term:.3f})")

proxy = proxy_a_distance(train.features, test.features, seed=4)
zhao = zhao_bound(source_risk, proxy, d_prime=m + 1, n=n, delta=delta)
print(f"zhao baseline  total {zhao.total:7.3f}  "
      f"(distance {zhao.distance_term:.3f} + concentration {zhao.concentration_term:.3f})")

posterior = GaussianHeadPosterior(net, default_posterior_scale(net))
dis = empirical_dis_rho(posterior, train, test, n_draws=256, seed=5)
pac = pacbayes_dis_bound(dis, posterior.kl(), n, alpha=1.0, delta=delta)
print(f"pac-bayes      dis_rho {dis:.4f} -> deviation bound {pac:.3f} (KL {posterior.kl():.1f})")
