"""Robustness- and sharpness-based OOD generalization bounds, at desk scale.

The package trains small analytic models (ridge regression, random-feature
ReLU networks, diagonal linear nets), measures their loss-landscape sharpness
and empirical robustness over a random-projection partition, and evaluates a
robust OOD bound against two baselines.
"""

from .bounds import (
    BoundReport,
    GaussianHeadPosterior,
    concentration_term,
    empirical_dis_rho,
    pacbayes_dis_bound,
    proxy_a_distance,
    robust_ood_bound,
    sharpness_robustness_rhs,
    success_probability,
    zhao_bound,
)
from .datasets import (
    LabeledDataset,
    ShiftBasis,
    SpuriousConfig,
    gen_linear_regression,
    gen_spurious,
    random_shift_basis,
    rotate_theta,
    sample_sphere,
    worst_group_error,
)
from .models import (
    DiagonalNetState,
    RandomFeatureNet,
    RidgeModel,
    diag_step,
    diag_theta,
    exp_loss,
    fit_ridge,
    init_diagonal_net,
    init_random_feature_net,
    rf_forward,
    train_rf_logistic,
)
from .robustness import (
    CellCounts,
    Partition,
    assign_cell,
    build_partition,
    cell_counts,
    empirical_epsilon,
    tv_distance,
)
from .sharpness import (
    SharpnessReport,
    diag_sharpness,
    estimate_n_prime,
    feature_layer_sharpness,
    hessian_trace_fd,
    rf_sharpness,
    ridge_sharpness,
)

__version__ = "0.1.0"
