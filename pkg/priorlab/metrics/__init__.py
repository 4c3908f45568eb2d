from priorlab.metrics.linalg import (
    check_symmetric,
    jacobi_eigh,
    sym_sqrt,
)
from priorlab.metrics.gaussian import (
    GaussianStats,
    fit_gaussian,
    frechet_distance,
    standard_normal_stats,
)
from priorlab.metrics.probe import (
    ProbeNet,
    load_probe,
    log_softmax,
    save_probe,
    train_probe,
)
from priorlab.metrics.separability import (
    conditional_entropy_bits,
    fit_logistic,
    linear_separability,
    split_halves,
    standardize_halves,
)
from priorlab.metrics.paths import (
    FeatureFn,
    apply_features,
    diversity,
    generate_images,
    mean_pair_distance,
    perceptual_path_length,
    sample_prior_latents,
)
from priorlab.metrics.diagnostics import (
    desk_frechet,
    discriminator_accuracy,
    latent_divergence_diagnostic,
    latent_frechet,
    posterior_latents,
    recon_mse,
)
from priorlab.metrics.report import (
    METRIC_COLUMNS,
    METRIC_FILE,
    REPORT_COLUMNS,
    MetricReport,
    aggregate_reports,
    collect_reports,
    read_reports,
    reports_frame,
    write_aggregate,
    write_reports,
)

__all__ = [
    "FeatureFn",
    "GaussianStats",
    "METRIC_COLUMNS",
    "METRIC_FILE",
    "MetricReport",
    "ProbeNet",
    "REPORT_COLUMNS",
    "aggregate_reports",
    "apply_features",
    "check_symmetric",
    "collect_reports",
    "conditional_entropy_bits",
    "desk_frechet",
    "discriminator_accuracy",
    "diversity",
    "fit_gaussian",
    "fit_logistic",
    "frechet_distance",
    "generate_images",
    "jacobi_eigh",
    "latent_divergence_diagnostic",
    "latent_frechet",
    "linear_separability",
    "load_probe",
    "log_softmax",
    "mean_pair_distance",
    "perceptual_path_length",
    "posterior_latents",
    "read_reports",
    "recon_mse",
    "reports_frame",
    "sample_prior_latents",
    "save_probe",
    "split_halves",
    "standard_normal_stats",
    "standardize_halves",
    "sym_sqrt",
    "train_probe",
    "write_aggregate",
    "write_reports",
]
