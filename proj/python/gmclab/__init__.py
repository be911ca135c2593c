"""Monte Carlo lab for regularized boundary Gaussian multiplicative chaos."""

from ._gmclab import (
    NumericalError,
    PreconditionError,
    Rect,
    __version__,
    carleson,
    criterion_ids,
    deterministic_first_moment,
    estimate_moment,
    first_moment_divergence,
    fuzz_elementary,
    kahane_shift_constant,
    parse_region,
    pc,
    predicted_scan_slope,
    run_criterion,
    sample_log_masses,
    scaling_check,
    tail_index,
    zeta_bar,
)

__all__ = [
    "NumericalError",
    "PreconditionError",
    "Rect",
    "__version__",
    "carleson",
    "criterion_ids",
    "deterministic_first_moment",
    "estimate_moment",
    "first_moment_divergence",
    "fuzz_elementary",
    "kahane_shift_constant",
    "parse_region",
    "pc",
    "predicted_scan_slope",
    "run_criterion",
    "sample_log_masses",
    "scaling_check",
    "tail_index",
    "zeta_bar",
]
