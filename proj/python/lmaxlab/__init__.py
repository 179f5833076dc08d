"""Largest-eigenvalue experiments for sample covariance matrices."""

from ._core import (
    ConfigError,
    ConvergenceError,
    DomainError,
    LmaxlabError,
    __version__,
    autocovariance,
    beta_N,
    draw_entries,
    fourth_moment,
    gap_ratio_estimate,
    ks_to_normal,
    largest_eigenvalue,
    mp_edges,
    run,
    sample_covariance,
    sigma_squared,
    solve_fixed_point,
    support_complement,
    support_right_edge,
    theta_N,
    toeplitz_population,
    widom_shampine_eigs,
)

EXIT_CODES = {"ok": 0, "failure": 1, "config_error": 2, "nonconvergence": 3, "inconclusive": 4}

__all__ = [name for name in dir() if not name.startswith("_")]
