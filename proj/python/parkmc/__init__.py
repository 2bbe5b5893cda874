"""Lattice kinetic Monte Carlo under operator splitting."""

from ._core import (
    DenseChain,
    Decomposition,
    Lattice,
    ParkmcError,
    RateModel,
    __version__,
    commutator_matrix,
    csv_header,
    discrepancy_exact,
    ep_paths,
    epr_exact,
    epr_order_fit,
    estimate_epr,
    exact_coefficients,
    rer_exact,
    run_config_text,
    sample_chain,
    stationary,
    transition_exact,
    transition_scheme,
)

CSV_COLUMNS = tuple(csv_header().split(","))

__all__ = [
    "CSV_COLUMNS",
    "DenseChain",
    "Decomposition",
    "Lattice",
    "ParkmcError",
    "RateModel",
    "__version__",
    "commutator_matrix",
    "csv_header",
    "discrepancy_exact",
    "ep_paths",
    "epr_exact",
    "epr_order_fit",
    "estimate_epr",
    "exact_coefficients",
    "rer_exact",
    "run_config_text",
    "sample_chain",
    "stationary",
    "transition_exact",
    "transition_scheme",
]
