"""Gaussian PSD probability models.

Non-negative densities f(x) = sum_ij A_ij k_eta(x_i, x) k_eta(x_j, x) with a
positive semidefinite coefficient matrix, supporting closed-form integration,
marginalization, pointwise products, conditioning, moments, Nystroem
compression, least-squares density fitting and HMM filtering.
"""

from ._core import (
    Model,
    NotPsdError,
    ZeroEvidenceError,
    ZeroMassError,
    characteristic_function,
    compress,
    compression_error,
    condition,
    covariance,
    filter_run,
    fit,
    from_mixture,
    integrate,
    integrate_numeric,
    is_normalized,
    l2_error,
    load_model,
    marginalize,
    markov_transition,
    mean,
    multiply,
    normalize,
    parse_model,
    partial_eval,
    reduce,
    rejection_sample,
    save_model,
    serialize,
    theorem_hyperparams,
)

__all__ = [
    "Model",
    "NotPsdError",
    "ZeroEvidenceError",
    "ZeroMassError",
    "characteristic_function",
    "compress",
    "compression_error",
    "condition",
    "covariance",
    "filter_run",
    "fit",
    "from_mixture",
    "integrate",
    "integrate_numeric",
    "is_normalized",
    "l2_error",
    "load_model",
    "marginalize",
    "markov_transition",
    "mean",
    "multiply",
    "normalize",
    "parse_model",
    "partial_eval",
    "reduce",
    "rejection_sample",
    "save_model",
    "serialize",
    "theorem_hyperparams",
]
