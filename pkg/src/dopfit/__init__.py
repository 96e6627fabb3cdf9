"""Covariance-weighted discrete orthogonal polynomial fitting.

Fits polynomials simultaneously to noisy values and noisy derivatives by
synthesizing a weighted discrete orthogonal basis (three-term recurrence
with full re-orthogonalization), reducing the least-squares fit to inner
products; includes covariance propagation, a Vandermonde reference method,
and numerical-quality diagnostics.
"""

__version__ = "0.1.0"

from .basis import (
    BasisSet,
    Grid,
    WeightModel,
    extend_basis,
    init_first_degree,
    init_zero_degree,
    normalize_abscissa,
    synthesize_basis,
)
from .baseline import (
    VandermondeBasis,
    gram_matrix,
    solve_normal_equations,
    vandermonde_basis,
    vandermonde_fit,
)
from .fitting import (
    HermiteFit,
    Observations,
    fit_coefficients,
    hermite_fit,
    propagate_covariance,
    reconstruct,
)
from .quality import (
    QualityReport,
    SweepRow,
    quality_measures,
    residual_matrix,
    sweep_complete,
    sweep_incomplete,
    vandermonde_quality,
)
from .synthetic import (
    MonteCarloResult,
    SyntheticSpec,
    generate,
    run_monte_carlo,
    weights_for,
)
from .dataio import read_dataset, write_fit
from . import errors

__all__ = [
    "__version__",
    "BasisSet",
    "Grid",
    "WeightModel",
    "normalize_abscissa",
    "init_zero_degree",
    "init_first_degree",
    "extend_basis",
    "synthesize_basis",
    "Observations",
    "HermiteFit",
    "fit_coefficients",
    "reconstruct",
    "propagate_covariance",
    "hermite_fit",
    "VandermondeBasis",
    "vandermonde_basis",
    "gram_matrix",
    "solve_normal_equations",
    "vandermonde_fit",
    "QualityReport",
    "SweepRow",
    "residual_matrix",
    "quality_measures",
    "vandermonde_quality",
    "sweep_complete",
    "sweep_incomplete",
    "SyntheticSpec",
    "MonteCarloResult",
    "generate",
    "weights_for",
    "run_monte_carlo",
    "read_dataset",
    "write_fit",
    "errors",
]
