"""Monomial-basis reference method solved through the normal equations.

This is the comparison target for the orthogonal-polynomial route: the same
weighted functional minimized in the monomial (Vandermonde) parameterization,
via a dense symmetric solve. Its conditioning collapse at high degree is the
phenomenon the quality module measures, so no regularization or
pseudo-inversion is applied; failures surface as ``SingularSystem``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import Grid, WeightModel, normalize_abscissa
from .errors import DegreeOutOfRange, DimensionMismatch, SingularSystem
from .fitting import HermiteFit, Observations

__all__ = [
    "VandermondeBasis",
    "vandermonde_basis",
    "gram_matrix",
    "solve_normal_equations",
    "vandermonde_fit",
]


@dataclass(frozen=True)
class VandermondeBasis:
    """Monomial columns ``b[:, i] = t**i`` and their raw-abscissa derivatives."""

    b: np.ndarray
    b_prime: np.ndarray
    degree: int
    grid: Grid
    normalized: bool


def vandermonde_basis(x_raw, degree: int, normalize: bool = True) -> VandermondeBasis:
    """Monomial basis over the grid, with chain-rule derivative columns.

    With ``normalize=True`` (default) the monomials are taken in the same
    zero-mean unit-norm abscissa the orthogonal synthesis uses, so both
    methods solve the identical problem; ``normalize=False`` uses the raw
    abscissa (the historically common, worst-conditioned variant).
    """
    degree = int(degree)
    if degree < 0:
        raise DegreeOutOfRange(f"degree must be >= 0, got {degree}")
    grid = normalize_abscissa(x_raw)
    if normalize:
        t = grid.x
        scale = 1.0 / np.linalg.norm(grid.x_raw - grid.x_raw.mean())
    else:
        t = grid.x_raw
        scale = 1.0
    n = grid.n
    b = np.vander(t, degree + 1, increasing=True)
    b_prime = np.zeros((n, degree + 1))
    if degree >= 1:
        b_prime[:, 1:] = b[:, :-1] * np.arange(1, degree + 1) * scale
    return VandermondeBasis(
        b=b, b_prime=b_prime, degree=degree, grid=grid, normalized=normalize
    )


def gram_matrix(vb: VandermondeBasis, weights: WeightModel) -> np.ndarray:
    """Stacked weighted Gram matrix b.T w_y b + b'.T w_dy b'."""
    if weights.n != vb.grid.n:
        raise DimensionMismatch(
            f"weights are for {weights.n} samples, basis has {vb.grid.n}"
        )
    return vb.b.T @ weights.apply_wy(vb.b) + vb.b_prime.T @ weights.apply_wdy(
        vb.b_prime
    )


def solve_normal_equations(
    vb: VandermondeBasis, weights: WeightModel, obs: Observations
) -> np.ndarray:
    """Monomial coefficients from a Cholesky solve of the normal equations.

    Raises ``SingularSystem`` when the Gram matrix is numerically singular,
    which is the expected failure mode at high degree.
    """
    if obs.n != vb.grid.n:
        raise DimensionMismatch(
            f"observations have {obs.n} samples, basis has {vb.grid.n}"
        )
    gram = gram_matrix(vb, weights)
    rhs = vb.b.T @ weights.apply_wy(obs.y_hat) + vb.b_prime.T @ weights.apply_wdy(
        obs.y_hat_prime
    )
    return scipy.linalg.cho_solve(_factorize(gram, vb.degree), rhs)


def vandermonde_fit(
    vb: VandermondeBasis, weights: WeightModel, obs: Observations
) -> HermiteFit:
    """Full fit record for the monomial route, with propagated covariances.

    Coefficient covariance is the Gram inverse (consistent-weights case);
    reconstruction covariances follow by linear propagation. Packaged in the
    same record type the orthogonal route produces so the two methods can be
    compared sample by sample.
    """
    if obs.n != vb.grid.n:
        raise DimensionMismatch(
            f"observations have {obs.n} samples, basis has {vb.grid.n}"
        )
    gram = gram_matrix(vb, weights)
    rhs = vb.b.T @ weights.apply_wy(obs.y_hat) + vb.b_prime.T @ weights.apply_wdy(
        obs.y_hat_prime
    )
    factor = _factorize(gram, vb.degree)
    gamma = scipy.linalg.cho_solve(factor, rhs)
    cov_gamma = scipy.linalg.cho_solve(factor, np.eye(vb.degree + 1))
    return HermiteFit(
        gamma=gamma,
        y_tilde=vb.b @ gamma,
        y_tilde_prime=vb.b_prime @ gamma,
        cov_gamma=cov_gamma,
        cov_y=vb.b @ cov_gamma @ vb.b.T,
        cov_dy=vb.b_prime @ cov_gamma @ vb.b_prime.T,
    )


def _factorize(gram: np.ndarray, degree: int):
    if not np.all(np.isfinite(gram)):
        raise SingularSystem("normal-equation matrix has non-finite entries")
    try:
        return scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystem(
            f"normal-equation matrix is numerically singular at degree {degree}"
        ) from exc
