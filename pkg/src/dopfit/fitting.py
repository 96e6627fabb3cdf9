"""Weighted Hermite least-squares fitting on an orthonormal basis.

Because the basis satisfies the stacked orthonormality identity, the
minimizer of

    || w_y^(1/2) (y_hat - p @ gamma) ||^2 + || w_dy^(1/2) (y_hat' - p' @ gamma) ||^2

is obtained by inner products alone; no linear system is solved. Covariances
follow by linear propagation and collapse to closed forms when the weights
are the exact inverse noise covariances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import BasisSet
from .errors import DimensionMismatch, NonFiniteData, NonPSDInput

__all__ = [
    "Observations",
    "HermiteFit",
    "fit_coefficients",
    "reconstruct",
    "propagate_covariance",
    "hermite_fit",
]


@dataclass(frozen=True)
class Observations:
    """Noisy values and collocated noisy derivatives."""

    y_hat: np.ndarray
    y_hat_prime: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y_hat, dtype=float).ravel()
        dy = np.asarray(self.y_hat_prime, dtype=float).ravel()
        if y.size != dy.size:
            raise DimensionMismatch(
                f"y_hat has {y.size} entries, y_hat_prime has {dy.size}"
            )
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(dy))):
            raise NonFiniteData("observations must be finite")
        object.__setattr__(self, "y_hat", y)
        object.__setattr__(self, "y_hat_prime", dy)

    @property
    def n(self) -> int:
        return self.y_hat.size


@dataclass(frozen=True)
class HermiteFit:
    """Fit coefficients, reconstructions, and propagated covariances.

    ``cov_gamma``, ``cov_y`` and ``cov_dy`` are the closed consistent-case
    forms (identity, p @ p.T, p' @ p'.T), valid when the synthesis weights
    are the inverse noise covariances. For arbitrary covariances use
    :func:`propagate_covariance`.
    """

    gamma: np.ndarray
    y_tilde: np.ndarray
    y_tilde_prime: np.ndarray
    cov_gamma: np.ndarray
    cov_y: np.ndarray
    cov_dy: np.ndarray

    @property
    def degree(self) -> int:
        return self.gamma.size - 1

    @property
    def sd_y(self) -> np.ndarray:
        """Per-sample standard deviation of the reconstructed values."""
        return np.sqrt(np.clip(np.diagonal(self.cov_y), 0.0, None))

    @property
    def sd_dy(self) -> np.ndarray:
        """Per-sample standard deviation of the reconstructed derivatives."""
        return np.sqrt(np.clip(np.diagonal(self.cov_dy), 0.0, None))


def fit_coefficients(basis: BasisSet, obs: Observations) -> np.ndarray:
    """Coefficients as inner products of the basis with weighted data."""
    if obs.n != basis.grid.n:
        raise DimensionMismatch(
            f"observations have {obs.n} samples, basis has {basis.grid.n}"
        )
    w = basis.weights
    return basis.p.T @ w.apply_wy(obs.y_hat) + basis.p_prime.T @ w.apply_wdy(
        obs.y_hat_prime
    )


def reconstruct(basis: BasisSet, gamma) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the fitted polynomial and its derivative on the grid."""
    gamma = np.asarray(gamma, dtype=float).ravel()
    if gamma.size != basis.degree + 1:
        raise DimensionMismatch(
            f"gamma has {gamma.size} entries, basis degree {basis.degree} "
            f"needs {basis.degree + 1}"
        )
    return basis.p @ gamma, basis.p_prime @ gamma


def propagate_covariance(basis: BasisSet, cov_y, cov_dy, simplify: bool = True):
    """Propagate observation covariances to coefficients and reconstructions.

    Computes the general block form

        cov_gamma = p.T @ w_y @ cov_y @ w_y @ p + p'.T @ w_dy @ cov_dy @ w_dy @ p'
        cov_ytilde = p @ cov_gamma @ p.T,   cov_dytilde = p' @ cov_gamma @ p'.T

    When the supplied covariances are detected to be the inverses of the
    synthesis weights the closed forms (I, p @ p.T, p' @ p'.T) are returned
    instead (``simplify=True``), after checking that the general computation
    agrees with them.
    """
    n = basis.grid.n
    cov_y = _validate_cov(cov_y, n, "cov_y")
    cov_dy = _validate_cov(cov_dy, n, "cov_dy")
    w = basis.weights
    p, pp = basis.p, basis.p_prime
    cov_gamma = p.T @ (w.sandwich_wy(cov_y) @ p) + pp.T @ (
        w.sandwich_wdy(cov_dy) @ pp
    )
    if simplify and _is_inverse_pair(w.w_y, cov_y) and _is_inverse_pair(w.w_dy, cov_dy):
        eye = np.eye(basis.degree + 1)
        drift = np.linalg.norm(cov_gamma - eye)
        if drift > 1e-8 * np.sqrt(basis.degree + 1):
            warnings.warn(
                f"consistent-case coefficient covariance deviates from identity "
                f"by {drift:.3e}; basis orthonormality may be degraded"
            )
        return eye, p @ p.T, pp @ pp.T
    return cov_gamma, p @ cov_gamma @ p.T, pp @ cov_gamma @ pp.T


def hermite_fit(basis: BasisSet, obs: Observations) -> HermiteFit:
    """Fit, reconstruct, and attach consistent-case covariances."""
    gamma = fit_coefficients(basis, obs)
    y_tilde, y_tilde_prime = reconstruct(basis, gamma)
    return HermiteFit(
        gamma=gamma,
        y_tilde=y_tilde,
        y_tilde_prime=y_tilde_prime,
        cov_gamma=np.eye(basis.degree + 1),
        cov_y=basis.p @ basis.p.T,
        cov_dy=basis.p_prime @ basis.p_prime.T,
    )


def _validate_cov(cov, n: int, name: str) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (n, n):
        raise DimensionMismatch(f"{name} must be {n}x{n}, got {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise NonPSDInput(f"{name} contains non-finite entries")
    scale = max(np.max(np.abs(cov)), 1e-300)
    if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
        raise NonPSDInput(f"{name} is not symmetric")
    if np.min(np.linalg.eigvalsh(cov)) < -1e-10 * scale:
        raise NonPSDInput(f"{name} is not positive semi-definite")
    return cov


def _is_inverse_pair(w: np.ndarray, cov: np.ndarray, tol: float = 1e-9) -> bool:
    prod = w @ cov
    return bool(np.max(np.abs(prod - np.eye(w.shape[0]))) <= tol)
