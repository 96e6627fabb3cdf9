"""A-posteriori numerical quality measures for basis sets.

The residual matrix ``R = I - (p.T w_y p + p'.T w_dy p')`` is zero for a
perfectly orthonormal set; round-off makes it not so, and five summary
measures of ``R`` and of the stacked weighted basis ``U`` quantify the
damage. Each measure ``eps`` maps to an approximate significant-digit count
``eta = -log10(eps)``.

The monomial baseline has no orthonormality of its own to measure, so its
quality is taken as the orthonormality achievable *through* its
parameterization: the Gram matrix ``G`` of the stacked weighted monomials is
orthonormalized by its inverse eigendecomposition square root and the same
measures are applied. Failure to invert ``G`` counts as zero digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf, log10

import numpy as np

from .basis import BasisSet, WeightModel, synthesize_basis
from .baseline import VandermondeBasis, gram_matrix, vandermonde_basis
from .errors import DopfitError

__all__ = [
    "QualityReport",
    "SweepRow",
    "residual_matrix",
    "quality_measures",
    "vandermonde_quality",
    "sweep_complete",
    "sweep_incomplete",
]

_MEASURES = ("max", "frob", "det", "cond", "rank")


@dataclass(frozen=True)
class QualityReport:
    """The five error measures of one basis instance.

    ``eps_det`` and ``eps_cond`` are reported as magnitudes ``|1 - det U|``
    and ``|1 - cond U|`` so the digit transform is defined; for non-square
    stacked bases the determinant generalizes to the product of singular
    values and the condition number to ``s_max / s_min``. ``eta`` maps each
    measure name to ``-log10(eps)``, with ``+inf`` for an exact zero.
    """

    eps_max: float
    eps_frob: float
    eps_det: float
    eps_cond: float
    eps_rank: int

    @property
    def eta(self) -> dict[str, float]:
        return {name: _digits(self[name]) for name in _MEASURES}

    def __getitem__(self, name: str) -> float:
        return getattr(self, f"eps_{name}")


def _digits(eps: float) -> float:
    if eps == 0.0:
        return inf
    if eps < 0.0 or not np.isfinite(eps):
        return -inf
    return -log10(eps) + 0.0  # avoid -0.0 for eps == 1


def residual_matrix(basis: BasisSet) -> np.ndarray:
    """Deviation of the stacked weighted Gram matrix from the identity."""
    stacked = np.vstack([basis.p, basis.p_prime])
    weighted = np.vstack(
        [basis.weights.apply_wy(basis.p), basis.weights.apply_wdy(basis.p_prime)]
    )
    return np.eye(basis.degree + 1) - stacked.T @ weighted


def _report_from(u: np.ndarray, r: np.ndarray) -> QualityReport:
    """Measures from the stacked weighted basis ``u`` and residual ``r``."""
    s = np.linalg.svd(u, compute_uv=False)
    cols = u.shape[1]
    s_max = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > s_max * max(u.shape) * np.finfo(float).eps))
    eps_cond = inf if s[-1] == 0.0 else abs(1.0 - s_max / s[-1])
    return QualityReport(
        eps_max=float(np.max(np.abs(r))),
        eps_frob=float(np.linalg.norm(r)),
        eps_det=float(abs(1.0 - np.prod(s))),
        eps_cond=float(eps_cond),
        eps_rank=cols - rank,
    )


def quality_measures(basis: BasisSet) -> QualityReport:
    """Evaluate all five measures for a synthesized basis set."""
    u = np.vstack(
        [
            basis.weights.sqrt_apply_wy(basis.p),
            basis.weights.sqrt_apply_wdy(basis.p_prime),
        ]
    )
    return _report_from(u, residual_matrix(basis))


def vandermonde_quality(
    vb: VandermondeBasis, weights: WeightModel
) -> tuple[QualityReport, str | None]:
    """Gram-orthonormality measures for the monomial parameterization.

    Returns the report plus an error string when the Gram matrix could not
    be inverted (all float measures then read 1.0, i.e. zero digits).
    """
    gram = gram_matrix(vb, weights)
    cols = vb.degree + 1
    if not np.all(np.isfinite(gram)):
        return _failure_report(np.zeros(cols)), "gram matrix overflowed"
    lam, vec = np.linalg.eigh(gram)
    if lam[0] <= 0.0 or not np.all(np.isfinite(lam)):
        return _failure_report(lam), "gram matrix is not numerically positive definite"
    inv_root = vec @ ((1.0 / np.sqrt(lam))[:, None] * vec.T)
    r = np.eye(cols) - inv_root @ gram @ inv_root
    stacked = np.vstack(
        [weights.sqrt_apply_wy(vb.b), weights.sqrt_apply_wdy(vb.b_prime)]
    )
    return _report_from(stacked @ inv_root, r), None


def _failure_report(lam: np.ndarray) -> QualityReport:
    lam = lam[np.isfinite(lam)]
    lam_max = np.max(lam, initial=0.0)
    rank = int(np.count_nonzero(lam > lam_max * lam.size * np.finfo(float).eps))
    return QualityReport(
        eps_max=1.0,
        eps_frob=1.0,
        eps_det=1.0,
        eps_cond=1.0,
        eps_rank=lam.size - rank,
    )


# -- sweeps ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    """One (n, degree, method) evaluation; failures carry an error string."""

    n: int
    d: int
    method: str
    report: QualityReport | None
    error: str | None = None


def _sweep_pair(n: int, d: int, sigma_y: float, sigma_dy: float) -> list[SweepRow]:
    # The quality of either construction is invariant to the raw range
    # (everything is computed on the normalized abscissa), so a canonical
    # equally spaced grid on [-1, 1] is used.
    x_raw = np.linspace(-1.0, 1.0, n)
    weights = WeightModel.from_sigmas(sigma_y, sigma_dy, n)
    rows = []
    try:
        report = quality_measures(synthesize_basis(x_raw, weights, d))
        rows.append(SweepRow(n=n, d=d, method="dop", report=report))
    except DopfitError as exc:
        rows.append(SweepRow(n=n, d=d, method="dop", report=None, error=str(exc)))
    try:
        report, err = vandermonde_quality(vandermonde_basis(x_raw, d), weights)
        rows.append(SweepRow(n=n, d=d, method="vandermonde", report=report, error=err))
    except DopfitError as exc:
        rows.append(
            SweepRow(n=n, d=d, method="vandermonde", report=None, error=str(exc))
        )
    return rows


def sweep_complete(n_values, sigma_y: float, sigma_dy: float) -> list[SweepRow]:
    """Quality of complete basis sets (d = 2n - 1) over a list of sizes.

    Each row is evaluated independently; a failed synthesis is recorded in
    the row rather than aborting the sweep.
    """
    rows = []
    for n in n_values:
        n = int(n)
        rows.extend(_sweep_pair(n, 2 * n - 1, sigma_y, sigma_dy))
    return rows


def sweep_incomplete(n: int, degrees, sigma_y: float, sigma_dy: float) -> list[SweepRow]:
    """Quality of incomplete (overdetermined) sets at fixed n over degrees."""
    rows = []
    for d in degrees:
        rows.extend(_sweep_pair(int(n), int(d), sigma_y, sigma_dy))
    return rows
