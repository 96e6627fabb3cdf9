"""Synthesis of covariance-weighted discrete orthogonal polynomial bases.

A basis set is a pair of matrices ``p`` and ``p_prime`` whose columns hold a
polynomial of exactly the column's degree, evaluated on a normalized abscissa,
together with that polynomial's derivative with respect to the raw abscissa.
The columns are built by a three-term recurrence whose candidate is
re-orthogonalized against *all* previous columns (not just the last two),
which is what keeps high-degree sets numerically sound. The defining
property is the stacked orthonormality identity

    p.T @ w_y @ p + p_prime.T @ w_dy @ p_prime = I

so that a weighted least-squares fit against both value and derivative data
reduces to inner products instead of a linear solve.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateGrid,
    DegenerateWeights,
    DegreeOutOfRange,
    DimensionMismatch,
    DuplicateAbscissa,
    NegativeSigma,
    NonMonotonicAbscissa,
    NonPSDInput,
    RankExhausted,
    TooFewSamples,
    ZeroSigma,
)

_EPS = np.finfo(float).eps


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Grid:
    """Abscissa samples and their normalized transform.

    ``x`` is ``x_raw`` centered to zero mean and scaled to unit Euclidean
    norm. ``x_prime`` is the constant derivative of that transform with
    respect to ``x_raw`` (per raw-abscissa unit); it is filled in by
    :func:`init_first_degree` and stays ``None`` for degree-0 grids.
    """

    x_raw: np.ndarray
    x: np.ndarray
    x_prime: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.x_raw.size


@dataclass(frozen=True)
class WeightModel:
    """Value-domain and derivative-domain weight matrices.

    Weights are inverse noise covariances: ``w_y`` has units 1/value^2 and
    ``w_dy`` units 1/derivative^2. Both must be symmetric positive
    semi-definite; zero weights are allowed and drop the corresponding
    sample from the corresponding domain.
    """

    w_y: np.ndarray
    w_dy: np.ndarray

    def __post_init__(self):
        w_y = _validate_weight_matrix(np.asarray(self.w_y, dtype=float), "w_y")
        w_dy = _validate_weight_matrix(np.asarray(self.w_dy, dtype=float), "w_dy")
        if w_y.shape != w_dy.shape:
            raise DimensionMismatch(
                f"w_y is {w_y.shape} but w_dy is {w_dy.shape}"
            )
        object.__setattr__(self, "w_y", _frozen(w_y))
        object.__setattr__(self, "w_dy", _frozen(w_dy))
        object.__setattr__(self, "_diag_y", _diagonal_of(self.w_y))
        object.__setattr__(self, "_diag_dy", _diagonal_of(self.w_dy))

    @property
    def n(self) -> int:
        return self.w_y.shape[0]

    @property
    def is_diagonal(self) -> bool:
        return self._diag_y is not None and self._diag_dy is not None

    @classmethod
    def from_sigmas(cls, sigma_y, sigma_dy, n: int | None = None) -> "WeightModel":
        """Diagonal weights 1/sigma^2 from scalar or per-sample sigmas.

        ``inf`` sigma gives weight 0 (sample ignored in that domain).
        Zero sigma is rejected: it would be an exact constraint.
        """
        sy = _sigma_vector(sigma_y, n, "sigma_y")
        sdy = _sigma_vector(sigma_dy, sy.size if n is None else n, "sigma_dy")
        if sy.size != sdy.size:
            raise DimensionMismatch(
                f"sigma_y has {sy.size} entries but sigma_dy has {sdy.size}"
            )
        return cls.from_diagonal(1.0 / sy**2, 1.0 / sdy**2)

    @classmethod
    def from_diagonal(cls, diag_y, diag_dy) -> "WeightModel":
        """Diagonal weights from per-sample weight vectors."""
        dy = np.asarray(diag_y, dtype=float).ravel()
        ddy = np.asarray(diag_dy, dtype=float).ravel()
        return cls(np.diag(dy), np.diag(ddy))

    # Dense application helpers; the diagonal fast path matters in sweeps.
    def apply_wy(self, a: np.ndarray) -> np.ndarray:
        return self._apply(self._diag_y, self.w_y, a)

    def apply_wdy(self, a: np.ndarray) -> np.ndarray:
        return self._apply(self._diag_dy, self.w_dy, a)

    def sqrt_apply_wy(self, a: np.ndarray) -> np.ndarray:
        return self._sqrt_apply(self._diag_y, self.w_y, a)

    def sqrt_apply_wdy(self, a: np.ndarray) -> np.ndarray:
        return self._sqrt_apply(self._diag_dy, self.w_dy, a)

    def sandwich_wy(self, m: np.ndarray) -> np.ndarray:
        """w_y @ m @ w_y for a symmetric n-by-n matrix m."""
        if self._diag_y is not None:
            return m * np.outer(self._diag_y, self._diag_y)
        return self.w_y @ m @ self.w_y

    def sandwich_wdy(self, m: np.ndarray) -> np.ndarray:
        if self._diag_dy is not None:
            return m * np.outer(self._diag_dy, self._diag_dy)
        return self.w_dy @ m @ self.w_dy

    @staticmethod
    def _apply(diag, full, a):
        a = np.asarray(a, dtype=float)
        if diag is None:
            return full @ a
        return a * diag if a.ndim == 1 else a * diag[:, None]

    @staticmethod
    def _sqrt_apply(diag, full, a):
        a = np.asarray(a, dtype=float)
        if diag is not None:
            root = np.sqrt(diag)
            return a * root if a.ndim == 1 else a * root[:, None]
        lam, vec = np.linalg.eigh(full)
        root = vec @ (np.sqrt(np.clip(lam, 0.0, None))[:, None] * vec.T)
        return root @ a


@dataclass(frozen=True)
class BasisSet:
    """An immutable discrete orthogonal polynomial basis.

    Column ``i`` of ``p`` is a polynomial of exact degree ``i`` in the
    normalized abscissa; column ``i`` of ``p_prime`` is its derivative with
    respect to the raw abscissa. Column 0 of ``p_prime`` is zero.
    """

    p: np.ndarray
    p_prime: np.ndarray
    degree: int
    grid: Grid
    weights: WeightModel


def normalize_abscissa(x_raw) -> Grid:
    """Center the abscissa at zero mean and scale it to unit Euclidean norm.

    The raw values are retained so that derivative columns stay expressed per
    raw-abscissa unit. Input must be strictly increasing: derivative data is
    positional, so silently sorting would desynchronize y and y'.
    """
    x_raw = np.asarray(x_raw, dtype=float).ravel()
    if x_raw.size < 2:
        raise TooFewSamples(f"need at least 2 samples, got {x_raw.size}")
    if not np.all(np.isfinite(x_raw)):
        raise NonMonotonicAbscissa("abscissa contains non-finite values")
    steps = np.diff(x_raw)
    if np.any(steps == 0.0):
        raise DuplicateAbscissa("abscissa contains duplicate values")
    if np.any(steps < 0.0):
        raise NonMonotonicAbscissa("abscissa must be strictly increasing")
    centered = x_raw - x_raw.mean()
    x = centered / np.linalg.norm(centered)
    return Grid(x_raw=_frozen(x_raw), x=_frozen(x), x_prime=None)


def init_zero_degree(grid: Grid, weights: WeightModel):
    """Degree-0 column: the constant vector normalized in the value metric."""
    _check_grid_weights(grid, weights)
    ones = np.ones(grid.n)
    total = float(ones @ weights.apply_wy(ones))
    if not np.isfinite(total) or total <= 0.0:
        raise DegenerateWeights(
            "sum of value weights must be positive to normalize the constant column"
        )
    p0 = ones / np.sqrt(total)
    return p0, np.zeros(grid.n)


def init_first_degree(grid: Grid, weights: WeightModel, p0, p0_prime):
    """Degree-1 column plus the derivative scale of the normalized abscissa.

    The candidate ``x * p0`` is projected onto the orthogonal complement of
    ``p0``; because the projected vector is affine in the raw abscissa, its
    endpoint slope fixes the constant vector ``x_prime`` that converts
    normalized-abscissa derivatives into raw-abscissa derivatives.
    Returns ``(p1, p1_prime, x_prime)``.
    """
    _check_grid_weights(grid, weights)
    p0 = np.asarray(p0, dtype=float)
    u1 = grid.x * p0
    p1_hat = u1 - p0 * float(p0 @ weights.apply_wy(u1))
    ones = np.ones(grid.n)
    total = float(ones @ weights.apply_wy(ones))
    slope = (p1_hat[-1] - p1_hat[0]) / (grid.x_raw[-1] - grid.x_raw[0])
    x_prime = np.sqrt(total) * slope * ones
    p1_hat_prime = x_prime * p0
    norm_sq = float(
        p1_hat @ weights.apply_wy(p1_hat)
        + p1_hat_prime @ weights.apply_wdy(p1_hat_prime)
    )
    if not np.isfinite(norm_sq) or norm_sq <= 0.0:
        raise DegenerateGrid("degree-1 candidate has zero weighted norm")
    alpha = 1.0 / np.sqrt(norm_sq)
    return alpha * p1_hat, alpha * p1_hat_prime, x_prime


def _next_column(p_cols, pp_cols, grid: Grid, weights: WeightModel):
    """One recurrence step with re-orthogonalization against all columns.

    ``p_cols``/``pp_cols`` hold the columns up to the current degree k. The
    recurrence candidate is ``u = x * p_k`` with derivative counterpart
    ``v = x * p_k' + x_prime * p_k``; both are stripped of their components
    along every existing column in the stacked weighted metric, then scaled
    to unit weighted norm.
    """
    x = grid.x
    p_k = p_cols[:, -1]
    pp_k = pp_cols[:, -1]
    u = x * p_k
    v = x * pp_k + grid.x_prime * p_k
    wu = weights.apply_wy(u)
    wv = weights.apply_wdy(v)
    beta = p_cols.T @ wu + pp_cols.T @ wv
    c = u - p_cols @ beta
    c_prime = v - pp_cols @ beta
    norm_sq = float(c @ weights.apply_wy(c) + c_prime @ weights.apply_wdy(c_prime))
    norm_sq_cand = float(u @ wu + v @ wv)
    if not np.isfinite(norm_sq) or norm_sq <= grid.n * _EPS * norm_sq_cand:
        raise RankExhausted(
            f"no independent direction left after degree {p_cols.shape[1] - 1}"
        )
    alpha = 1.0 / np.sqrt(norm_sq)
    return alpha * c, alpha * c_prime


def extend_basis(basis: BasisSet) -> BasisSet:
    """Append the next-degree column pair to a basis set.

    Requires the basis grid to carry ``x_prime`` (present for every set of
    degree >= 1 built by :func:`synthesize_basis`). Raises ``RankExhausted``
    once the stacked data dimension 2n is used up.
    """
    if basis.grid.x_prime is None:
        raise DegenerateGrid(
            "grid has no derivative scale; extend a basis of degree >= 1 "
            "or fill x_prime via init_first_degree"
        )
    c, c_prime = _next_column(basis.p, basis.p_prime, basis.grid, basis.weights)
    return BasisSet(
        p=_frozen(np.column_stack([basis.p, c])),
        p_prime=_frozen(np.column_stack([basis.p_prime, c_prime])),
        degree=basis.degree + 1,
        grid=basis.grid,
        weights=basis.weights,
    )


def synthesize_basis(x_raw, weights: WeightModel, degree: int) -> BasisSet:
    """Build the full basis set of the requested degree.

    Runs the normalization, the degree-0 and degree-1 initializations, then
    one recurrence extension per remaining degree. The result satisfies the
    stacked orthonormality identity up to round-off and is immutable.
    """
    degree = int(degree)
    grid = normalize_abscissa(x_raw)
    _check_grid_weights(grid, weights)
    n = grid.n
    if degree < 0 or degree > 2 * n - 1:
        raise DegreeOutOfRange(
            f"degree must be in [0, 2n-1] = [0, {2 * n - 1}], got {degree}"
        )
    p = np.zeros((n, degree + 1), order="F")
    pp = np.zeros((n, degree + 1), order="F")
    p[:, 0], pp[:, 0] = init_zero_degree(grid, weights)
    if degree >= 1:
        p[:, 1], pp[:, 1], x_prime = init_first_degree(
            grid, weights, p[:, 0], pp[:, 0]
        )
        grid = replace(grid, x_prime=_frozen(x_prime))
        for k in range(1, degree):
            c, c_prime = _next_column(p[:, : k + 1], pp[:, : k + 1], grid, weights)
            p[:, k + 1] = c
            pp[:, k + 1] = c_prime
    return BasisSet(
        p=_frozen(p),
        p_prime=_frozen(pp),
        degree=degree,
        grid=grid,
        weights=weights,
    )


# -- validation helpers --------------------------------------------------------

def _check_grid_weights(grid: Grid, weights: WeightModel):
    if weights.n != grid.n:
        raise DimensionMismatch(
            f"weights are for {weights.n} samples, grid has {grid.n}"
        )


def _diagonal_of(w: np.ndarray) -> np.ndarray | None:
    """The diagonal if ``w`` is exactly diagonal, else ``None``."""
    if np.count_nonzero(w - np.diag(np.diagonal(w))) == 0:
        return np.diagonal(w).copy()
    return None


def _validate_weight_matrix(w: np.ndarray, name: str) -> np.ndarray:
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise NonPSDInput(f"{name} contains non-finite entries")
    scale = np.max(np.abs(w))
    if np.max(np.abs(w - w.T)) > 1e-12 * max(scale, 1e-300):
        raise NonPSDInput(f"{name} is not symmetric")
    w = 0.5 * (w + w.T)
    diag = _diagonal_of(w)
    if diag is not None:
        floor = -1e-10 * max(scale, 0.0)
        if np.any(diag < floor):
            raise NonPSDInput(f"{name} has negative weights")
        if np.any(diag < 0.0):
            warnings.warn(f"clamping small negative weights in {name} to zero")
            np.fill_diagonal(w, np.clip(diag, 0.0, None))
        return w
    lam, vec = np.linalg.eigh(w)
    floor = -1e-10 * max(np.max(np.abs(lam)), 0.0)
    if lam[0] < floor:
        raise NonPSDInput(
            f"{name} has eigenvalue {lam[0]:.3e} below the PSD floor {floor:.3e}"
        )
    if lam[0] < 0.0:
        warnings.warn(f"clamping small negative eigenvalues of {name} to zero")
        w = vec @ (np.clip(lam, 0.0, None)[:, None] * vec.T)
        w = 0.5 * (w + w.T)
    return w


def _sigma_vector(sigma, n: int | None, name: str) -> np.ndarray:
    s = np.asarray(sigma, dtype=float).ravel()
    if s.size == 1 and n is not None:
        s = np.full(n, s[0])
    if np.any(np.isnan(s)) or np.any(s < 0.0):
        raise NegativeSigma(f"{name} must be non-negative")
    if np.any(s == 0.0):
        raise ZeroSigma(
            f"{name} contains 0; exact constraints are not supported, "
            "use inf to drop a sample"
        )
    return s
