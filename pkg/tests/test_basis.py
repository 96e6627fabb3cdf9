import numpy as np
import pytest

from dopfit import (
    WeightModel,
    extend_basis,
    fit_coefficients,
    init_first_degree,
    init_zero_degree,
    normalize_abscissa,
    residual_matrix,
    synthesize_basis,
)
from dopfit.fitting import Observations
from dopfit.errors import (
    DegenerateWeights,
    DegreeOutOfRange,
    DuplicateAbscissa,
    NegativeSigma,
    NonMonotonicAbscissa,
    NonPSDInput,
    RankExhausted,
    TooFewSamples,
    ZeroSigma,
)


def unit_weights(n):
    return WeightModel.from_diagonal(np.ones(n), np.ones(n))


# -- normalization ---------------------------------------------------------------

def test_normalize_symmetric_three_points():
    grid = normalize_abscissa([0.0, 1.0, 2.0])
    expected = np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0)
    np.testing.assert_allclose(grid.x, expected, atol=1e-15)
    assert grid.x_prime is None
    np.testing.assert_array_equal(grid.x_raw, [0.0, 1.0, 2.0])


def test_normalize_rejects_bad_input():
    with pytest.raises(DuplicateAbscissa):
        normalize_abscissa([1.0, 1.0, 2.0])
    with pytest.raises(TooFewSamples):
        normalize_abscissa([1.0])
    with pytest.raises(NonMonotonicAbscissa):
        normalize_abscissa([1.0, 0.5, 2.0])
    with pytest.raises(NonMonotonicAbscissa):
        normalize_abscissa([0.0, np.nan, 1.0])


def test_normalize_large_grid_zero_mean_unit_norm():
    grid = normalize_abscissa(np.linspace(-2 * np.pi, 2 * np.pi, 500))
    assert abs(grid.x.mean()) <= 1e-15
    assert abs(np.linalg.norm(grid.x) - 1.0) <= 1e-15


# -- initialization ---------------------------------------------------------------

def test_zero_degree_unit_weights():
    grid = normalize_abscissa([0.0, 1.0, 2.0, 3.0])
    p0, p0_prime = init_zero_degree(grid, unit_weights(4))
    np.testing.assert_allclose(p0, 0.5, rtol=1e-15)
    np.testing.assert_array_equal(p0_prime, 0.0)


def test_zero_degree_scalar_sigma_closed_form():
    n = 300
    grid = normalize_abscissa(np.linspace(0, 1, n))
    weights = WeightModel.from_sigmas(0.2, 0.8, n)
    p0, _ = init_zero_degree(grid, weights)
    np.testing.assert_allclose(p0, 0.2 / np.sqrt(n), rtol=1e-14)


def test_zero_degree_rejects_all_zero_value_weights():
    grid = normalize_abscissa([0.0, 1.0, 2.0])
    weights = WeightModel.from_diagonal(np.zeros(3), np.ones(3))
    with pytest.raises(DegenerateWeights):
        init_zero_degree(grid, weights)


def test_first_degree_two_point_antisymmetric():
    grid = normalize_abscissa([0.0, 1.0])
    weights = WeightModel.from_diagonal(np.ones(2), np.zeros(2))
    p0, p0p = init_zero_degree(grid, weights)
    p1, p1_prime, x_prime = init_first_degree(grid, weights, p0, p0p)
    np.testing.assert_allclose(p1, [-1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-15)
    assert abs(p1 @ p0) <= 1e-15
    # x_prime is the constant normalization slope 1/||x_raw - mean||
    np.testing.assert_allclose(x_prime, np.sqrt(2.0), rtol=1e-14)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_first_degree_norm_and_orthogonality(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 120))
    x = np.cumsum(rng.uniform(0.1, 1.0, n))
    weights = WeightModel.from_diagonal(
        rng.uniform(0.1, 5.0, n), rng.uniform(0.1, 5.0, n)
    )
    grid = normalize_abscissa(x)
    p0, p0p = init_zero_degree(grid, weights)
    p1, p1p, _ = init_first_degree(grid, weights, p0, p0p)
    norm = p1 @ weights.apply_wy(p1) + p1p @ weights.apply_wdy(p1p)
    cross = p0 @ weights.apply_wy(p1) + p0p @ weights.apply_wdy(p1p)
    assert abs(norm - 1.0) <= 1e-12
    assert abs(cross) <= 1e-12


def test_first_degree_shape_is_line_with_constant_derivative():
    basis = synthesize_basis(
        np.linspace(-1, 1, 300), WeightModel.from_sigmas(0.2, 0.8, 300), 4
    )
    assert np.max(np.abs(np.diff(basis.p[:, 1], 2))) <= 1e-14
    assert np.ptp(basis.p_prime[:, 1]) <= 1e-12


def test_basis_columns_have_index_many_sign_changes():
    basis = synthesize_basis(
        np.linspace(-1, 1, 300), WeightModel.from_sigmas(0.2, 0.8, 300), 4
    )
    for i in range(5):
        changes = int(np.sum(np.abs(np.diff(np.sign(basis.p[:, i]))) > 0))
        assert changes == i


# -- extension ---------------------------------------------------------------------

def test_extend_from_degree_zero_matches_first_degree_init():
    n = 30
    x = np.linspace(0, 2, n)
    weights = WeightModel.from_sigmas(0.5, 1.5, n)
    full = synthesize_basis(x, weights, 3)
    grid = full.grid  # carries x_prime
    p0, p0p = init_zero_degree(grid, weights)
    p1, p1p, _ = init_first_degree(grid, weights, p0, p0p)
    from dopfit.basis import BasisSet

    degree0 = BasisSet(
        p=p0[:, None], p_prime=p0p[:, None], degree=0, grid=grid, weights=weights
    )
    extended = extend_basis(degree0)
    np.testing.assert_allclose(extended.p[:, 1], p1, atol=1e-14)
    np.testing.assert_allclose(extended.p_prime[:, 1], p1p, atol=1e-14)


def test_complete_basis_synthesis_stays_orthonormal():
    n = 50
    basis = synthesize_basis(
        np.linspace(-1, 1, n), WeightModel.from_sigmas(0.2, 0.8, n), 2 * n - 1
    )
    assert np.linalg.norm(residual_matrix(basis)) <= 1e-10


def test_extension_beyond_complete_basis_is_rank_exhausted():
    n = 10
    basis = synthesize_basis(
        np.linspace(-1, 1, n), WeightModel.from_sigmas(0.2, 0.8, n), 2 * n - 1
    )
    with pytest.raises(RankExhausted):
        extend_basis(basis)


# -- synthesis ----------------------------------------------------------------------

def test_degree_zero_basis():
    basis = synthesize_basis([0.0, 1.0, 2.0], unit_weights(3), 0)
    assert basis.p.shape == (3, 1)
    np.testing.assert_array_equal(basis.p_prime, 0.0)
    assert basis.grid.x_prime is None


def test_degree_bounds():
    with pytest.raises(DegreeOutOfRange):
        synthesize_basis([0.0, 1.0, 2.0], unit_weights(3), 6)  # 2n-1 = 5
    with pytest.raises(DegreeOutOfRange):
        synthesize_basis([0.0, 1.0, 2.0], unit_weights(3), -1)


@pytest.mark.parametrize(
    "n,degree",
    [(30, 5), (60, 10), (80, 20), (500, 35), (100, 50), (1000, 50)],
)
def test_orthonormality_residual_within_tolerance(n, degree):
    # tau(d, n) record: for d <= 50 and n >= 2d the identity holds to 1e-10
    # and the stacked basis is full rank
    basis = synthesize_basis(
        np.linspace(-3, 3, n), WeightModel.from_sigmas(0.3, 1.2, n), degree
    )
    tau = np.linalg.norm(residual_matrix(basis))
    print(f"tau(d={degree}, n={n}) = {tau:.3e}")
    assert tau <= 1e-10
    from dopfit import quality_measures

    assert quality_measures(basis).eps_rank == 0


def test_columns_are_exact_degree_polynomials():
    # (i+1)-th finite difference of column i vanishes relative to the column;
    # the i-th does not (exact degree), on an equally spaced grid.
    n, degree = 60, 12
    basis = synthesize_basis(
        np.linspace(-2, 2, n), WeightModel.from_sigmas(0.3, 1.0, n), degree
    )
    for i in range(degree + 1):
        col = basis.p[:, i]
        vanish = np.max(np.abs(np.diff(col, i + 1)))
        assert vanish <= 1e-8 * np.max(np.abs(col))
        if i > 0:
            assert vanish <= 1e-4 * np.max(np.abs(np.diff(col, i)))


def test_zero_weight_sample_cannot_influence_fit():
    n = 25
    w_y = np.full(n, 4.0)
    w_y[7] = 0.0
    weights = WeightModel.from_diagonal(w_y, np.ones(n))
    basis = synthesize_basis(np.linspace(0, 1, n), weights, 6)
    rng = np.random.default_rng(3)
    y = rng.standard_normal(n)
    dy = rng.standard_normal(n)
    reference = fit_coefficients(basis, Observations(y, dy))
    y[7] += 1e6
    perturbed = fit_coefficients(basis, Observations(y, dy))
    assert np.max(np.abs(reference - perturbed)) <= 1e-12


def test_scale_equivariance_is_bit_exact():
    # Multiplying x_raw by a power of two (with the derivative sigma rescaled
    # to keep units consistent) leaves p bit-identical and divides p_prime by
    # the same constant exactly.
    n, degree, c = 40, 8, 4.0
    x = np.linspace(0.5, 3.0, n)
    ref = synthesize_basis(x, WeightModel.from_sigmas(0.3, 0.9, n), degree)
    scaled = synthesize_basis(c * x, WeightModel.from_sigmas(0.3, 0.9 / c, n), degree)
    assert np.array_equal(ref.p, scaled.p)
    assert np.array_equal(ref.p_prime / c, scaled.p_prime)


def test_scale_equivariance_literal_without_derivative_weights():
    n, degree, c = 40, 8, 4.0
    x = np.linspace(0.5, 3.0, n)
    weights = WeightModel.from_diagonal(np.ones(n), np.zeros(n))
    ref = synthesize_basis(x, weights, degree)
    scaled = synthesize_basis(c * x, weights, degree)
    assert np.array_equal(ref.p, scaled.p)
    assert np.array_equal(ref.p_prime / c, scaled.p_prime)


def test_synthesis_is_deterministic():
    n = 80
    x = np.linspace(-1, 1, n)
    weights = WeightModel.from_sigmas(0.2, 0.8, n)
    a = synthesize_basis(x, weights, 15)
    b = synthesize_basis(x, weights, 15)
    assert a.p.tobytes() == b.p.tobytes()
    assert a.p_prime.tobytes() == b.p_prime.tobytes()


def test_basis_arrays_are_immutable():
    basis = synthesize_basis([0.0, 1.0, 2.0], unit_weights(3), 2)
    with pytest.raises(ValueError):
        basis.p[0, 0] = 1.0


# -- weight model ----------------------------------------------------------------------

def test_weight_model_rejects_asymmetry():
    w = np.array([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(NonPSDInput):
        WeightModel(w, np.eye(2))


def test_weight_model_rejects_indefinite():
    with pytest.raises(NonPSDInput):
        WeightModel(np.diag([1.0, -1.0]), np.eye(2))


def test_weight_model_clamps_tiny_negative_eigenvalues():
    w = np.array([[1.0, 1.0], [1.0, 1.0]]) - 1e-13 * np.eye(2)
    with pytest.warns(UserWarning):
        model = WeightModel(w, np.eye(2))
    assert np.min(np.linalg.eigvalsh(model.w_y)) >= 0.0


def test_sigma_validation():
    with pytest.raises(NegativeSigma):
        WeightModel.from_sigmas(-0.1, 1.0, 4)
    with pytest.raises(ZeroSigma):
        WeightModel.from_sigmas(0.0, 1.0, 4)
    model = WeightModel.from_sigmas([0.5, np.inf, 0.5], 1.0, 3)
    assert model.w_y[1, 1] == 0.0
    assert model.w_y[0, 0] == 4.0
