import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentlab.grid import WaveField, gaussian, l2_norm, make_grid, spectral_derivative
from momentlab.operators import (
    OperatorError,
    PositivityError,
    apply_hamiltonian,
    apply_sqrtH_power,
    build_hamiltonian,
    check_assumptions,
    equivalence_probe,
    kinetic_matrix,
    norm_hs,
    norm_hsv,
    norm_sigma,
    potential_from_expression,
    random_band_limited_ensemble,
    smallest_eigenvalue,
)


@pytest.fixture(scope="module")
def grid():
    return make_grid(512, 30.0)


@pytest.fixture(scope="module")
def zero_potential(grid):
    return potential_from_expression(grid, "zero")


@pytest.fixture(scope="module")
def well(grid):
    return potential_from_expression(grid, "sech2(1.0)")


@pytest.fixture(scope="module")
def H_zero(grid, zero_potential):
    return build_hamiltonian(grid, zero_potential)


@pytest.fixture(scope="module")
def H_well(grid, well):
    return build_hamiltonian(grid, well)


def test_potential_vocabulary(grid):
    V = potential_from_expression(grid, "sech2(0.5)")
    assert V.values[grid.n_points // 2] == pytest.approx(-0.5)  # x = 0
    V2 = potential_from_expression(grid, "lorentz(2.0)")
    assert V2.values[grid.n_points // 2] == pytest.approx(-2.0)
    V3 = potential_from_expression(grid, "const(0.25)")
    assert np.all(V3.values == 0.25)
    assert potential_from_expression(grid, "zero").is_zero
    with pytest.raises(OperatorError):
        potential_from_expression(grid, "cubic(1.0)")


def test_kinetic_matrix_is_symmetric_and_spectral(grid):
    K = kinetic_matrix(grid)
    assert np.allclose(K, K.T)
    # its eigenvalues are exactly the squared grid frequencies
    evals = np.sort(np.linalg.eigvalsh(K))
    expected = np.sort(grid.frequencies**2)
    assert np.max(np.abs(evals - expected)) < 1e-8


def test_dense_matches_matrix_free(grid, well):
    H = build_hamiltonian(grid, well)
    f = gaussian(grid, a=1.3)
    dense = H.synthesize(H.coefficients(f) * H.eigenvalues).values
    free = apply_hamiltonian(well, f).values
    assert np.max(np.abs(dense - free)) < 1e-9


def test_build_rejects_large_grids(well):
    big = make_grid(8192, 30.0)
    V = potential_from_expression(big, "zero")
    with pytest.raises(OperatorError):
        build_hamiltonian(big, V)


def test_zero_potential_eigenvalues(H_zero, grid):
    evals = np.sort(H_zero.eigenvalues)
    assert evals[0] > -1e-10
    assert np.max(np.abs(evals - np.sort(grid.frequencies**2))) < 1e-8


def test_smallest_eigenvalue_well(grid, well, H_well):
    # -d^2/dx^2 + sech^2 >= 0 (the well enters H with a positive sign)
    lam = smallest_eigenvalue(well)
    assert lam == pytest.approx(H_well.min_eigenvalue, abs=1e-6)
    assert lam >= -1e-8


def test_negative_operator_raises(grid):
    # attractive sign: V = +2 sech^2 gives H = -d^2 - V with a bound state
    V = potential_from_expression(grid, "sech2(-2.0)")
    H = build_hamiltonian(grid, V)
    assert H.min_eigenvalue < -0.5
    f = gaussian(grid)
    with pytest.raises(PositivityError):
        apply_sqrtH_power(H, 1, f)


def test_sqrt_power_squares_to_H(grid, well, H_well):
    # (sqrt H)^2 f = H f on a nonnegative operator
    f = gaussian(grid)
    once = apply_sqrtH_power(H_well, 2, f)
    direct = apply_hamiltonian(well, f)
    assert np.max(np.abs(once.values - direct.values)) < 1e-8


def test_norm_hs_free_oracle(grid):
    # ||f||^2 = 1, ||f'||^2 = 1/2 for the unit Gaussian
    f = gaussian(grid)
    assert norm_hs(f, 1) == pytest.approx(np.sqrt(1.5), rel=1e-10)


def test_norms_coincide_for_zero_potential(grid, H_zero):
    f = gaussian(grid, a=0.8)
    for s in (1, 2):
        assert norm_hsv(f, s, H_zero) == pytest.approx(norm_hs(f, s), rel=1e-10)


def test_norm_sigma_combines(grid):
    f = gaussian(grid)
    expected = np.sqrt(norm_hs(f, 1) ** 2 + 0.5)
    assert norm_sigma(f, 1) == pytest.approx(expected, rel=1e-10)


def test_ensemble_reproducible(grid):
    e1 = random_band_limited_ensemble(grid, 5, seed=42)
    e2 = random_band_limited_ensemble(grid, 5, seed=42)
    for a, b in zip(e1, e2):
        assert np.array_equal(a.values, b.values)
    e3 = random_band_limited_ensemble(grid, 5, seed=43)
    assert not np.array_equal(e1[0].values, e3[0].values)


def test_ensemble_normalized_and_band_limited(grid):
    for f in random_band_limited_ensemble(grid, 3, seed=1):
        assert l2_norm(f) == pytest.approx(1.0, rel=1e-12)


def test_equivalence_probe_zero_potential(grid, H_zero):
    ensemble = random_band_limited_ensemble(grid, 20, seed=5)
    c_hat, C_hat = equivalence_probe(H_zero, 2, ensemble)
    assert c_hat == pytest.approx(1.0, abs=1e-10)
    assert C_hat == pytest.approx(1.0, abs=1e-10)


def test_equivalence_probe_well(grid, H_well):
    ensemble = random_band_limited_ensemble(grid, 20, seed=5)
    c_hat, C_hat = equivalence_probe(H_well, 2, ensemble)
    assert 0.0 < c_hat <= C_hat < np.inf
    # repeat is bit-identical (seeded ensemble, deterministic algebra)
    again = equivalence_probe(H_well, 2, random_band_limited_ensemble(grid, 20, seed=5))
    assert again == (c_hat, C_hat)


def test_assumption_report_well(well):
    rep = check_assumptions(well, 2)
    assert rep.positivity
    assert rep.vanishing_at_infinity
    # 2V + xV' for V = -sech^2 is not everywhere >= 0
    assert rep.repulsivity_min == pytest.approx(
        float(np.min(2 * well.values + well.grid.nodes
                     * np.gradient(well.values, well.grid.dx))), abs=1e-2)


def test_sobolev_order_caps(grid):
    f = gaussian(grid)
    with pytest.raises(OperatorError):
        norm_hs(f, 5)


@settings(max_examples=20, deadline=None)
@given(s=st.integers(min_value=1, max_value=2), seed=st.integers(0, 10**6))
def test_hsv_dominates_l2(grid, H_well, s, seed):
    # ||f||_{H^s_V} >= ||f||_{L^2} by construction
    f = random_band_limited_ensemble(grid, 1, seed=seed)[0]
    assert norm_hsv(f, s, H_well) >= l2_norm(f) - 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_norm_hs_triangle_inequality(grid, seed):
    e = random_band_limited_ensemble(grid, 2, seed=seed)
    summed = WaveField(grid, e[0].values + e[1].values)
    assert norm_hs(summed, 2) <= norm_hs(e[0], 2) + norm_hs(e[1], 2) + 1e-12
