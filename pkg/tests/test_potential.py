import numpy as np
import pytest

from szegokit import oracles
from szegokit.potential import (
    bergman_factor_rank,
    bergman_kernel,
    greens_function,
    greens_w_representation,
    greens_w_derivative,
    interpolation_points,
    lambda_j,
    lambda_near_boundary,
    linearization_check,
    nu_limit,
    numerical_rank,
    poisson_kernel,
    principal_term,
    principal_term_factored,
    reproducing_total,
    u_basis,
)


def test_numerical_rank():
    assert numerical_rank(np.array([1.0, 1e-3, 1e-7, 1e-9])) == 2
    assert numerical_rank(np.zeros(3)) == 0


def test_disc_green_and_derivative(disc_sys):
    z, w = 0.3 + 0.2j, -0.4 + 0.1j
    assert greens_function(disc_sys, z, w) == pytest.approx(oracles.disc_green(z, w), rel=1e-13)
    assert abs(greens_w_derivative(disc_sys, z, w) - oracles.disc_green_w(z, w)) < 1e-13


def test_annulus_green_series(annulus_sys):
    for z, w in [(0.75, -0.6 + 0.1j), (0.7, 0.7j), (0.6 + 0.2j, 0.8)]:
        assert abs(greens_function(annulus_sys, z, w) - oracles.annulus_green(z, w)) < 1e-10


def test_green_symmetric_and_negative(blob3_sys):
    z, w = 0.2 + 0.1j, -0.1 - 0.55j
    a, b = greens_function(blob3_sys, z, w), greens_function(blob3_sys, w, z)
    assert a < 0 and abs(a - b) < 1e-12


def test_green_pole_raises(disc_sys):
    with pytest.raises(ZeroDivisionError):
        greens_function(disc_sys, 0.1, 0.1)


def test_harmonic_measure_and_u1_annulus(annulus_sys):
    z = np.array([0.75, 0.6 - 0.3j])
    assert np.abs(annulus_sys.omega(z)[:, 0] - oracles.annulus_harmonic_measure(z)).max() < 1e-12
    assert np.abs(annulus_sys.u_values(z)[:, 0] - oracles.annulus_u1(z)).max() < 1e-12
    assert u_basis(annulus_sys).shape == (annulus_sys.grid.size, 1)


def test_lambda_sums_and_total(blob3_sys):
    z = 0.2 + 0.1j
    lam = lambda_j(blob3_sys, z)
    assert lam.shape == (2,) and np.all(lam > 0) and lam.sum() < 1
    assert reproducing_total(blob3_sys, z) == pytest.approx(1.0, abs=1e-12)
    assert np.abs(lambda_near_boundary(blob3_sys, z) - lam).max() < 1e-11


def test_annulus_lambda_value(annulus_sys):
    # inner-circle share of |S(., z)|^2 from the orthogonal basis z^n, ||z^n||^2 = 2 pi (1 + rho^(2n+1))
    rho, z = 0.5, 0.75
    n = np.arange(-200, 201).astype(float)
    N = 2 * np.pi * (1 + rho ** (2 * n + 1))
    inner = np.sum(z ** (2 * n) * 2 * np.pi * rho ** (2 * n + 1) / N ** 2)
    total = np.sum(z ** (2 * n) / N)
    assert lambda_j(annulus_sys, z)[0] == pytest.approx(inner / total, abs=1e-12)


@pytest.mark.parametrize("name", ["annulus_sys", "blob3_sys"])
def test_representation_of_green_derivative(name, request):
    sys = request.getfixturevalue(name)
    for z, w in [(0.6 + 0.3j, -0.1 + 0.7j), (0.2 - 0.65j, 0.0 + 0.6j)]:
        ref = greens_w_derivative(sys, z, w)
        assert abs(greens_w_representation(sys, z, w) - ref) < 1e-10
        assert abs(greens_w_representation(sys, z, w, factored=True) - ref) < 1e-10
        assert abs(principal_term_factored(sys, z, w) - principal_term(sys, z, w)) < 1e-10


def test_green_derivative_at_boundary_node(annulus_sys):
    g = annulus_sys.grid
    z, k = 0.6 + 0.3j, 17
    w = g.nodes[k]
    assert abs(greens_w_representation(annulus_sys, z, w) - greens_w_derivative(annulus_sys, z, w)) < 1e-10


def test_disc_poisson_kernel(disc_sys):
    g = disc_sys.grid
    p = poisson_kernel(disc_sys, 0.5)
    assert np.abs(p - oracles.disc_poisson(0.5, g.nodes)).max() < 1e-12
    assert poisson_kernel(disc_sys, 0.5, 0) == pytest.approx(0.477464829275686, rel=1e-12)


@pytest.mark.parametrize("name", ["annulus_sys", "blob3_sys"])
def test_poisson_mass_positivity_reproduction(name, request):
    sys = request.getfixturevalue(name)
    g = sys.grid
    z = 0.6 + 0.3j
    p = poisson_kernel(sys, z)
    assert p @ g.weights == pytest.approx(1.0, abs=1e-12)
    assert p.min() > 0
    u = (g.nodes ** 2).real + np.log(np.abs(g.nodes - 3))
    assert p @ (u * g.weights) == pytest.approx((z ** 2).real + np.log(abs(z - 3)), abs=1e-11)


def test_disc_bergman(disc_sys):
    z, w = 0.3 + 0.2j, -0.4 + 0.1j
    assert abs(bergman_kernel(disc_sys, z, w) - oracles.disc_bergman(z, w)) < 1e-12
    # near the boundary the solve is upsampled
    w = 0.93 * np.exp(1j)
    assert abs(bergman_kernel(disc_sys, z, w) - oracles.disc_bergman(z, w)) / abs(oracles.disc_bergman(z, w)) < 1e-11


def test_annulus_bergman(annulus_sys):
    z, w = 0.7, 0.6 + 0.2j
    assert abs(bergman_kernel(annulus_sys, z, w) - oracles.annulus_bergman(z, w)) < 1e-10


def test_linearized_identity_pointwise(annulus_sys):
    g = annulus_sys.grid
    rep = linearization_check(annulus_sys, [0.6 + 0.3j, -0.2 - 0.7j], [0, 40, 300], rank_size=8)
    assert rep["max_residual"] < 1e-8


def test_bergman_factor_rank_annulus(annulus_sys):
    rep, M, _ = bergman_factor_rank(annulus_sys, grid_size=24)
    assert rep.hermitian_residual < 1e-10
    assert rep.rank == 4 and rep.tail < 1e-6


def test_nu_limit_converges(annulus_sys):
    out = nu_limit(annulus_sys, 5)
    assert out["converged"], out


def test_interpolation_points_well_conditioned(blob3_sys):
    w = interpolation_points(blob3_sys)
    U = blob3_sys.u_values(w)
    assert w.size == 2 and np.linalg.cond(U) < 1e3
