import numpy as np
import pytest

from szegokit import oracles
from szegokit.bie import (
    OutsideDomainError,
    SolverError,
    cauchy_boundary_limit,
    cauchy_integral,
    kerzman_stein_matrix,
    solve_dirichlet,
    solve_kerzman_stein,
)


def test_kerzman_stein_matrix_is_skew_hermitian(blob3_grid):
    A = kerzman_stein_matrix(blob3_grid)
    assert np.abs(A + A.conj().T).max() < 1e-12


def test_kerzman_stein_reproduces_disc_szego(disc_grid):
    a = 0.3 - 0.4j
    S = solve_kerzman_stein(disc_grid, a).values
    assert np.abs(S - oracles.disc_szego(disc_grid.nodes, a)).max() < 1e-13


def test_kerzman_stein_rejects_points_near_boundary(disc_grid):
    with pytest.raises(SolverError):
        solve_kerzman_stein(disc_grid, 0.99)


def test_cauchy_integral_reproduces_polynomials(blob3_grid):
    f = blob3_grid.nodes ** 3 - 2 * blob3_grid.nodes
    z = np.array([0.1 + 0.1j, -0.1 - 0.5j, 0.7])
    assert np.abs(cauchy_integral(blob3_grid, f, z) - (z ** 3 - 2 * z)).max() < 1e-12
    assert np.abs(cauchy_integral(blob3_grid, f, z, 1) - (3 * z ** 2 - 2)).max() < 1e-11


def test_cauchy_integral_near_boundary_uses_upsampling(disc_grid):
    z = 0.97 * np.exp(0.4j)
    f = 1 / (disc_grid.nodes - 2.0)
    assert abs(cauchy_integral(disc_grid, f, z) - 1 / (z - 2.0)) < 1e-12


def test_cauchy_integral_outside_raises(annulus_grid):
    with pytest.raises(OutsideDomainError):
        cauchy_integral(annulus_grid, annulus_grid.nodes, 0.1)


def test_plemelj_limit_of_boundary_values(annulus_grid):
    # boundary values of a function holomorphic in the annulus are reproduced
    z = annulus_grid.nodes
    f = z ** 2 + 1 / z
    assert np.abs(cauchy_boundary_limit(annulus_grid, f) - f).max() < 1e-12


def test_dirichlet_reproduces_harmonic_data(blob3_grid):
    z = blob3_grid.nodes
    c = 3.0 + 2.0j
    u = solve_dirichlet(blob3_grid, np.log(np.abs(z - c)) + (z ** 2).real)
    pts = np.array([0.1 + 0.1j, -0.1 - 0.5j])
    assert np.abs(u(pts) - (np.log(np.abs(pts - c)) + (pts ** 2).real)).max() < 1e-12


def test_dirichlet_handles_hole_logarithm(annulus_grid):
    # ln|z| is harmonic in the annulus but not the real part of a single-valued function
    u = solve_dirichlet(annulus_grid, np.log(np.abs(annulus_grid.nodes)))
    assert abs(u(0.75) - np.log(0.75)) < 1e-12
