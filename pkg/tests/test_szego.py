import numpy as np
import pytest

from szegokit import oracles
from szegokit.szego import (
    AdmissibilityError,
    admissible_base,
    boundary_zero_count,
    find_admissible_base,
    szego_kernel,
    szego_solution,
    szego_zeros,
)


def test_disc_szego_and_garabedian(disc_grid):
    sol = szego_solution(disc_grid, 0.2 + 0.3j)
    z = np.array([0.5, -0.1 + 0.4j])
    assert np.abs(sol.szego(z) - oracles.disc_szego(z, 0.2 + 0.3j)).max() < 1e-14
    assert np.abs(sol.garabedian(z) - oracles.disc_garabedian(z, 0.2 + 0.3j)).max() < 1e-14


def test_annulus_szego_matches_series(annulus_grid):
    z, w = 0.7, 0.6 + 0.2j
    assert abs(szego_kernel(annulus_grid, z, w) - oracles.annulus_szego(z, w)) < 1e-12


def test_szego_hermitian_symmetry(blob3_grid):
    z, w = 0.1 + 0.1j, -0.1 - 0.5j
    assert abs(szego_kernel(blob3_grid, z, w) - np.conj(szego_kernel(blob3_grid, w, z))) < 1e-13


def test_boundary_identity_S_equals_conj_L_times_tangent(blob3_grid):
    # S(z, a) = i conj(L(z, a) T(z)) on the boundary
    sol = szego_solution(blob3_grid, 0.1 + 0.1j)
    rhs = 1j * np.conj(sol.L.values * blob3_grid.tangents)
    assert np.abs(sol.S.values - rhs).max() < 1e-12


def test_szego_has_n_minus_1_zeros(annulus_grid, blob3_grid):
    assert szego_zeros(annulus_grid, 0.7).size == 1
    zs = szego_zeros(blob3_grid, 0.1 + 0.1j)
    assert zs.size == 2
    sol = szego_solution(blob3_grid, 0.1 + 0.1j)
    assert np.abs(sol.szego(zs)).max() < 1e-12


def test_annulus_szego_zero_is_reflection(annulus_grid):
    # for the annulus the zero of S(., a) with real a lies on the negative axis
    z0 = szego_zeros(annulus_grid, 0.7)[0]
    assert abs(z0.imag) < 1e-12 and z0.real < 0


def test_boundary_zero_count_of_polynomial(blob3_grid):
    z = blob3_grid.nodes
    g = (z - 0.1) * (z + 0.1 + 0.5j)
    k, res = boundary_zero_count(blob3_grid, g)
    assert k == 2 and res < 1e-10


def test_admissible_basis_gram_is_positive(blob3_basis):
    assert np.linalg.eigvalsh(blob3_basis.gram).min() > 0
    assert np.abs(blob3_basis.gram @ blob3_basis.c - np.eye(3)).max() < 1e-10


def test_b_equal_a_rejected_on_multiply_connected(annulus_grid):
    with pytest.raises(ValueError):
        admissible_base(annulus_grid, 0.7, 0.7)


def test_find_admissible_base_reports_failure(annulus_grid):
    # a point in the hole cannot be perturbed into an admissible base
    with pytest.raises(AdmissibilityError):
        find_admissible_base(annulus_grid, 0.0, attempts=2)
