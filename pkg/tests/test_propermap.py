import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szegokit.propermap import (
    BivarPoly,
    ConstructionError,
    modulus_check,
    proper_from_pair,
    reflect_polynomial,
    zero_free_margin,
)
from szegokit.szego import admissible_base

coeff = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 3), m=st.integers(0, 3), data=st.data())
def test_reflection_is_an_involution(n, m, data):
    c = np.array(data.draw(st.lists(coeff, min_size=(n + 1) * (m + 1), max_size=(n + 1) * (m + 1))))
    p = BivarPoly(c.reshape(n + 1, m + 1))
    assert np.array_equal(reflect_polynomial(reflect_polynomial(p)).coeffs, p.coeffs)


@settings(max_examples=30, deadline=None)
@given(c0=st.complex_numbers(min_magnitude=3.0, max_magnitude=10.0), c=st.lists(coeff, min_size=3, max_size=3))
def test_modulus_identity_on_torus(c0, c):
    # |c0| >= 3 dominates the other terms, so p has no zeros on the closed bidisc
    p = BivarPoly([[c0, c[0]], [c[1], 0.3 * c[2]]])
    assert modulus_check(p, samples=40) < 1e-13


def test_examples_from_the_construction():
    p = BivarPoly([[-4, 0], [0, 1]])  # z w - 4
    q = reflect_polynomial(p)
    assert np.allclose(q.coeffs, [[1, 0], [0, -4]])
    assert modulus_check(p) < 1e-14
    assert q(1, 1) / p(1, 1) == pytest.approx(1.0)
    assert modulus_check(BivarPoly([[-3], [1]])) < 1e-14
    assert zero_free_margin(p) == pytest.approx(3.0)
    # p = 1 reflects to 1
    assert reflect_polynomial(BivarPoly([[1]])).coeffs.tolist() == [[1]]


def test_vanishing_polynomial_rejected():
    with pytest.raises(ConstructionError):
        modulus_check(BivarPoly([[-1], [1]]))  # z - 1 vanishes at z = 1 on the torus


def test_disc_proper_map_value(disc_grid):
    basis = admissible_base(disc_grid, 0.0, 0.0)
    g = proper_from_pair(BivarPoly([[-3], [1]]), basis, z=0.5)
    assert g == pytest.approx(0.2, abs=1e-13)


def test_annulus_proper_map(annulus_basis):
    pm = proper_from_pair(BivarPoly([[-4, 0], [0, 1]]), annulus_basis)
    rep = pm.report()
    assert rep["ok"]
    assert rep["boundary_modulus_deviation"] < 1e-12
    assert len(set(rep["valence"].values())) == 1


def test_constant_map_flagged(annulus_basis):
    with pytest.raises(ConstructionError):
        proper_from_pair(BivarPoly([[2]]), annulus_basis)


def test_polynomial_vanishing_on_image_rejected(annulus_basis):
    # z - 0.3 vanishes where f_a = 0.3, which happens inside the domain
    with pytest.raises(ConstructionError):
        proper_from_pair(BivarPoly([[-0.3], [1]]), annulus_basis)
