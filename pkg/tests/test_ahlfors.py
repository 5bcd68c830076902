import numpy as np
import pytest

from szegokit import oracles
from szegokit.ahlfors import (
    ahlfors,
    fiber,
    interior_samples,
    pair_separation,
    properness_report,
    select_primitive_pair,
)


def test_disc_ahlfors_is_mobius(disc_grid):
    w = 0.3 + 0.2j
    f = ahlfors(disc_grid, w)
    z = np.array([0.5, -0.4j])
    assert np.abs(f(z) - oracles.disc_ahlfors(w, z)).max() < 1e-13
    assert abs(f.derivative(w) - oracles.disc_ahlfors_derivative(w, w)) < 1e-12


@pytest.mark.parametrize("name", ["annulus_grid", "blob3_grid"])
def test_properness(name, request):
    g = request.getfixturevalue(name)
    w = 0.7 if name == "annulus_grid" else 0.1 + 0.1j
    rep = properness_report(ahlfors(g, w))
    assert rep["ok"], rep
    assert rep["max_modulus_deviation"] < 1e-12


def test_ahlfors_normalization(blob3_grid):
    f = ahlfors(blob3_grid, 0.1 + 0.1j)
    d = f.derivative(0.1 + 0.1j)
    assert abs(f(0.1 + 0.1j)) < 1e-13
    assert abs(d.imag) < 1e-12 and d.real > 0


def test_fiber_has_n_points(blob3_grid):
    f = ahlfors(blob3_grid, 0.1 + 0.1j)
    pts = fiber(f, 0.2 - 0.1j)
    assert pts.size == 3
    assert np.abs(f(pts) - (0.2 - 0.1j)).max() < 1e-11


def test_interior_samples_respect_margin(annulus_grid):
    pts = interior_samples(annulus_grid, 20, np.random.default_rng(0), margin=0.1)
    assert annulus_grid.contains(pts).all()
    assert annulus_grid.distance(pts).min() >= 0.1


def test_primitive_pair_selection(annulus_grid):
    b, margin = select_primitive_pair(annulus_grid, 0.7)
    assert margin > 1e-3
    assert pair_separation(annulus_grid, 0.7, b) == pytest.approx(margin)
    # fibers of f_0.7 are the pairs {z, -rho/z}; f_{-0.7} is invariant under the same involution
    assert pair_separation(annulus_grid, 0.7, -0.7) < 1e-6
