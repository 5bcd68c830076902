import numpy as np
import pytest

from szegokit.ahlfors import ahlfors, fiber
from szegokit.representation import (
    FiberPoleError,
    ReprEvaluator,
    caratheodory_density,
    caratheodory_density_repr,
    garabedian_via_repr,
    lambda_unimodular,
    normalized_ahlfors,
    normalized_ahlfors_direct,
    szego_via_repr,
    transform_kernel_check,
)
from szegokit.szego import szego_solution

PAIRS = [(0.2 + 0.1j, -0.1 - 0.55j), (0.55 - 0.3j, 0.0 + 0.6j), (-0.2 + 0.5j, 0.65 + 0.05j)]


@pytest.fixture(scope="module")
def ev(blob3_basis):
    return ReprEvaluator(blob3_basis)


def test_szego_reconstruction(ev, blob3_grid):
    for z, w in PAIRS:
        direct = szego_solution(blob3_grid, w).szego(z)
        assert abs(szego_via_repr(ev, z, w) - direct) < 1e-10


def test_garabedian_reconstruction(ev, blob3_grid):
    for z, w in PAIRS:
        direct = szego_solution(blob3_grid, w).garabedian(z)
        assert abs(garabedian_via_repr(ev, z, w) - direct) < 1e-10


def test_normalized_ahlfors_and_lambda(ev, blob3_grid):
    for z, w in PAIRS:
        lam = lambda_unimodular(ev, w)
        assert abs(abs(lam) - 1) < 1e-12
        assert abs(normalized_ahlfors(ev, z, w) * lam - ahlfors(blob3_grid, w)(z)) < 1e-10
        assert abs(normalized_ahlfors_direct(blob3_grid, ev.basis.a, z, w) * lam
                   - ahlfors(blob3_grid, w)(z)) < 1e-10


def test_reflection_identity_of_quotients(ev):
    assert ev.reflection_residual() < 1e-10


def test_caratheodory_two_paths(ev, blob3_grid):
    z = np.array([0.2 + 0.1j, -0.1 - 0.55j])
    assert np.abs(caratheodory_density(blob3_grid, z) - caratheodory_density_repr(ev, z)).max() < 1e-9


def test_caratheodory_disc_value(disc_grid):
    assert caratheodory_density(disc_grid, 0.5) == pytest.approx(4 / 3, abs=1e-12)


def test_garabedian_on_fiber_is_rejected(ev):
    # z and w with f_a(z) = f_a(w): the quotient formula is singular there
    z = 0.2 + 0.1j
    pts = fiber(ev.fa, ev.fa(z))
    w = pts[np.argmax(np.abs(pts - z))]
    with pytest.raises(FiberPoleError):
        garabedian_via_repr(ev, z, w)
    with pytest.raises(ValueError):
        garabedian_via_repr(ev, z, ev.basis.a)


@pytest.mark.parametrize("name", ["disc", "annulus"])
def test_transformation_law(name, request):
    rep = transform_kernel_check(request.getfixturevalue(name), [0, 1, 0.1], nodes=256)
    assert rep["max_residual"] < 1e-10
