import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szegokit.ahlfors import ahlfors, interior_samples
from szegokit.fitkit import (
    FitError,
    RationalPoleError,
    degree_sweep,
    eval_rational,
    fit_rational,
    model_from_json,
    model_to_json,
    stability_check,
)
from szegokit.representation import caratheodory_density


def _disc_points(m, seed=0):
    rng = np.random.default_rng(seed)
    r = 0.8 * np.sqrt(rng.uniform(0, 1, m))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, m))


def test_constant_model():
    z = _disc_points(60)
    mdl = fit_rational(np.stack([z, z], axis=1), np.ones(60), 0, signature=("f_a", "f_b"))
    assert mdl.ok and max(mdl.train_residual, mdl.heldout_residual) <= 1e-12
    assert eval_rational(mdl, [0.3, -0.2j]) == pytest.approx(1.0)


def test_disc_caratheodory_squared_is_rational(disc_grid):
    # a = 0 gives f_a = z, so rho^2 = 1 / (1 - x conj x)^2 with x = f_a
    z = interior_samples(disc_grid, 120, np.random.default_rng(3), margin=0.2)
    fa = ahlfors(disc_grid, 0.0)
    x = fa(z)
    t = caratheodory_density(disc_grid, z) ** 2 / np.abs(fa.derivative(z)) ** 2
    sw = degree_sweep(np.stack([x, np.conj(x)], axis=1), t, degrees=range(1, 3), signature=("f_a", "conj f_a"))
    best = sw["best"]
    assert sum(best.num_degree) <= 4 and best.heldout_residual <= 1e-8
    assert eval_rational(best, [0.5, 0.5]) == pytest.approx(16 / 9, rel=1e-7)


def test_sweep_linear_residual_non_increasing():
    z = _disc_points(200, 1)
    y = np.exp(z) / (1 + 0.3 * z)
    fits = degree_sweep(z, y, degrees=range(1, 6), stop=0.0)["fits"]
    lin = [f.linear_residual for f in fits]
    # nested model classes: each degree can reproduce the previous one
    assert all(b <= a * (1 + 1e-6) + 1e-14 for a, b in zip(lin, lin[1:]))


@settings(max_examples=20, deadline=None)
@given(p=st.lists(st.complex_numbers(max_magnitude=1.0), min_size=3, max_size=3),
       q=st.complex_numbers(max_magnitude=0.5))
def test_recovers_exact_rational(p, q):
    z = _disc_points(80, 2)
    y = (p[0] + p[1] * z + p[2] * z ** 2) / (1 + q * z)
    if np.abs(y).max() < 1e-3:
        return
    mdl = fit_rational(z, y, (2,), den_degree=(1,))
    assert mdl.heldout_residual < 1e-9


def test_json_round_trip():
    z = _disc_points(60, 4)
    mdl = fit_rational(z, 1 / (2 - z), 1)
    back = model_from_json(model_to_json(mdl))
    assert np.allclose(eval_rational(back, z[:, None]), eval_rational(mdl, z[:, None]))
    assert back.signature == mdl.signature and back.num_degree == mdl.num_degree


def test_pole_flag():
    z = _disc_points(60, 5)
    mdl = fit_rational(z, 1 / (z - 1.5), 1)
    with pytest.raises(RationalPoleError):
        eval_rational(mdl, [1.5])


def test_too_few_samples():
    with pytest.raises(FitError):
        fit_rational(np.array([0.1, 0.2]), np.array([1.0, 2.0]), 3)
    mdl = fit_rational(_disc_points(40, 6), np.ones(40), 6)  # 14 unknowns need 42 training samples
    assert mdl.num_degree[0] < 6 and any("lowered" in n for n in mdl.notes)


def test_stability_on_disjoint_halves():
    z = _disc_points(300, 7)
    assert stability_check(z, np.exp(z), 4)["stable"]


def test_annulus_derivative_quotient_fit(annulus_basis):
    g = annulus_basis.grid
    fa, fb = ahlfors(g, annulus_basis.a), ahlfors(g, annulus_basis.b)
    sw = degree_sweep(np.stack([fa.trace, fb.trace], axis=1), fb.derivative_trace / fa.derivative_trace,
                      signature=("f_a", "f_b"))
    assert sw["best"].heldout_residual <= 1e-6
