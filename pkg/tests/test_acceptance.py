"""Acceptance criteria 1-13, one test and one printed PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""

import numpy as np
import pytest

from szegokit.geometry import boundary_grid, make_preset_domain
from szegokit.harness import verify_suite
from szegokit.representation import caratheodory_density

DOMAINS = {
    "disc": {"domain": {"preset": {"kind": "disc", "params": [1.0]}}, "nodes": 256, "basis": {"a": [0.0, 0.0]}},
    "annulus": {"domain": {"preset": {"kind": "annulus", "params": [0.5]}}, "nodes": 256},
    "blob3": {"domain": {"preset": {"kind": "blob3", "params": [0.05, 0.1]}}, "nodes": 256},
}

LINES = []
_REPORTS = {}


def report(name):
    if name not in _REPORTS:
        _REPORTS[name] = {e.identity: e for e in verify_suite(DOMAINS[name], "all").entries}
    return _REPORTS[name]


def record(number, title, checks):
    """``checks``: list of ``(label, value, tolerance)``; passes when every value <= tolerance."""
    ok = all(v <= tol for _, v, tol in checks)
    worst = ", ".join(f"{label} {v:.2e}/{tol:.0e}" for label, v, tol in checks)
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {worst}"
    LINES.append(line)
    print(line)
    return ok


def entries(identity, *domains):
    return [(f"{identity}[{d}]", report(d)[identity].max_residual, report(d)[identity].threshold) for d in domains]


def test_criterion_01_disc_oracles():
    e = report("disc")["disc_oracles"]
    assert e.nodes == 256 and e.details["nodes"] == 128 and e.details["points"] == 20
    assert record(1, "disc closed forms S L f f' rho G G_w p K (128 nodes, 20 points)",
                  [("max rel err", e.max_residual, 1e-10)])


def test_criterion_02_annulus_oracles():
    r = report("annulus")
    assert record(2, "annulus series oracles", [
        ("S", r["annulus_szego"].max_residual, 1e-8), ("K", r["annulus_bergman"].max_residual, 1e-8),
        ("omega_1", r["annulus_omega"].max_residual, 1e-10), ("u_1", r["annulus_u1"].max_residual, 1e-8),
        ("G", r["annulus_green"].max_residual, 1e-7)])


def test_criterion_03_kernel_reconstruction():
    ids = ("szego_representation", "garabedian_representation")
    checks = [(f"{i}[{d}]", report(d)[i].max_residual, 1e-8) for i in ids for d in ("annulus", "blob3")]
    assert all(report(d)["szego_representation"].details["pairs"] == 20 for d in ("annulus", "blob3"))
    assert record(3, "S and L from the Ahlfors basis vs direct solves (20 pairs)", checks)


def test_criterion_04_normalized_ahlfors():
    checks = []
    for d in ("annulus", "blob3"):
        checks.append((f"F*lambda[{d}]", report(d)["ahlfors_representation"].max_residual, 1e-8))
        checks.append((f"|lambda|-1[{d}]", report(d)["lambda_modulus"].max_residual, 1e-12))
    assert record(4, "F(z,w) lambda(w) vs direct Ahlfors map (10 w)", checks)


def test_criterion_05_caratheodory():
    g = boundary_grid(make_preset_domain("disc", [1.0]), 256)
    disc_val = abs(caratheodory_density(g, 0.5) - 4 / 3)
    checks = [(f"two paths[{d}]", report(d)["caratheodory"].max_residual, 1e-7) for d in ("annulus", "blob3")]
    checks.append(("rho(0.5)-4/3[disc]", disc_val, 1e-10))
    assert record(5, "Caratheodory density", checks)


def test_criterion_06_transformation_law():
    assert record(6, "kernel transformation law, phi = z + 0.1 z^2", entries("transformation", "disc", "annulus"))


def test_criterion_07_proper_maps():
    checks = [("torus |q/p|-1", report("annulus")["torus_modulus"].max_residual, 1e-13)]
    for d in ("annulus", "blob3"):
        e = report(d)["proper_map"]
        checks.append((f"|g|-1[{d}]", e.details["boundary_modulus_deviation"], 1e-8))
        integral = e.details["valence_consistent"] and max(e.details["valence_residual"].values()) < 1e-4
        checks.append((f"valence {sorted(set(e.details['valence'].values()))}[{d}]", 0.0 if integral else np.inf, 0.0))
    assert record(7, "reflected polynomial and composed proper map", checks)


def test_criterion_08_green_derivative():
    checks = entries("green_w_representation", "annulus", "blob3") + entries("principal_two_path", "annulus", "blob3")
    checks = [(l, v, 1e-6 if l.startswith("green_w_representation") else 1e-8) for l, v, _ in checks]
    assert record(8, "G_w representation (10 pairs) and two-path principal term", checks)


def test_criterion_09_poisson():
    checks = []
    for d in ("disc", "annulus", "blob3"):
        r = report(d)
        checks += [(f"mass[{d}]", r["poisson_mass"].max_residual, 1e-9),
                   (f"-min p[{d}]", r["poisson_positivity"].max_residual, 1e-10),
                   (f"reproduction[{d}]", r["poisson_reproduction"].max_residual, 1e-8)]
    assert record(9, "Poisson kernel mass, positivity, 4 harmonic test functions", checks)


def test_criterion_10_linearized_identity():
    checks = []
    for d in ("annulus", "blob3"):
        r = report(d)
        assert r["poisson_linear_pointwise"].details["samples"] == 50
        checks.append((f"pointwise[{d}]", r["poisson_linear_pointwise"].max_residual, 1e-6))
        rank = r["poisson_linear_rank"]
        checks.append((f"{rank.details['index']}[{d}]", rank.max_residual, 1e-6))
    assert record(10, "linearized Poisson identity: pointwise and sampled-quotient rank", checks)


def test_criterion_11_bergman_factorization():
    checks = []
    for d in ("annulus", "blob3"):
        r = report(d)
        checks += [(f"hermitian[{d}]", r["bergman_factor_hermitian"].max_residual, 1e-8),
                   (f"tail rank {r['bergman_factor_rank'].details['numerical_rank']}[{d}]",
                    r["bergman_factor_rank"].max_residual, 1e-6),
                   (f"fit[{d}]", r["bergman_factor_fit"].max_residual, 1e-6)]
    assert record(11, "finite-rank Bergman factorization with rational factors", checks)


def test_criterion_12_meromorphic_on_double():
    checks = []
    for d in ("annulus", "blob3"):
        e = report(d)["double_fit"]
        deg = max(max(a["degree"]) for a in e.details["attempts"])
        assert deg <= 6
        checks.append((f"f_b'/f_a' heldout[{d}]", e.max_residual, 1e-6))
    assert record(12, "boundary fit of f_b'/f_a' rational in (f_a, f_b), bidegree <= 6", checks)


def test_criterion_13_spectral_convergence():
    e = report("disc")["refinement"]
    err64, err128 = e.details["err64"], e.details["err128"]
    assert record(13, f"disc oracle error 64 -> 128 nodes ({err64:.1e} -> {err128:.1e})",
                  [("err128 / max(1e-4 err64, 1e-12)", err128 / max(1e-4 * err64, 1e-12), 1.0)])


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
