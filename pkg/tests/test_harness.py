import csv
import json

import numpy as np
import pytest

from szegokit import cli
from szegokit.harness import ConfigError, export_field, fit_target, load_config, verify_suite

DISC = {"domain": {"preset": {"kind": "disc", "params": [1.0]}}, "nodes": 128, "basis": {"a": [0.0, 0.0]}}
ANNULUS = {"domain": {"preset": {"kind": "annulus", "params": [0.5]}}, "nodes": 256}


@pytest.fixture(scope="module")
def disc_report():
    return verify_suite(DISC, "all")


def test_disc_suite_passes_tightly(disc_report):
    assert disc_report.passed, disc_report.summary_lines()
    kernel_ids = {"disc_oracles", "szego_representation", "garabedian_representation", "garabedian_boundary",
                  "ahlfors_representation", "caratheodory", "green_w_representation", "principal_two_path",
                  "poisson_mass", "poisson_reproduction", "bergman_factor_hermitian", "bergman_factor_fit"}
    for e in disc_report.entries:
        if e.identity in kernel_ids:
            assert e.max_residual <= 1e-9, e.identity


def test_pass_flag_is_residual_below_threshold(disc_report):
    for e in disc_report.entries:
        assert e.passed == (e.max_residual <= e.threshold)


def test_report_is_deterministic(disc_report):
    assert verify_suite(DISC, "all").to_json() == disc_report.to_json()
    d = json.loads(disc_report.to_json())
    assert d["seed"] == 20240601 and d["config"]["nodes"] == 128
    assert all(e["elapsed"] == 0.0 for e in d["entries"])


def test_refinement_entry(disc_report):
    e = next(e for e in disc_report.entries if e.identity == "refinement")
    assert e.details["err128"] <= max(1e-4 * e.details["err64"], 1e-12)


def test_failures_become_entries():
    cfg = dict(DISC, thresholds={"szego_representation": 0.0})
    rep = verify_suite(cfg, "szego")
    bad = [e for e in rep.entries if not e.passed]
    assert [e.identity for e in bad] == ["szego_representation"]


@pytest.mark.parametrize("cfg, msg", [
    ({}, "domain"),
    ({"domain": {"preset": {"kind": "annulus", "params": [2]}}}, "invalid domain"),
    ({"domain": {"preset": "disc"}, "nodes": 15}, "nodes"),
    ({"domain": {"preset": "disc"}, "thresholds": {"bogus": 1}}, "threshold"),
    ({"domain": {"preset": "disc"}, "basis": {"a": "x"}}, "basis.a"),
])
def test_invalid_configs(cfg, msg):
    with pytest.raises(ConfigError, match=msg):
        load_config(cfg)


def test_unknown_suite():
    with pytest.raises(ConfigError):
        verify_suite(DISC, "everything")


def _read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_export_disc_caratheodory(tmp_path):
    rows = _read(export_field(DISC, "caratheodory", "3x3", tmp_path / "c.csv"))
    assert rows[0][0:2] == ["x", "y"] and rows[0][2].startswith("caratheodory@")
    centre = [r for r in rows[1:] if float(r[0]) == 0 and float(r[1]) == 0][0]
    assert float(centre[2]) == pytest.approx(1.0, abs=1e-12)
    assert sum(r[2] == "" for r in rows[1:]) == 8


def test_export_disc_poisson_ring(tmp_path):
    rows = _read(export_field(DISC, "poisson", "3x3", tmp_path / "p.csv", point=0.0))
    vals = np.array([float(r[2]) for r in rows[1:]])
    assert vals.size == 128 and np.abs(vals - 1 / (2 * np.pi)).max() < 1e-13


def test_export_annulus_green_negative(tmp_path):
    rows = _read(export_field(ANNULUS, "green", "21x21", tmp_path / "g.csv", point=0.7))
    vals = [float(r[2]) for r in rows[1:] if r[2] != ""]
    assert len(vals) > 50 and max(vals) < 0


def test_export_complex_columns(tmp_path):
    rows = _read(export_field(DISC, "szego", "3x3", tmp_path / "s.csv"))
    assert rows[0][2].startswith("re(") and rows[0][3].startswith("im(")


def test_export_errors(tmp_path):
    with pytest.raises(ConfigError):
        export_field(DISC, "pressure", "3x3", tmp_path / "x.csv")
    with pytest.raises(ConfigError):
        export_field(DISC, "green", "3by3", tmp_path / "x.csv")
    with pytest.raises(OSError, match="no_such_dir"):
        export_field(DISC, "caratheodory", "3x3", tmp_path / "no_such_dir" / "x.csv")


def test_fit_target_disc():
    res = fit_target(DISC, "caratheodory")
    assert res["ok"] and res["best"]["heldout_residual"] <= 1e-8


def test_fit_target_double_annulus():
    res = fit_target({"domain": {"preset": {"kind": "annulus", "params": [0.5]}}, "nodes": 128}, "fb_over_fa")
    assert res["ok"] and res["heldout"] <= 1e-6
    winner = min(res["attempts"], key=lambda t: t["heldout"])
    assert res["b"] == winner["b"] and res["heldout"] == winner["heldout"]


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "disc.json"
    cfg.write_text(json.dumps(DISC))
    out = tmp_path / "rep.json"
    assert cli.main(["verify", str(cfg), "--suite", "propermap", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"] is True
    strict = tmp_path / "strict.json"
    strict.write_text(json.dumps(dict(DISC, thresholds={"torus_modulus": 0.0})))
    assert cli.main(["verify", str(strict), "--suite", "propermap", "--out", str(out)]) == 1
    assert cli.main(["verify", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["domain", "validate", str(bad)]) == 2
    assert cli.main(["solve", "szego", str(cfg), "--a", "nope"]) == 2
    assert cli.main(["solve", "szego", str(cfg), "--a", "5,0"]) == 2


def test_cli_solve_and_ahlfors(tmp_path, capsys):
    cfg = tmp_path / "disc.json"
    cfg.write_text(json.dumps(DISC))
    out = tmp_path / "s.json"
    assert cli.main(["--threads", "1", "solve", "szego", str(cfg), "--a", "0.2,0.1", "--out", str(out)]) == 0
    S = np.array(json.loads(out.read_text())["S"])
    assert S.shape == (128, 2)
    capsys.readouterr()
    assert cli.main(["ahlfors", str(cfg), "--w", "0.3,0", "--at", "0.5,0"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["values"]["0.5,0.0"][0] == pytest.approx((0.5 - 0.3) / (1 - 0.15), abs=1e-12)


def test_cli_domain_validate(tmp_path, capsys):
    cfg = tmp_path / "a.json"
    cfg.write_text(json.dumps(ANNULUS))
    assert cli.main(["domain", "validate", str(cfg)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["connectivity"] == 2 and rep["curve_lengths"][0] == pytest.approx(np.pi)
