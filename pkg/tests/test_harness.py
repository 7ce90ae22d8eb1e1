import copy
import csv
import json
import math

import numpy as np
import pytest

from pmcsurf import cli, harness
from pmcsurf.ambient import membership_residual
from pmcsurf.harness import ConfigError, parse_config
from pmcsurf.surfaces import SurfaceSpec

SMALL = {
    "schema_version": 1,
    "surfaces": [
        {"name": "cp", "spec": {"family": "curve_product", "params": {"k_alpha": 1.0, "k_beta": math.sqrt(2)}},
         "grid": {"nx": 3, "ny": 3, "margin": 0.2}, "expect": {"theta": 0.0, "Hnorm2": 0.75}},
        {"name": "s1", "spec": {"family": "special_1", "params": {"a": 1.0, "b": 0.5, "c": 0.0}},
         "grid": {"nx": 3, "ny": 3, "margin": 0.2}, "checks": ["pmc", "hopf", "kahler", "intersection"]},
    ],
}


def with_change(path, value):
    cfg = copy.deepcopy(SMALL)
    node = cfg
    for k in path[:-1]:
        node = node[k]
    node[path[-1]] = value
    return cfg


@pytest.mark.parametrize("path,value", [
    (("bogus",), 1),
    (("settings",), {"fd_stepp": 1e-3}),
    (("surfaces", 0, "colour"), "red"),
    (("surfaces", 0, "spec", "shape"), "round"),
    (("surfaces", 0, "spec", "params", "k_gamma"), 1.0),
    (("surfaces", 0, "grid", "nz"), 3),
    (("surfaces", 0, "expect", "area"), 1.0),
    (("surfaces", 0, "tolerances"), {"speed": 1e-3}),
    (("surfaces", 0, "tolerances"), {"pmc": -1.0}),
    (("surfaces", 0, "checks"), ["pmc", "magic"]),
    (("surfaces", 0, "spec", "family"), "torus"),
    (("schema_version",), 2),
    (("settings",), {"tol_scale": 0}),
])
def test_config_rejections(path, value):
    with pytest.raises(ConfigError):
        parse_config(with_change(path, value))


def test_config_defaults_and_overrides():
    cfg = parse_config(SMALL, {"fd_step": 5e-4, "tol_scale": 2.0, "ode_step": 2e-3})
    assert cfg.settings["fd_step"] == 5e-4 and cfg.settings["tol_scale"] == 2.0
    assert cfg.surfaces[1].checks == ("pmc", "hopf", "kahler", "intersection")
    assert cfg.surfaces[0].checks == harness.CHECKS
    # the ODE step reaches families that integrate
    assert cfg.surfaces[1].spec.params["step"] == 2e-3


@pytest.mark.parametrize("name", ["vanishing_theta.json", "nonvanishing.json"])
def test_bundled_configs_parse(name):
    cfg = harness.load_config(harness.bundled_config(name))
    assert cfg.surfaces


def test_small_suite_and_determinism(monkeypatch):
    cfg = parse_config(SMALL)
    r1, rows = harness.run_suite(cfg)
    assert r1["summary"]["all_pass"], json.dumps(harness._jsonable(r1["summary"]))
    assert len(rows["cp"]) == 9
    cp = r1["surfaces"][0]
    assert set(cp) >= {"frenet_pde", "adapted_pde", "nucomp_disjunct"}
    assert cp["checks"]["hopf"]["metrics"]["theta_abs_max"] < 1e-8
    monkeypatch.setenv(harness.THREADS_ENV, "3")
    r2, _ = harness.run_suite(cfg)
    r1["provenance"].pop("threads")
    r2["provenance"].pop("threads")
    assert json.dumps(harness._jsonable(r1)) == json.dumps(harness._jsonable(r2))


def test_empty_check_list():
    report, _ = harness.run_suite(parse_config({"schema_version": 1, "surfaces": []}))
    assert report["surfaces"] == [] and report["summary"]["all_pass"]
    cfg = with_change(("surfaces", 0, "checks"), [])
    report, _ = harness.run_suite(parse_config({"schema_version": 1, "surfaces": cfg["surfaces"][:1]}))
    assert report["surfaces"][0]["checks"] == {} and report["summary"]["all_pass"]


def test_constructor_failure_is_reported_per_surface():
    cfg = copy.deepcopy(SMALL)
    cfg["surfaces"][1]["spec"]["params"]["a"] = -1.0
    report, _ = harness.run_suite(parse_config(cfg))
    bad = report["surfaces"][1]
    assert bad["status"] == "error" and "ProfileError" in bad["error"]
    assert report["surfaces"][0]["status"] == "ok"
    assert not report["summary"]["all_pass"]


def test_theta_expectation_failure_is_detected():
    cfg = with_change(("surfaces", 1, "expect"), {"theta_abs": 0.5})
    report, _ = harness.run_suite(parse_config(cfg))
    assert not report["surfaces"][1]["checks"]["hopf"]["pass"]


def test_parse_params_forms():
    items = harness.parse_params("a=0:1:0.5; b=2|3, c=sqrt(1+a^2)")
    assert items[0] == ("a", "values", [0.0, 0.5, 1.0])
    assert items[1] == ("b", "values", [2.0, 3.0])
    points = list(harness.expand_params(items))
    assert len(points) == 6
    assert points[-1]["c"] == pytest.approx(math.sqrt(2))
    for bad in ("a", "a=1:2:0", "a=__import__('os')", "a=b+1"):
        with pytest.raises(ConfigError):
            list(harness.expand_params(harness.parse_params(bad)))


def test_scan_vanishing_line(tmp_path):
    out = tmp_path / "scan.csv"
    rows = harness.scan_grid("curve_product", "k_alpha=0:2:0.25, k_beta=sqrt(1+k_alpha^2)", out)
    assert len(rows) == 9
    assert all(r["theta_abs"] < 1e-6 for r in rows)
    header = next(csv.reader(open(out)))
    assert header[:2] == ["k_alpha", "k_beta"] and "max_pmc_residual" in header


def test_scan_theta_formula():
    rows = harness.scan_grid("curve_product", "k_alpha=1, k_beta=0.5:2:0.25")
    for r in rows:
        assert r["theta_re"] == pytest.approx(0.5 * (1 - r["k_beta"] ** 2) + 0.5, abs=1e-8)


def test_scan_special_norm_and_warning_rows():
    rows = harness.scan_grid("special_1", "b=0.25|0.5|1, c=0|0.5, a=1+c^2")
    ok = [r for r in rows if r["status"] == "ok"]
    skipped = [r for r in rows if r["status"] != "ok"]
    assert len(rows) == 6 and skipped
    for r in ok:
        assert r["Hnorm2"] == pytest.approx(r["b"] / 4, abs=1e-4)
        assert r["C_sign_pattern"] == "C1=C2"
    with pytest.raises(ConfigError):
        harness.scan_grid("special_1", "zeta=1")
    with pytest.raises(ConfigError):
        harness.scan_grid("torus", "a=1")


def test_mesh_obj_charts(tmp_path):
    spec = SurfaceSpec("curve_product", {"k_alpha": 0.0, "k_beta": 1.0})
    paths = harness.export_mesh(spec, 20, 20, "obj_charts", tmp_path, name="cp")
    assert len(paths) == 2
    sphere = [l.split()[1:3] for l in open(paths[0]) if l.startswith("v ")]
    hyper = [l.split()[1:3] for l in open(paths[1]) if l.startswith("v ")]
    assert len(sphere) == len(hyper) == 400
    # the sphere factor only depends on x: 20 distinct image points
    assert len({(round(float(a), 9), round(float(b), 9)) for a, b in sphere}) == 20
    attrs = [l for l in open(paths[0]) if l.startswith("# attr ")]
    assert len(attrs) == 400
    faces = [l for l in open(paths[0]) if l.startswith("f ")]
    assert len(faces) == 2 * 19 * 19


def test_mesh_poincare_disk(tmp_path):
    spec = SurfaceSpec("special_1", {"a": 1.0, "b": 0.5, "c": 0.0})
    _, hyp = harness.export_mesh(spec, 8, 8, "obj_charts", tmp_path, name="s1")
    pts = np.array([[float(t) for t in l.split()[1:3]] for l in open(hyp) if l.startswith("v ")])
    assert (np.hypot(pts[:, 0], pts[:, 1]) < 1).all()


def test_mesh_csv6d(tmp_path):
    spec = SurfaceSpec("special_2", {"a": 1.0, "b": 0.5, "c": 0.0, "h0": 2.0})
    (path,) = harness.export_mesh(spec, 5, 4, "csv6d", tmp_path, name="s2")
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == 20
    for r in rows:
        p = np.array([float(r[f"p{k}"]) for k in range(1, 7)])
        assert membership_residual(p) < 1e-8
        assert float(r["membership_residual"]) < 1e-8
    with pytest.raises(ConfigError):
        harness.export_mesh(spec, 2, 2, "ply", tmp_path)


def test_cli_verify(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(SMALL))
    out = tmp_path / "out" / "report.json"
    assert cli.main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["schema_version"] == 1
    header = next(csv.reader(open(tmp_path / "out" / "report_00.csv")))
    assert header == ["x", "y", "E", "F", "G", "u", "Hnorm2", "theta_re", "theta_im", "C1", "C2", "smin_dphi",
                      "smin_dpsi", "pmc_residual", "pseudo_umbilical"]
    assert (tmp_path / "out" / "report_00.png").stat().st_size > 0
    assert "cp: pmc=PASS" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "surfaces": [], "x": 1}))
    assert cli.main(["verify", "--config", str(bad), "--out", str(tmp_path / "r.json")]) == 2
    assert cli.main(["verify", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "r.json")]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert cli.main(["verify", "--config", str(broken), "--out", str(tmp_path / "r.json")]) == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(with_change(("surfaces", 1, "expect"), {"theta_abs": 0.5})))
    assert cli.main(["verify", "--config", str(cfg), "--out", str(tmp_path / "r.json"), "--no-figures"]) == 1
    # tightening every tolerance a millionfold makes the suite fail
    cfg.write_text(json.dumps(SMALL))
    assert cli.main(["--tol-scale", "1e-6", "verify", "--config", str(cfg), "--out", str(tmp_path / "r.json"),
                     "--no-figures"]) == 1


def test_cli_scan_and_mesh(tmp_path):
    out = tmp_path / "scan.csv"
    assert cli.main(["scan", "--family", "curve_product", "--params", "k_alpha=1, k_beta=1|2",
                     "--out", str(out)]) == 0
    assert out.exists() and out.with_suffix(".png").exists()
    assert cli.main(["scan", "--family", "special_1", "--params", "q=1", "--out", str(out)]) == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(SMALL))
    assert cli.main(["mesh", "--config", str(cfg), "--format", "csv6d", "--out", str(tmp_path / "m")]) == 0
    assert len(list((tmp_path / "m").glob("*.csv"))) == 2


def test_cli_bundled_nonvanishing(tmp_path):
    out = tmp_path / "nv.json"
    assert cli.main(["verify", "--config", "nonvanishing.json", "--out", str(out), "--no-figures"]) == 0
    s = json.loads(out.read_text())["surfaces"][0]
    assert s["checks"]["hopf"]["metrics"]["theta_abs_max"] == pytest.approx(0.25, abs=1e-3)
    assert s["vanishing_theta"] is False and "adapted_pde" not in s
