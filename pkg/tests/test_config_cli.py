import json
import math

import numpy as np
import pytest
import yaml

from weightcurv import cli, config, runner
from weightcurv.errors import ConfigError


def write(path, data):
    path.write_text(yaml.safe_dump(data))
    return path


def test_config_validation():
    cfg = config.config_from_mapping({"model": "sphere(2)", "experiment": "synge"})
    assert cfg.label == "synge-sphere(2)" and cfg.seed == 0
    assert cfg.with_overrides(dt=None, seed=4).seed == 4
    cases = [
        ({"model": "sphere(2)"}, "missing_field"),
        ({"model": "sphere(2)", "experiment": "nope"}, "unknown_experiment"),
        ({"model": "sphere(2)", "experiment": "synge", "dt": -1.0}, "bad_number"),
        ({"model": "sphere(2)", "experiment": "synge", "samples": 0}, "bad_number"),
        ({"model": "sphere(2)", "experiment": "synge", "colour": 1}, "unknown_field"),
        ({"model": "sphere(2)", "experiment": "synge", "options": {"tol": -1}}, "bad_number"),
    ]
    for data, code in cases:
        with pytest.raises(ConfigError) as exc:
            config.config_from_mapping(data)
        assert exc.value.code == code


def test_density_expression():
    d = config.density_from_expression("0.1*cos(r)", 2)
    p = np.array([0.4, 1.0])
    assert d.f(p) == pytest.approx(0.1 * math.cos(0.4))
    assert np.allclose(d.grad(p), [-0.1 * math.sin(0.4), 0.0])
    assert config.density_from_expression(0, 2) is None
    with pytest.raises(ConfigError):
        config.density_from_expression("w + 1", 2)


def test_manifest_and_packaged_configs(tmp_path):
    assert config.load_manifest(write(tmp_path / "empty.yaml", None)) == []
    packaged = runner.load_suite()
    assert len(packaged) == 14
    assert {c.experiment for c in packaged} == set(config.EXPERIMENT_IDS)
    with pytest.raises(ConfigError):
        config.load_manifest(write(tmp_path / "bad.yaml", {"configs": 3}))


def test_conjugate_radius_run(tmp_path):
    cfg = config.config_from_mapping({"model": "sphere(2,1)", "experiment": "conjugate-radius", "f": 0,
                                      "samples": 2, "t_max": 4.0})
    rep = runner.run(cfg, out_dir=tmp_path)
    assert rep.status == "pass" and rep.exit_code == 0
    for v in rep.verdicts:
        assert v.bound == pytest.approx(math.pi, abs=1e-4) and v.measured == pytest.approx(math.pi, abs=1e-4)
    data = json.loads((tmp_path / "conjugate-radius-sphere_2_1_.json").read_text())
    assert data["theorem"] == "conjugate-radius"
    assert (tmp_path / "conjugate-radius-sphere_2_1_.csv").exists()


def test_constant_classifier_on_hemisphere():
    cfg = config.config_from_mapping({"model": "zero-secbar/1", "experiment": "constant-classifier", "samples": 5})
    rep = runner.run(cfg)
    d = rep.verdicts[0].details
    assert rep.status == "pass" and d["psi_identically_zero"] and abs(d["K"]) < 1e-6


def test_hypothesis_failure_is_not_applicable(tmp_path):
    path = write(tmp_path / "p.yaml", {"model": "zero-secbar/1", "experiment": "pinching-window", "samples": 4})
    assert cli.main(["run", str(path), "--out", str(tmp_path / "out")]) == 0
    data = json.loads(next((tmp_path / "out").glob("*.json")).read_text())
    assert data["status"] == "n/a"
    assert data["extra"]["hypothesis_report"]["window_holds"] is False


def test_cli_error_codes(tmp_path, capsys):
    bad = write(tmp_path / "bad.yaml", {"model": "sphere(2)", "experiment": "nope"})
    assert cli.main(["run", str(bad)]) == 2
    model = write(tmp_path / "model.yaml", {"model": "klein-bottle", "experiment": "synge"})
    assert cli.main(["run", str(model)]) == 2
    failing = write(tmp_path / "fail.yaml", {"model": "hyperbolic(2)", "experiment": "synge"})
    assert cli.main(["run", str(failing)]) == 1
    ok = write(tmp_path / "ok.yaml", {"model": "sphere(2)", "experiment": "synge"})
    assert cli.main(["run", str(ok), "--dt", "-1"]) == 2
    assert cli.main(["suite", str(write(tmp_path / "m.yaml", None))]) == 0
    assert cli.main(["suite", str(write(tmp_path / "m2.yaml", {"configs": ["bad.yaml"]}))]) == 2
    assert cli.main(["list-models"]) == 0
    assert cli.main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    assert "cigar" in out and "killing" in out


def test_suite_table_and_determinism(tmp_path):
    manifest = write(tmp_path / "m.yaml", {"configs": [
        {"model": "zero-secbar/3b", "experiment": "curvature-scan", "samples": 5, "seed": 3},
        {"model": "sphere(2)", "experiment": "synge"},
        {"model": "zero-secbar/1", "experiment": "pinching-window", "samples": 4},
    ]})
    for d in ("a", "b"):
        assert cli.main(["suite", str(manifest), "--out", str(tmp_path / d)]) == 0
    csvs = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    assert "theorem_table.csv" in csvs and len(csvs) == 4
    for name in csvs:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    table = (tmp_path / "a" / "theorem_table.csv").read_text().splitlines()
    assert table[0] == "theorem,status,runs,passed,failed,n/a"
    assert "pinching-hypothesis,n/a,1,0,0,1" in table


def test_parallel_suite_matches_serial(tmp_path):
    configs = [config.config_from_mapping({"model": "sphere(2)", "experiment": "synge"}),
               config.config_from_mapping({"model": "zero-secbar/1", "experiment": "curvature-scan", "samples": 3})]
    serial, t1 = runner.suite(configs, out_dir=tmp_path / "s")
    parallel, t2 = runner.suite(configs, out_dir=tmp_path / "p", workers=2)
    assert t1 == t2
    names = sorted(p.name for p in (tmp_path / "s").glob("*.csv"))
    assert len(names) == 3
    for name in names:
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "p" / name).read_bytes()
