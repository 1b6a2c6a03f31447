import json
import subprocess
import sys

import numpy as np
import pytest

from oracles import omega
from vortexchoreo.cli import RunConfig, main
from vortexchoreo.errors import ConfigError


def run(tmp_path, command, config, name="run"):
    cfg_path = tmp_path / f"{name}.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / name
    code = main([command, "--config", str(cfg_path), "--out", str(out)])
    return code, out


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def triangle_config(s=0.5):
    return {
        "domain": {"kind": "unit_disk"},
        "n_vortices": 3,
        "polygon_radius": s,
        "t_end": 2 * np.pi / omega(3, s),
        "n_samples": 50,
    }


class TestConfig:
    def test_defaults(self):
        cfg = RunConfig.from_dict({})
        assert cfg.domain.kind == "unit_disk" and cfg.n_vortices == 1 and cfg.jobs == 1

    @pytest.mark.parametrize("data, field", [
        ({"tolerances": {"rtol": -1e-10}}, "tolerances.rtol"),
        ({"tolerances": {"speed": 1.0}}, "tolerances.speed"),
        ({"n_vortices": 0}, "n_vortices"),
        ({"r_grid": [0.01, 0.02]}, "r_grid"),
        ({"r_grid": {"start": 0.08, "end": 0.01, "steps": 1}}, "r_grid.steps"),
        ({"n_vortices": 2, "initial_positions": [[0.1, 0.0]]}, "initial_positions"),
        ({"n_vortices": 2, "strengths": [1.0, 0.0]}, "strengths"),
        ({"t_end": 0}, "t_end"),
        ({"colour": "red"}, "colour"),
        ({"domain": {"kind": "unit_disk", "shape": 1}}, "domain.shape"),
    ])
    def test_invalid(self, data, field):
        with pytest.raises(ConfigError) as info:
            RunConfig.from_dict(data)
        assert info.value.field == field

    def test_roundtrip(self):
        data = {
            "domain": {"kind": "perturbed_disk", "coefficients": [[0.05, 0.0]]},
            "n_vortices": 2,
            "r_grid": {"start": 0.08, "end": 0.01, "steps": 10},
            "tolerances": {"newton_tol": 1e-10},
        }
        cfg = RunConfig.from_dict(data)
        assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


class TestSimulate:
    def test_triangle_one_period(self, tmp_path):
        code, out = run(tmp_path, "simulate", triangle_config())
        assert code == 0
        rows = read_csv(out / "trajectory.csv")
        assert rows.shape == (50, 8)
        assert np.max(np.abs(rows[-1, 1:7] - rows[0, 1:7])) < 1e-7
        m = manifest(out)
        assert m["energy_drift_ok"]
        expected = RunConfig.from_dict({**triangle_config(), "output_dir": str(out)})
        assert RunConfig.from_dict(m["config"]) == expected
        assert (out / "timing.json").exists()

    def test_csv_precision(self, tmp_path):
        _, out = run(tmp_path, "simulate", triangle_config())
        first = (out / "trajectory.csv").read_text().splitlines()[1].split(",")
        assert float(first[1]) == 0.5
        assert first[0] == "0"
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t,re_z1,im_z1,re_z2,im_z2,re_z3,im_z3,H"

    def test_center_is_stationary(self, tmp_path):
        config = {"initial_positions": [[0.0, 0.0]], "t_end": 10.0}
        code, out = run(tmp_path, "simulate", config)
        assert code == 0
        rows = read_csv(out / "trajectory.csv")
        assert np.max(np.abs(rows[:, 1] + 1j * rows[:, 2])) < 1e-10

    def test_negative_tolerance(self, tmp_path, capsys):
        config = {**triangle_config(), "tolerances": {"energy_drift_tol": -1.0}}
        code, out = run(tmp_path, "simulate", config)
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert err["field"] == "tolerances.energy_drift_tol"
        assert "tolerances.energy_drift_tol" in err["message"]

    def test_missing_field(self, tmp_path, capsys):
        code, _ = run(tmp_path, "simulate", {"initial_positions": [[0.1, 0.0]]})
        assert code == 2
        assert json.loads(capsys.readouterr().err)["field"] == "t_end"

    @pytest.mark.parametrize("positions", [[[1.5, 0.0]], [[0.2, 0.0], [0.2, 0.0]]])
    def test_runtime_failure(self, tmp_path, positions):
        config = {"n_vortices": len(positions), "initial_positions": positions, "t_end": 1.0}
        code, _ = run(tmp_path, "simulate", config)
        assert code == 3

    def test_bad_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


class TestCheckDomain:
    @pytest.mark.parametrize("domain", [
        {"kind": "unit_disk"},
        {"kind": "perturbed_disk", "coefficients": [[0.05, 0.0]]},
    ])
    def test_passes(self, tmp_path, domain):
        code, out = run(tmp_path, "check-domain", {"domain": domain})
        assert code == 0
        report = json.loads((out / "assumption_report.json").read_text())
        assert report["pass"]
        assert report["max_grad_rho_deviation"] < 1e-5
        assert report["max_hessian_deviation"] < 1e-5
        assert manifest(out)["geometry"]["pass"]

    def test_not_injective(self, tmp_path, capsys):
        config = {"domain": {"kind": "perturbed_disk", "coefficients": [[0.6, 0.0]]}}
        code, _ = run(tmp_path, "check-domain", config)
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "MapNotInjective" and err["field"] == "domain.coefficients"


class TestFindFamily:
    def test_disk_triangle(self, tmp_path):
        config = {"n_vortices": 3, "r_grid": {"start": 0.08, "end": 0.01, "steps": 10}}
        code, out = run(tmp_path, "find-family", config)
        assert code == 0
        m = manifest(out)
        assert m["complete"] and m["pass"]
        rep = json.loads((out / "asymptotics.json").read_text())
        assert rep["distance_exponent"] >= 2.5 and rep["speed_exponent"] >= 1.2
        assert (out / "distance_residual.dat").exists()

    def test_perturbed_pair(self, tmp_path):
        config = {"domain": {"kind": "perturbed_disk", "coefficients": [[0.05, 0.0]]}, "n_vortices": 2,
                  "r_grid": {"start": 0.08, "end": 0.01, "steps": 10}}
        code, out = run(tmp_path, "find-family", config)
        assert code == 0
        fam = json.loads((out / "family.json").read_text())
        assert len(fam["orbits"]) == 10
        L = fam["total_length"]
        for orb in fam["orbits"]:
            assert abs(orb["T"] - 2 * np.pi * orb["r"] * L) < 1e-12
            assert (out / orb["trajectory"]).exists()

    def test_above_r_max(self, tmp_path, capsys):
        code, out = run(tmp_path, "find-family", {"n_vortices": 3, "r_grid": [0.15, 0.05]})
        assert code == 4
        err = json.loads(capsys.readouterr().err)
        assert "r_max=0.1" in err["message"]
        assert manifest(out)["complete"] is False

    def test_deterministic(self, tmp_path):
        config = {"n_vortices": 2, "r_grid": [0.08, 0.04, 0.02, 0.01]}
        _, a = run(tmp_path, "find-family", config, "a")
        _, b = run(tmp_path, "find-family", config, "b")
        files = sorted(p.name for p in a.iterdir() if p.name != "timing.json")
        assert files == sorted(p.name for p in b.iterdir() if p.name != "timing.json")
        for name in files:
            text_a = (a / name).read_bytes()
            text_b = (b / name).read_bytes()
            if name == "manifest.json":
                text_a = text_a.replace(str(a).encode(), b"")
                text_b = text_b.replace(str(b).encode(), b"")
            assert text_a == text_b, name


class TestLoops:
    def test_limit_orbit_then_residual(self, tmp_path):
        domain = {"kind": "perturbed_disk", "coefficients": [[0.05, 0.0]]}
        code, out = run(tmp_path, "limit-orbit", {"domain": domain}, "limit")
        assert code == 0
        rows = read_csv(out / "limit_orbit.csv")
        assert rows.shape == (256, 3)
        L = manifest(out)["total_length"]
        assert rows[-1, 0] < L
        for r in (0.0, 0.02):
            config = {"domain": domain, "n_vortices": 3, "loop_file": str(out / "limit_orbit.csv"), "r": r}
            code, res = run(tmp_path, "residual", config, f"res{r}")
            assert code == 0
            assert read_csv(res / "residual.csv").shape == (256, 3)
            m = manifest(res)
            if r == 0.0:
                assert m["max_residual"] < 1e-8
            else:
                assert m["orthogonality_relative"] < 1e-8

    def test_disk_limit_orbit_values(self, tmp_path):
        code, out = run(tmp_path, "limit-orbit", {"epsilon": 0.1, "loop_samples": 128})
        rows = read_csv(out / "limit_orbit.csv")
        assert abs(manifest(out)["period"] - np.pi) < 1e-12
        assert np.max(np.abs(np.hypot(rows[:, 1], rows[:, 2]) - 0.9)) < 1e-12

    def test_epsilon_too_large(self, tmp_path):
        code, _ = run(tmp_path, "limit-orbit", {"epsilon": 0.5})
        assert code == 2


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"epsilon": 0.2}))
    proc = subprocess.run([sys.executable, "-m", "vortexchoreo", "limit-orbit", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "o" / "limit_orbit.csv").exists()
