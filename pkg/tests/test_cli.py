import json
import os

import numpy as np
import pytest

from sigmaevo.cli import (DataSpec, RunConfig, load_run, main, read_norms_csv,
                          run_semilinear, save_run, write_norms_csv)
from sigmaevo.errors import ConfigError


def small_config_doc(tmp_path, **overrides):
    doc = {
        "params": {"sigma": 1, "delta": 0, "m": 1, "n": 1, "p": 3,
                   "target": "on_u", "r": 1},
        "mu": "hoelder:0.5",
        "grid": {"n": 1, "N": 256, "L": 30.0},
        "solver": {"dt": 0.05, "t_end": 5.0, "dealias_fraction": 2 / 3,
                   "blowup_threshold": None, "snapshot_stride": 4,
                   "store_fields": False},
        "data": {"u0": {"family": "gaussian", "amplitude": 0.01,
                        "width": 1.0, "center": 0.0},
                 "u1": {"family": "zero"}},
        "seed": 0,
        "output_dir": str(tmp_path / "run"),
    }
    doc.update(overrides)
    return doc


def write_config(tmp_path, name="config.json", **overrides):
    doc = small_config_doc(tmp_path, **overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path, doc


class TestDataSpec:
    def test_gaussian(self):
        from sigmaevo.spectral import GridSpec
        g = GridSpec(1, 256, 10.0)
        u = DataSpec("gaussian", amplitude=2.0, width=1.5, center=1.0).build(g)
        x = g.axis()
        assert u == pytest.approx(2.0 * np.exp(-(((x - 1.0) / 1.5) ** 2)))

    def test_cosine_bump_compact_support(self):
        from sigmaevo.spectral import GridSpec
        g = GridSpec(1, 512, 10.0)
        u = DataSpec("cosine-bump", amplitude=1.0, width=2.0).build(g)
        x = g.axis()
        assert np.all(u[np.abs(x) >= 2.0] == 0.0)
        assert np.max(u) == pytest.approx(1.0, abs=1e-3)

    def test_unknown_family(self):
        with pytest.raises(ConfigError):
            DataSpec("wavelet")


class TestRunConfig:
    def test_roundtrip_lossless(self, tmp_path):
        _, doc = write_config(tmp_path)
        config = RunConfig.from_dict(doc)
        again = RunConfig.from_dict(config.to_dict())
        assert config.to_dict() == again.to_dict()

    def test_missing_key_named(self, tmp_path):
        doc = small_config_doc(tmp_path)
        del doc["params"]
        with pytest.raises(ConfigError, match="params"):
            RunConfig.from_dict(doc)

    def test_invalid_parameter_propagates(self, tmp_path):
        doc = small_config_doc(tmp_path)
        doc["params"]["delta"] = 3.0
        with pytest.raises(ConfigError, match="delta"):
            RunConfig.from_dict(doc)


class TestPersistence:
    def test_save_and_load_run(self, tmp_path):
        path, doc = write_config(tmp_path, solver={
            "dt": 0.05, "t_end": 2.0, "dealias_fraction": 2 / 3,
            "blowup_threshold": None, "snapshot_stride": 4, "store_fields": True})
        config = RunConfig.load(path)
        traj = run_semilinear(config)
        outdir = tmp_path / "saved"
        save_run(outdir, config, traj)
        config2, traj2 = load_run(outdir)
        assert config2.to_dict() == config.to_dict()
        assert np.array_equal(traj2.times, traj.times)
        assert traj2.norms == pytest.approx(traj.norms, rel=1e-15)
        assert np.array_equal(traj2.snapshots_u, traj.snapshots_u)
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert "u1_mean_positive" in manifest

    def test_norms_csv_roundtrip_exact(self, tmp_path):
        from sigmaevo.params import EquationParams
        from sigmaevo.solver import Trajectory
        from sigmaevo.spectral import GridSpec
        rng = np.random.default_rng(0)
        traj = Trajectory(times=np.linspace(0, 1, 7),
                          norms=rng.standard_normal((7, 6)) ** 2,
                          grid=GridSpec(1, 8, 1.0),
                          params=EquationParams(sigma=1, delta=0, p=2))
        path = tmp_path / "norms.csv"
        write_norms_csv(path, traj)
        header, data = read_norms_csv(path)
        assert header[0] == "t"
        assert np.array_equal(data[:, 1:], traj.norms)


class TestCommands:
    def test_mu_classify_exit_zero(self, capsys):
        assert main(["mu-classify", "log-power:1"]) == 0
        out = capsys.readouterr().out
        assert "divergent" in out

    def test_rates_prints_critical_exponent(self, capsys):
        assert main(["rates", "--sigma", "1", "--delta", "0", "--m", "1",
                     "--n", "1", "--p", "3", "--r", "1"]) == 0
        out = capsys.readouterr().out
        assert "p* = 3" in out
        assert "-0.25" in out

    def test_linear_decay_run(self, tmp_path, capsys):
        path, _ = write_config(
            tmp_path,
            grid={"n": 1, "N": 1024, "L": 100.0},
            solver={"dt": 0.25, "t_end": 40.0, "dealias_fraction": 2 / 3,
                    "blowup_threshold": None, "snapshot_stride": 2,
                    "store_fields": False},
            data={"u0": {"family": "gaussian", "amplitude": 1.0, "width": 1.0,
                         "center": 0.0},
                  "u1": {"family": "zero"}})
        out = tmp_path / "lin"
        rc = main(["linear-decay", "--config", str(path), "--out", str(out),
                   "--window-lo", "10", "--window-hi", "40",
                   "--tolerance", "0.08"])
        assert rc == 0
        assert (out / "norms.csv").exists()
        assert (out / "fit.csv").exists()
        assert "PASS" in capsys.readouterr().out

    def test_semilinear_blowup_is_exit_zero(self, tmp_path, capsys):
        path, _ = write_config(
            tmp_path,
            mu="log-power:1",
            solver={"dt": 0.01, "t_end": 30.0, "dealias_fraction": 2 / 3,
                    "blowup_threshold": 50.0, "snapshot_stride": 10,
                    "store_fields": False},
            data={"u0": {"family": "zero"},
                  "u1": {"family": "gaussian", "amplitude": 5.0, "width": 0.5,
                         "center": 0.0}})
        out = tmp_path / "blow"
        rc = main(["semilinear", "--config", str(path), "--out", str(out)])
        assert rc == 0
        assert "blow-up at" in capsys.readouterr().out
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["blowup"]["reason"] == "escape"

    def test_invalid_config_exit_nonzero(self, tmp_path, capsys):
        doc = small_config_doc(tmp_path)
        doc["params"]["m"] = 5.0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        rc = main(["semilinear", "--config", str(path)])
        assert rc != 0
        assert "m must lie in [1, 2)" in capsys.readouterr().err

    def test_missing_config_named_cleanly(self, tmp_path, capsys):
        rc = main(["semilinear", "--config", str(tmp_path / "nope.json")])
        assert rc != 0
        assert "cannot read config" in capsys.readouterr().err

    def test_malformed_json_named_cleanly(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        rc = main(["semilinear", "--config", str(path)])
        assert rc != 0
        assert "not valid JSON" in capsys.readouterr().err

    def test_blowup_scan(self, tmp_path, capsys):
        path, _ = write_config(
            tmp_path,
            mu="log-power:1",
            grid={"n": 1, "N": 512, "L": 20.0},
            solver={"dt": 0.005, "t_end": 30.0, "dealias_fraction": 2 / 3,
                    "blowup_threshold": 1e4, "snapshot_stride": 20,
                    "store_fields": True},
            data={"u0": {"family": "zero"},
                  "u1": {"family": "gaussian", "amplitude": 3.0, "width": 0.5,
                         "center": 0.0}})
        rundir = tmp_path / "scan"
        assert main(["semilinear", "--config", str(path), "--out", str(rundir)]) == 0
        assert main(["blowup-scan", str(rundir)]) == 0
        rows = (rundir / "functional.csv").read_text().strip().splitlines()
        assert rows[0] == "R,I_R,J_R,g,G,verdict"
        assert len(rows) == 11
        assert all(line.endswith("ok") for line in rows[1:])

    def test_check_inequalities(self, tmp_path):
        rc = main(["check-inequalities", "--fields", "10", "--N", "128",
                   "--kmax", "16", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "inequalities.csv").exists()

    def test_fit_subcommand_appends_ledger(self, tmp_path):
        t = np.linspace(1, 50, 60)
        v = 3 * (1 + t) ** -0.5
        from sigmaevo.params import EquationParams
        from sigmaevo.solver import Trajectory
        from sigmaevo.spectral import GridSpec
        traj = Trajectory(times=t, norms=np.tile(v[:, None], (1, 6)),
                          grid=GridSpec(1, 8, 1.0),
                          params=EquationParams(sigma=1, delta=0, p=2))
        norms_path = tmp_path / "norms.csv"
        write_norms_csv(norms_path, traj)
        ledger = tmp_path / "fits.csv"
        rc = main(["fit", str(norms_path), "L2_u", "--window-lo", "5",
                   "--window-hi", "50", "--predicted", "-0.5",
                   "--tolerance", "0.05", "--ledger", str(ledger)])
        assert rc == 0
        lines = ledger.read_text().strip().splitlines()
        assert len(lines) == 2
        assert "PASS" in lines[1]


class TestReproducibility:
    def test_bit_identical_norms_from_persisted_config(self, tmp_path):
        # a run re-created from the manifest of a previous run reproduces
        # norms.csv byte for byte
        path, _ = write_config(tmp_path)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        config = RunConfig.load(path)
        save_run(out1, config, run_semilinear(config))
        persisted, _ = load_run(out1)
        save_run(out2, persisted, run_semilinear(persisted))
        assert (out1 / "norms.csv").read_bytes() == (out2 / "norms.csv").read_bytes()


class TestSweep:
    def test_sweep_summary_matches_members(self, tmp_path):
        base = small_config_doc(tmp_path)
        base["solver"]["t_end"] = 1.0
        sweep_doc = {"base": base,
                     "sweep": {"data.u0.amplitude": [0.01, 0.02],
                               "params.p": [2.5, 3.0]},
                     "output_dir": str(tmp_path / "sw")}
        cfg = tmp_path / "sweep.json"
        cfg.write_text(json.dumps(sweep_doc))
        rc = main(["sweep", "--config", str(cfg), "--workers", "2"])
        assert rc == 0
        summary = (tmp_path / "sw" / "summary.csv").read_text().strip().splitlines()
        assert len(summary) == 5
        for line in summary[1:]:
            cells = line.split(",")
            rundir = cells[2]
            _, traj = load_run(rundir)
            assert cells[-1] == repr(float(traj.column("L2_u")[-1]))
            with open(os.path.join(rundir, "manifest.json")) as fh:
                member = json.load(fh)
            assert member["config"]["data"]["u0"]["amplitude"] == float(cells[0])
