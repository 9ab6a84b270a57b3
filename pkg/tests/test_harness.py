import pytest

import coxsim.harness as harness
from coxsim.cli import main
from coxsim.geometry import Disk, Rect
from coxsim.harness import (ConfigError, ExperimentConfig, ValidationSettings,
                            config_from_ini, format_check_table, parse_window,
                            run_experiment, run_validation_suite,
                            write_validation_csv)
from coxsim.pointprocess import config_from_csv

SMALL = ValidationSettings.scaled(2000)


class TestExperimentConfig:
    def test_valid_satellites(self):
        cfg = ExperimentConfig("satellites", 2.0, (10, 20, 40, 80), 1000, 0)
        assert cfg.window is None

    def test_cox_gets_default_window(self):
        cfg = ExperimentConfig("cox-line", 1.0, (5, 10, 20, 40), 1000, 0)
        assert cfg.window == Disk((0.0, 0.0), 1.0)

    def test_bad_model(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("hawkes", 1.0, (1, 2, 3, 4), 1000, 0)

    def test_short_sweep(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("satellites", 1.0, (10, 20, 40), 1000, 0)

    def test_non_increasing_sweep(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("satellites", 1.0, (10, 20, 20, 40), 1000, 0)

    def test_low_reps(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("satellites", 1.0, (10, 20, 40, 80), 500, 0)

    def test_bad_target(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("cox-line", 1.0, (5, 10, 20, 40), 1000, 0,
                             target_intensity="double-c")

    def test_non_integer_orbit_sweep(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("satellites", 1.0, (10.5, 20, 40, 80), 1000, 0)


class TestParseWindow:
    def test_disk(self):
        assert parse_window("disk:0,0,1") == Disk((0.0, 0.0), 1.0)

    def test_rect(self):
        assert parse_window("rect:0,0,2,1") == Rect(0.0, 0.0, 2.0, 1.0)

    def test_garbage(self):
        for bad in ("sphere:1", "disk:1,2", "rect:0,0,1", "disk:a,b,c"):
            with pytest.raises(ConfigError):
                parse_window(bad)


class TestIniConfig:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[experiment]\nmodel = satellites\nc = 2.0\n"
                        "sweep = 10 20 40 80\nreps = 1500\nseed = 7\n"
                        "out = results\nplots = true\n")
        cfg, extras = config_from_ini(str(path))
        assert cfg.model == "satellites"
        assert cfg.sweep == (10.0, 20.0, 40.0, 80.0)
        assert cfg.reps == 1500 and cfg.seed == 7
        assert extras == {"out": "results", "plots": True}

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[experiment]\nmodel = satellites\nsweep = 1 2 3 4\n"
                        "bogus_key = 1\n")
        with pytest.raises(ConfigError, match="bogus_key"):
            config_from_ini(str(path))

    def test_missing_model(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[experiment]\nsweep = 1 2 3 4\n")
        with pytest.raises(ConfigError, match="model"):
            config_from_ini(str(path))

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            config_from_ini("/nonexistent/exp.ini")

    def test_window_key(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[experiment]\nmodel = cox-line\nc = 1\n"
                        "sweep = 5 10 20 40\nwindow = rect:0,0,1,1\n")
        cfg, _ = config_from_ini(str(path))
        assert cfg.window == Rect(0, 0, 1, 1)


class TestRunExperiment:
    def test_satellite_smoke(self, tmp_path):
        cfg = ExperimentConfig("satellites", 2.0, (4, 6, 9, 14), 1000, 3,
                               calibration_reps=2000)
        res = run_experiment(cfg, out_dir=str(tmp_path), plots=True)
        assert len(res.rows) == 4
        assert res.fit is not None
        for row in res.rows:
            assert row["bound"] == pytest.approx(8.0 / row["param"])
            assert row["bound_respected"] == 1
        text = (tmp_path / "results.csv").read_text()
        lines = text.strip().splitlines()
        assert lines[0] == "# schema_version=1"
        assert len(lines) == 6  # comment + header + 4 rows
        assert (tmp_path / "fit.csv").exists()
        assert (tmp_path / "results.svg").exists()

    def test_cox_smoke_fixed_target(self, tmp_path):
        cfg = ExperimentConfig("cox-line", 1.0, (4, 6, 9, 14), 1000, 3,
                               target_intensity="half-c", calibration_reps=1000)
        res = run_experiment(cfg, out_dir=str(tmp_path))
        assert len(res.rows) == 4
        for row in res.rows:
            assert row["target_intensity"] == pytest.approx(0.5)
            assert row["eff_intensity"] == pytest.approx(0.5, abs=0.1)

    def test_determinism_byte_identical(self, tmp_path):
        cfg = ExperimentConfig("satellites", 2.0, (4, 6, 9, 14), 1000, 11,
                               calibration_reps=2000)
        run_experiment(cfg, out_dir=str(tmp_path / "a"))
        run_experiment(cfg, out_dir=str(tmp_path / "b"))
        assert ((tmp_path / "a" / "results.csv").read_bytes()
                == (tmp_path / "b" / "results.csv").read_bytes())

    def test_stderr_shrinks_with_reps(self):
        # quadrupling the replicate count shrinks stderr by ~2x (within 20%)
        base = dict(model="satellites", c=2.0, sweep=(4, 6, 9, 14), seed=21,
                    calibration_reps=2000)
        row_small = harness.run_sweep_point(
            ExperimentConfig(reps=1500, **base), 0, 6.0)
        row_big = harness.run_sweep_point(
            ExperimentConfig(reps=6000, **base), 0, 6.0)
        ratio = row_small["w_stderr"] / row_big["w_stderr"]
        assert 1.6 <= ratio <= 2.4

    def test_unknown_regions_preset(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("satellites", 2.0, (4, 6, 9, 14), 1000, 0,
                             regions="exotic")

    def test_partial_flush(self, tmp_path, monkeypatch):
        cfg = ExperimentConfig("satellites", 2.0, (4, 6, 9, 14), 1000, 3,
                               calibration_reps=2000)
        original = harness.run_sweep_point

        def failing(cfg_, idx, value):
            if idx == 2:
                raise RuntimeError("killed")
            return original(cfg_, idx, value)

        monkeypatch.setattr(harness, "run_sweep_point", failing)
        with pytest.raises(RuntimeError):
            run_experiment(cfg, out_dir=str(tmp_path))
        lines = (tmp_path / "results.csv").read_text().strip().splitlines()
        assert len(lines) == 4  # comment + header + 2 completed rows


class TestValidationSuite:
    def test_selected_subsets(self):
        rows = run_validation_suite(0, SMALL, which="coarea")
        assert all(r.name.startswith("coarea") for r in rows)
        rows = run_validation_suite(0, SMALL, which="bounds")
        assert all(r.passed for r in rows)

    def test_deterministic(self):
        a = run_validation_suite(5, SMALL, which="invariance")
        b = run_validation_suite(5, SMALL, which="invariance")
        assert a == b

    def test_csv_format(self, tmp_path):
        rows = run_validation_suite(0, SMALL, which="bounds")
        path = tmp_path / "validation.csv"
        write_validation_csv(str(path), rows)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "# schema_version=1"
        assert lines[1] == "check_name,lhs,rhs,stderr,pass,seed"
        assert len(lines) == 2 + len(rows)

    def test_table_format(self):
        rows = run_validation_suite(0, SMALL, which="bounds")
        table = format_check_table(rows)
        assert "checks passed" in table


class TestCli:
    def test_bound_satellites(self, capsys):
        assert main(["bound", "satellites", "--c", "2", "--n", "100"]) == 0
        out = capsys.readouterr().out
        assert "0.08" in out

    def test_bound_cox(self, capsys):
        assert main(["bound", "cox-line", "--c", "1", "--lam", "10"]) == 0
        assert "0.5333" in capsys.readouterr().out

    def test_simulate_to_dir(self, tmp_path):
        out = tmp_path / "sim"
        assert main(["simulate", "cox-line", "--c", "2", "--lam", "10",
                     "--seed", "4", "--out", str(out)]) == 0
        cfg = config_from_csv((out / "points.csv").read_text())
        assert cfg.space == "plane"
        assert (out / "summary.json").exists()

    def test_simulate_satellites_stdout(self, capsys):
        assert main(["simulate", "satellites", "--c", "3", "--n", "5"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("x,y,z")

    def test_check_exit_codes(self, tmp_path):
        out = tmp_path / "chk"
        code = main(["check", "bounds", "--seed", "0", "--out", str(out)])
        assert code == 0
        assert (out / "validation.csv").exists()

    def test_check_determinism_bytes(self, tmp_path):
        for sub in ("a", "b"):
            assert main(["check", "coarea", "--seed", "9",
                         "--out", str(tmp_path / sub)]) == 0
        assert ((tmp_path / "a" / "validation.csv").read_bytes()
                == (tmp_path / "b" / "validation.csv").read_bytes())

    def test_experiment_config_file(self, tmp_path, capsys):
        ini = tmp_path / "exp.ini"
        out = tmp_path / "res"
        ini.write_text("[experiment]\nmodel = satellites\nc = 2.0\n"
                       "sweep = 4 6 9 14\nreps = 1000\nseed = 2\n"
                       f"calibration_reps = 2000\nout = {out}\n")
        assert main(["experiment", "converge-sat", "--config", str(ini)]) == 0
        assert (out / "results.csv").exists()
        assert "rate fit" in capsys.readouterr().out

    def test_experiment_bad_config_exit_2(self, tmp_path, capsys):
        ini = tmp_path / "exp.ini"
        ini.write_text("[experiment]\nmodel = satellites\nsweep = 4 6 9 14\n"
                       "mystery = 1\n")
        assert main(["experiment", "converge-sat", "--config", str(ini)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_experiment_model_mismatch_exit_2(self, tmp_path):
        ini = tmp_path / "exp.ini"
        ini.write_text("[experiment]\nmodel = satellites\nsweep = 4 6 9 14\n")
        assert main(["experiment", "converge-cox", "--config", str(ini)]) == 2
