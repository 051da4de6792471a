"""Config parsing, experiment envelopes, CLI behavior, determinism."""

import json

import pytest

from statforge import cli
from statforge import experiments as xp
from statforge.errors import DomainError
from statforge.rng import RandomStream


class TestConfigParsing:
    def test_minimal_config(self):
        cfg = xp.parse_config_text(
            'experiment = "bs-price"\nseed = 11\n'
            'spot = 100.0\nstrike = 100.0\n')
        assert cfg.experiment == "bs-price"
        assert cfg.seed == 11
        params = cfg.resolved_params()
        assert params["spot"] == 100.0
        assert params["rate"] == 0.05  # schema default

    def test_comments_and_types(self):
        cfg = xp.parse_config_text(
            "experiment = \"jl\"  # projection study\n"
            "seed = 3\n"
            "epsilon = 0.5\n"
            "replicates = 20\n")
        params = cfg.resolved_params()
        assert params["epsilon"] == 0.5
        assert params["replicates"] == 20

    def test_missing_seed_names_key(self):
        with pytest.raises(DomainError, match="seed"):
            xp.parse_config_text('experiment = "jl"\n')

    def test_unknown_experiment(self):
        with pytest.raises(DomainError, match="unknown experiment"):
            xp.parse_config_text('experiment = "alchemy"\nseed = 1\n')

    def test_unknown_key_names_key(self):
        with pytest.raises(DomainError, match="volatilityy"):
            xp.parse_config_text(
                'experiment = "bs-price"\nseed = 1\nvolatilityy = 0.2\n')

    def test_malformed_value(self):
        with pytest.raises(DomainError, match="malformed"):
            xp.parse_config_text('experiment = "jl"\nseed = 1\nepsilon = abc\n')

    def test_override_wins_and_is_echoed(self):
        cfg = xp.parse_config_text('experiment = "bayes"\nseed = 1\nn = 10\n',
                                   overrides={"seed": 99, "n": 25})
        assert cfg.seed == 99
        assert cfg.resolved_params()["n"] == 25

    def test_type_mismatch(self):
        cfg = xp.parse_config_text('experiment = "bayes"\nseed = 1\nn = 2.5\n')
        with pytest.raises(DomainError, match="expects int"):
            cfg.resolved_params()


class TestEnvelope:
    def _small_config(self, seed=5):
        return xp.ExperimentConfig(experiment="ci-coverage", seed=seed,
                                   params={"replicates": 300})

    def test_deterministic_rerun(self):
        first = xp.run_experiment(self._small_config())
        second = xp.run_experiment(self._small_config())
        a, b = first.to_dict(), second.to_dict()
        a.pop("wall_time_s"), b.pop("wall_time_s")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_worker_count_invariance(self):
        serial = xp.run_experiment(self._small_config(), workers=1)
        parallel = xp.run_experiment(self._small_config(), workers=3)
        a, b = serial.to_dict(), parallel.to_dict()
        a.pop("wall_time_s"), b.pop("wall_time_s")
        assert a == b

    @pytest.mark.parametrize("tag,params", [
        ("jl", {"replicates": 6, "n_points": 8, "ambient_dim": 30,
                "epsilon": 0.5, "delta": 0.2}),
        ("james-stein", {"replicates": 500, "tolerance": 1.0}),
        ("er", {"n_vertices": 60, "graphs": 8, "c_low": 0.3, "c_high": 3.0}),
    ])
    def test_worker_invariance_across_mechanisms(self, tag, params):
        cfg = xp.ExperimentConfig(experiment=tag, seed=9, params=params)
        one = xp.run_experiment(cfg, workers=1).to_dict()
        many = xp.run_experiment(cfg, workers=2).to_dict()
        one.pop("wall_time_s"), many.pop("wall_time_s")
        assert one == many

    def test_different_seeds_differ(self):
        one = xp.run_experiment(self._small_config(seed=5))
        two = xp.run_experiment(self._small_config(seed=6))
        assert one.metrics[0].value != two.metrics[0].value

    def test_every_metric_carries_method_tag(self):
        env = xp.run_experiment(xp.ExperimentConfig(
            experiment="bayes", seed=2, params={"replicates": 100}))
        for metric in env.metrics:
            assert metric.method


def _scaled_uniform_sum(scale, r, stream):
    return scale * float(stream.uniforms(3).sum())


class TestFanOut:
    def test_matches_serial(self):
        from functools import partial

        root = RandomStream(77)
        serial = xp.fan_out(partial(_scaled_uniform_sum, 2.0), 20, root, workers=1)
        spread = xp.fan_out(partial(_scaled_uniform_sum, 2.0), 20, root, workers=4)
        assert serial == spread


class TestCLI:
    def _write_config(self, tmp_path, body):
        path = tmp_path / "config.txt"
        path.write_text(body)
        return str(path)

    def test_list_experiments(self, capsys):
        assert cli.main(["list-experiments"]) == 0
        out = capsys.readouterr().out.split()
        assert len(out) == 18
        assert "bs-price" in out

    def test_run_writes_reports(self, tmp_path, capsys):
        cfg = self._write_config(
            tmp_path, 'experiment = "bayes"\nseed = 4\nreplicates = 100\n')
        code = cli.main(["run", cfg, "--out", str(tmp_path / "out")])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["passed"] is True
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["experiment"] == "bayes"
        lines = (tmp_path / "out" / "metrics.csv").read_text().splitlines()
        assert lines[0].startswith("name,")
        assert len(lines) == 1 + len(payload["metrics"])

    def test_seed_flag_overrides_file(self, tmp_path, capsys):
        cfg = self._write_config(
            tmp_path, 'experiment = "bayes"\nseed = 4\nreplicates = 100\n')
        cli.main(["run", cfg, "--seed", "123"])
        payload = json.loads(capsys.readouterr().out)
        assert payload["seed"] == 123

    def test_fresh_seed_recorded(self, tmp_path, capsys):
        cfg = self._write_config(
            tmp_path, 'experiment = "bayes"\nseed = 4\nreplicates = 100\n')
        cli.main(["run", cfg, "--fresh-seed"])
        payload = json.loads(capsys.readouterr().out)
        assert payload["seed"] != 4

    def test_set_flag(self, tmp_path, capsys):
        cfg = self._write_config(
            tmp_path, 'experiment = "bayes"\nseed = 4\nreplicates = 100\n')
        cli.main(["run", cfg, "--set", "n=20"])
        payload = json.loads(capsys.readouterr().out)
        assert payload["params"]["n"] == 20

    def test_tolerance_failure_exit_code(self, tmp_path):
        cfg = self._write_config(
            tmp_path,
            'experiment = "ci-coverage"\nseed = 4\nreplicates = 300\n'
            'tolerance = 0.000001\n')
        assert cli.main(["run", cfg]) == 2

    def test_error_exit_code(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path, 'experiment = "alchemy"\nseed = 4\n')
        assert cli.main(["run", cfg]) == 1
        assert "unknown experiment" in capsys.readouterr().err

    def test_missing_file_is_error(self):
        assert cli.main(["run", "/nonexistent/path.cfg"]) == 1

    def test_csv_format(self, tmp_path, capsys):
        cfg = self._write_config(
            tmp_path, 'experiment = "bayes"\nseed = 4\nreplicates = 100\n')
        assert cli.main(["run", cfg, "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("name,")

    def test_dist_subcommand(self, capsys):
        assert cli.main(["dist", "normal:0,1", "--cdf", "0"]) == 0
        assert float(capsys.readouterr().out) == 0.5
        assert cli.main(["dist", "chisquared:4", "--pdf", "1.0"]) == 0
        capsys.readouterr()
        assert cli.main(["dist", "normal:0,1", "--quantile", "0.975"]) == 0
        assert abs(float(capsys.readouterr().out) - 1.959964) < 1e-5

    def test_dist_bad_tag(self, capsys):
        assert cli.main(["dist", "weibull:1,2", "--pdf", "0.5"]) == 1
        assert cli.main(["dist", "normal:0", "--pdf", "0.5"]) == 1


class TestSmallRunsOfHeavyExperiments:
    """Every registered experiment runs end to end at toy scale."""

    SMALL = {
        "mse-variance": {"replicates": 2000, "rel_tol": 0.2},
        "ci-coverage": {"replicates": 400, "tolerance": 0.05},
        "jl": {"replicates": 5, "n_points": 10, "ambient_dim": 40,
               "epsilon": 0.5, "delta": 0.2},
        "er": {"n_vertices": 200, "graphs": 20, "c_low": 0.4, "c_high": 2.0},
        "mle": {"replicates": 60, "n": 800, "ks_tol": 0.2},
        "regression": {"replicates": 300, "ks_tol": 0.1,
                       "coverage_tol": 0.06, "size_tol": 0.05},
        "lasso-bound": {"replicates": 5, "n": 40, "p": 20, "s": 2,
                        "re_probes": 200},
        "glm": {"replicates": 40, "n": 400, "coverage_tol": 0.15},
        "irt": {"examinees": 300, "items": 25, "min_rate": 0.95},
        "test-size": {"replicates": 500},
        "wilks": {"replicates_z": 2000, "replicates_t": 2000, "n_t": 50,
                  "replicates_logistic": 150, "n_logistic": 300,
                  "ks_z_tol": 0.05, "ks_t_tol": 0.06, "ks_logistic_tol": 0.12},
        "brownian": {"steps": 2000, "paths": 40, "qv_tol": 0.1},
        "ito": {"steps": 2000, "paths": 200, "identity_tol": 0.1},
        "feynman-kac": {"paths": 20_000, "paths_control": 5000, "steps": 20},
        "bs-price": {"paths": 50_000},
        "gauss-conc": {"samples": 50_000, "k": 25, "grid_points": 9},
        "james-stein": {"replicates": 4000, "tolerance": 0.3},
        "bayes": {"replicates": 150},
    }

    @pytest.mark.parametrize("tag", sorted(SMALL))
    def test_runs_and_passes(self, tag):
        env = xp.run_experiment(xp.ExperimentConfig(
            experiment=tag, seed=20260810, params=self.SMALL[tag]))
        failed = [m.name for m in env.metrics if m.passed is False]
        assert not failed, f"{tag} failed metrics: {failed}"
