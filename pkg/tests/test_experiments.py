import hashlib
import json
import math
import os

import numpy as np
import pytest
from scipy import stats

from mixtest.cli import main
from mixtest.errors import ConfigurationError, ParseError
from mixtest.experiments import (
    DESK_MAX_REPLICAS, ExperimentConfig, atomic_write, cell_seeds, chain_from_dict, chain_to_dict,
    consistency_harness, dataset_to_csv, default_n_grid, ingest_csv, pima_dataset, run_experiment,
    simulate_dataset,
)
from mixtest.samplers import ChainConfig, MixedAlpha

POISSON = {"kind": "family", "family": "poisson", "params": [4.0]}


def small_config(tmp_path=None, **kw):
    base = dict(test="poisson-geometric", data_source=POISSON, a0_grid=(0.5,), n_grid=(20, 40),
                replicas=2, chain=ChainConfig(300, record_allocations=False),
                outputs=None if tmp_path is None else str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


def sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


class TestSimulate:
    def test_byte_identical(self):
        a = dataset_to_csv(simulate_dataset(POISSON, 7, n=1000))
        b = dataset_to_csv(simulate_dataset(POISSON, 7, n=1000))
        assert a == b
        assert a != dataset_to_csv(simulate_dataset(POISSON, 8, n=1000))

    def test_geometric_mean(self):
        d = simulate_dataset({"kind": "pair-truth", "pair": "poisson-geometric", "component": 1}, 3, n=500)
        assert abs(d.y.mean() - 9.0) < 1.0

    def test_regression_design(self):
        d = simulate_dataset({"kind": "regression"}, 1, n=200)
        assert np.all((d.X[:, 3] > 10) & (d.X[:, 3] < 11))
        assert set(np.unique(d.X[:, 2])) <= {0.0, 1.0}

    def test_empty_sample(self):
        assert simulate_dataset(POISSON, 0, n=0).n == 0

    @pytest.mark.parametrize("source", [
        {"kind": "family", "family": "cauchy"},
        {"kind": "warp"},
        {"family": "poisson"},
        {"kind": "family", "family": "poisson", "params": [-1.0]},
    ])
    def test_invalid_source(self, source):
        with pytest.raises(Exception) as info:
            simulate_dataset(source, 0, n=5)
        assert isinstance(info.value, (ConfigurationError, ValueError)) or "Error" in type(info.value).__name__


class TestCsv:
    def test_iid_round_trip(self, tmp_path):
        text = dataset_to_csv(simulate_dataset({"kind": "family", "family": "normal", "params": [0, 1]}, 2, n=50))
        p = tmp_path / "x.csv"
        p.write_text(text)
        assert dataset_to_csv(ingest_csv(p, "iid")) == text

    def test_survival_round_trip(self, tmp_path):
        d = simulate_dataset({"kind": "survival", "family": "gumbel", "censor_rate": 0.2}, 4, n=30)
        p = tmp_path / "s.csv"
        p.write_text(dataset_to_csv(d, "survival"))
        back = ingest_csv(p, "survival")
        np.testing.assert_array_equal(back.y, d.y)
        np.testing.assert_array_equal(back.censored, d.censored)

    def test_time_column_is_log_transformed(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("time,censored\n1,0\n2.5,1\n")
        d = ingest_csv(p, "survival")
        np.testing.assert_allclose(d.y, [0.0, -math.log(2.5)])
        assert tuple(d.censored) == (False, True)

    def test_nonpositive_time(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("time,censored\n1,0\n0,1\n")
        with pytest.raises(ParseError) as info:
            ingest_csv(p, "survival")
        assert info.value.line == 3

    def test_line_numbers(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("x\n1\n2\nthree\n")
        with pytest.raises(ParseError) as info:
            ingest_csv(p, "iid")
        assert info.value.line == 4

    def test_field_count(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("y,x1\n1,2\n0\n")
        with pytest.raises(ParseError) as info:
            ingest_csv(p, "binary-regression")
        assert info.value.line == 3

    def test_binary_labels(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("type,bmi\nYes,30\nno,20\n1,25\n")
        d = ingest_csv(p, "binary-regression")
        assert tuple(d.y) == (1.0, 0.0, 1.0)
        assert d.X.shape == (3, 2) and np.all(d.X[:, 0] == 1)

    def test_pima_fixture(self):
        d = pima_dataset()
        assert d.n == 200 and d.X.shape == (200, 2)
        assert set(np.unique(d.y)) == {0.0, 1.0}


class TestAtomicWrite:
    def test_writes_and_cleans_up(self, tmp_path):
        atomic_write(tmp_path / "sub" / "f.txt", "hello")
        assert (tmp_path / "sub" / "f.txt").read_text() == "hello"
        assert os.listdir(tmp_path / "sub") == ["f.txt"]

    def test_interrupted_write_leaves_nothing(self, tmp_path, monkeypatch):
        target = tmp_path / "f.txt"
        target.write_text("old")

        def boom(*a, **k):
            raise KeyboardInterrupt
        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(KeyboardInterrupt):
            atomic_write(target, "new")
        assert target.read_text() == "old"
        assert os.listdir(tmp_path) == ["f.txt"]


class TestConfig:
    def test_json_round_trip(self):
        cfg = small_config(chain=ChainConfig(500, 50, alpha_proposal=MixedAlpha(1.0, 0.25),
                                             record_allocations=False))
        back = ExperimentConfig.from_json(cfg.to_json())
        assert back.to_dict() == cfg.to_dict()

    @pytest.mark.parametrize("change", [
        {"a0_grid": ()}, {"n_grid": ()}, {"replicas": 0}, {"a0_grid": (0.0,)},
        {"test": "nope"}, {"sampler": "hmc"}, {"replicas": DESK_MAX_REPLICAS + 1},
        {"n_grid": (20_000,)},
    ])
    def test_validation(self, change):
        with pytest.raises(ConfigurationError):
            small_config(**change)

    def test_full_scale_unlocks_caps(self):
        assert small_config(replicas=100, full_scale=True).replicas == 100

    def test_schema_version(self):
        d = small_config().to_dict()
        d["schema_version"] = 99
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict(d)
        del d["schema_version"]
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict(d)

    def test_unknown_key(self):
        d = small_config().to_dict()
        d["colour"] = "blue"
        with pytest.raises(ConfigurationError, match="colour"):
            ExperimentConfig.from_dict(d)

    def test_chain_dict(self):
        c = chain_from_dict(chain_to_dict(ChainConfig(700, 70, alpha_substeps=3)))
        assert (c.iterations, c.burn_in, c.alpha_substeps) == (700, 70, 3)
        with pytest.raises(ConfigurationError):
            chain_from_dict({"alpha_proposal": {"kind": "hmc"}})

    def test_default_grid(self):
        g = default_n_grid()
        assert g[0] == 1 and g[-1] == 1000 and list(g) == sorted(set(g))
        assert len(g) <= 20

    def test_cell_seeds_distinct(self):
        seeds = {cell_seeds(0, a, b, r) for a in range(3) for b in range(3) for r in range(3)}
        assert len(seeds) == 27


class TestRunExperiment:
    def test_determinism_checksum(self, tmp_path):
        run_experiment(small_config(tmp_path / "a"))
        run_experiment(small_config(tmp_path / "b"))
        assert sha(tmp_path / "a" / "results.csv") == sha(tmp_path / "b" / "results.csv")
        # the digests differ only in the recorded output directory
        da, db = (json.loads((tmp_path / d / "summary.json").read_text()) for d in "ab")
        da["config"].pop("outputs"), db["config"].pop("outputs")
        assert da == db
        assert sorted(os.listdir(tmp_path / "a")) == ["results.csv", "summary.json", "timings.csv"]

    def test_worker_pool_matches_serial(self, tmp_path):
        run_experiment(small_config(tmp_path / "a"))
        run_experiment(small_config(tmp_path / "b"), workers=2)
        assert sha(tmp_path / "a" / "results.csv") == sha(tmp_path / "b" / "results.csv")

    def test_rows_in_unit_interval(self):
        rows, digest = run_experiment(small_config())
        assert len(rows) == 2 * 2 * 3
        assert all(0.0 <= r.value <= 1.0 for r in rows)
        assert {c["estimator"] for c in digest["cells"]} == {"post_median_alpha", "post_mean_alpha", "bf_post_prob"}

    def test_failures_are_recorded(self):
        zeros = {"kind": "family", "family": "poisson", "params": [1e-9]}
        rows, digest = run_experiment(small_config(data_source=zeros, n_grid=(3,), replicas=1))
        sampled = [r for r in rows if r.estimator != "bf_post_prob"]
        assert all("ImproperPosteriorError" in r.error and math.isnan(r.value) for r in sampled)
        # the exact Bayes factor is still defined at the all-zero sample
        oracle = [r for r in rows if r.estimator == "bf_post_prob"]
        assert oracle[0].value == pytest.approx(0.5) and not oracle[0].error
        assert sum(c["errors"] for c in digest["cells"]) == 2

    def test_poisson_median_trend(self):
        cfg = ExperimentConfig("poisson-geometric", {"kind": "pair-truth", "pair": "poisson-geometric"},
                               (0.1, 0.5), default_n_grid(10, 1000, 6), replicas=5,
                               chain=ChainConfig(3000, record_allocations=False), oracle=False)
        _, digest = run_experiment(cfg)
        for a0 in cfg.a0_grid:
            means = [c["mean"] for c in digest["cells"]
                     if c["a0"] == a0 and c["estimator"] == "post_median_alpha"]
            assert stats.spearmanr(cfg.n_grid, means)[0] > 0.9

    def test_geometric_medians_near_zero(self):
        cfg = ExperimentConfig("poisson-geometric",
                               {"kind": "pair-truth", "pair": "poisson-geometric", "component": 1},
                               (0.1, 0.2, 0.4, 0.5), (500,), replicas=5,
                               chain=ChainConfig(5000, record_allocations=False), oracle=False)
        rows, _ = run_experiment(cfg)
        assert all(r.value < 0.1 for r in rows if r.estimator == "post_median_alpha")


class TestConsistency:
    def test_singleton_grid(self):
        rows = consistency_harness("point-null", 1, [30], 2, chain=ChainConfig(300, record_allocations=False))
        assert len(rows) == 1 and rows[0]["n"] == 30

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            consistency_harness("point-null", 2, [30], 2)
        with pytest.raises(ConfigurationError):
            consistency_harness("point-null", 0, [], 2)

    def test_concentration_and_rates(self):
        rows = consistency_harness("normal-variance", 0, [50, 100, 500], 20,
                                   chain=ChainConfig(5000, record_allocations=False))
        dev = [r["abs_dev_median"] for r in rows]
        assert dev[0] > dev[1] > dev[2]
        mix = [r["log_n_log_1m_mean_alpha"] for r in rows]
        bf = [r["log_1m_post_prob"] for r in rows]
        # the mixture statistic leads at moderate n; the exact Bayes factor
        # statistic falls linearly in n and overtakes it by n = 500
        assert mix[0] < bf[0] and mix[1] < bf[1]
        assert bf[2] < mix[2]


class TestCli:
    def _err(self, capsys):
        return json.loads(capsys.readouterr().err.strip().splitlines()[-1])

    def test_simulate_to_stdout(self, capsys):
        assert main(["simulate", "--pair", "poisson-geometric", "--n", "5", "--seed", "1"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "x"

    def test_simulate_then_oracle(self, tmp_path, capsys):
        p = tmp_path / "d.csv"
        assert main(["simulate", "--pair", "normal-variance", "--n", "20", "--out", str(p)]) == 0
        assert main(["oracle", "--pair", "normal-variance", "--data", str(p)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert 0 < out["posterior_prob_m1"] < 1 and out["n"] == 20

    def test_usage_error(self, capsys):
        assert main(["sweep"]) == 2
        assert self._err(capsys)["error"] == "UsageError"

    def test_parse_error_carries_line(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("x\n1\noops\n")
        assert main(["oracle", "--pair", "normal-variance", "--data", str(p)]) == 2
        err = self._err(capsys)
        assert err["error"] == "ParseError" and err["line"] == 3

    def test_config_error(self, tmp_path, capsys):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        assert main(["run", "--config", str(p)]) == 2
        assert self._err(capsys)["error"] == "ConfigurationError"

    def test_runtime_error(self, tmp_path, capsys):
        p = tmp_path / "d.csv"
        p.write_text("x\n1\n")
        assert main(["oracle", "--pair", "normal-laplace", "--data", str(p)]) == 1
        assert "message" in self._err(capsys)

    def test_run_from_config(self, tmp_path, capsys):
        cfg = small_config()
        p = tmp_path / "c.json"
        p.write_text(cfg.to_json())
        assert main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "results.csv").exists()
        assert json.loads(capsys.readouterr().out)["schema_version"] == 1

    def test_sweep(self, tmp_path, capsys):
        assert main(["sweep", "--pair", "point-null", "--truth", "1", "--a0", "0.5", "--n", "20",
                     "--replicas", "2", "--iterations", "200", "--out", str(tmp_path)]) == 0
        assert len(json.loads(capsys.readouterr().out)["cells"]) == 3

    def test_sweep_caps(self, capsys):
        assert main(["sweep", "--pair", "point-null", "--replicas", "50", "--iterations", "10"]) == 2

    def test_consistency(self, capsys):
        assert main(["consistency", "--pair", "point-null", "--truth", "1", "--n", "30",
                     "--replicas", "1", "--iterations", "200"]) == 0
        assert len(json.loads(capsys.readouterr().out)) == 1

    def test_survival(self, capsys):
        assert main(["survival", "--simulate", "gumbel", "--n", "200", "--iterations", "300"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["n"] == 200 and "gumbel_weight_median" in out

    def test_survival_improper(self, tmp_path, capsys):
        p = tmp_path / "s.csv"
        p.write_text("time,censored\n2,0\n2,0\n")
        assert main(["survival", "--data", str(p), "--iterations", "10"]) == 1
        assert self._err(capsys)["error"] == "ImproperPosteriorError"
