import json

import numpy as np
import pytest

from drto.channel import read_trace
from drto.cli import main
from drto.config import ConfigError, ExperimentConfig, apply_env_overrides, load_config
from drto.harness import CSV_COLUMNS, bench_runtime, run_experiment, verify_allocator


def small_cfg(tmp_path, **kw):
    kw.setdefault("total_frames", 40)
    kw.setdefault("algorithms", ("pure-tc", "pure-sat", "enum"))
    return ExperimentConfig(output_dir=tmp_path, record_timing=False, **kw)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.total_frames == 30000 and cfg.n_st == 5

    def test_file_and_env(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"experiment": {"n_st": 3, "algorithms": ["enum"]},
                                    "quantizer": {"delta_big": 16}}))
        cfg = ExperimentConfig.load(path, env={"DRTO_EXPERIMENT__TOTAL_FRAMES": "12",
                                               "DRTO_SYSTEM__LAMBDA": "0.25"})
        assert cfg.n_st == 3
        assert cfg.total_frames == 12
        assert cfg.system.lam == 0.25
        assert cfg.agent.delta_big == 16

    def test_env_string_fallback(self):
        raw = apply_env_overrides({}, {"DRTO_CHANNEL__FADING": "none", "HOME": "/x"})
        assert raw == {"channel": {"fading": "none"}}

    @pytest.mark.parametrize("env", [{"DRTO_BOGUS__X": "1"}, {"DRTO_SYSTEM": "1"}])
    def test_bad_env(self, env):
        with pytest.raises(ConfigError):
            apply_env_overrides({}, env)

    def test_bad_section_and_key(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"sytem": {}}')
        with pytest.raises(ConfigError):
            load_config(path, env={})
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"experiment": {"frames": 3}})

    def test_invariants(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(total_frames=0)
        with pytest.raises(ConfigError):
            ExperimentConfig(algorithms=())
        with pytest.raises(ConfigError):
            ExperimentConfig(algorithms=("droo",))


class TestRunExperiment:
    def test_enum_below_pure(self, tmp_path):
        agg = run_experiment(small_cfg(tmp_path)).aggregates()
        assert agg["enum"]["mean_cost"] <= agg["pure-tc"]["mean_cost"]
        assert agg["enum"]["mean_cost"] <= agg["pure-sat"]["mean_cost"]
        assert agg["enum"]["tail_mean_cost_ratio"] == 1.0

    def test_single_frame_drto(self, tmp_path):
        s = run_experiment(small_cfg(tmp_path, total_frames=1, algorithms=("drto",)))
        series = s.series[("drto", 0)]
        assert series["cost"].size == 1
        assert series["K_t"][0] == 5

    def test_byte_identical_csv(self, tmp_path):
        outs = []
        for _ in range(2):
            run_experiment(small_cfg(tmp_path, algorithms=("drto", "cd"), seeds=(0, 1)))
            outs.append({p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())})
        assert outs[0] == outs[1]
        assert set(outs[0]) == {"drto_seed0.csv", "drto_seed1.csv", "cd_seed0.csv",
                                "cd_seed1.csv", "summary.json"}

    def test_csv_layout_and_ratio_floor(self, tmp_path):
        run_experiment(small_cfg(tmp_path, algorithms=("drto", "cd", "pure-tc")))
        lines = (tmp_path / "drto_seed0.csv").read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 41
        for algo in ("drto", "cd", "pure-tc"):
            rows = np.genfromtxt(tmp_path / f"{algo}_seed0.csv", delimiter=",", names=True)
            assert np.all(rows["cost_ratio"] >= 1 - 1e-9)

    def test_aggregates_reproducible_from_csv(self, tmp_path):
        s = run_experiment(small_cfg(tmp_path, algorithms=("cd", "pure-tc")))
        rows = np.genfromtxt(tmp_path / "cd_seed0.csv", delimiter=",", names=True)
        assert s.aggregates()["cd"]["mean_cost"] == pytest.approx(rows["cost"].mean(), rel=1e-15)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["aggregates"]["cd"]["mean_cost"] == s.aggregates()["cd"]["mean_cost"]

    def test_no_ratio(self, tmp_path):
        cfg = small_cfg(tmp_path, algorithms=("pure-sat",))
        cfg.compute_ratio = False
        assert run_experiment(cfg).aggregates()["pure-sat"]["tail_mean_cost_ratio"] is None


def test_bench_shape():
    cfg = ExperimentConfig(total_frames=30, warmup_frames=5)
    table = bench_runtime(cfg, [3, 4], algorithms=("enum", "pure-tc"))
    assert set(table) == {"enum", "pure-tc"}
    assert set(table["enum"]) == {3, 4}
    assert all(v > 0 for row in table.values() for v in row.values())


def test_verify_allocator_small():
    res = verify_allocator(trials=50, max_n=4, seed=1)
    assert res["max_relative_cost_gap"] < 1e-6
    assert res["max_kkt_spread"] < 1e-6


class TestCli:
    def test_run(self, tmp_path, capsys):
        rc = main(["run", "--frames", "20", "--algo", "enum,pure-tc", "--out", str(tmp_path),
                   "--no-timing"])
        assert rc == 0
        agg = json.loads(capsys.readouterr().out)
        assert set(agg) == {"enum", "pure-tc"}
        assert (tmp_path / "enum_seed0.csv").exists()

    def test_export_and_replay_trace(self, tmp_path, capsys):
        trace_path = tmp_path / "t.csv"
        assert main(["export-trace", "--frames", "15", str(trace_path)]) == 0
        assert len(read_trace(trace_path)) == 15
        out = tmp_path / "out"
        assert main(["run", "--trace", str(trace_path), "--algo", "pure-sat", "--no-ratio",
                     "--out", str(out), "--no-timing"]) == 0
        assert len((out / "pure-sat_seed0.csv").read_text().splitlines()) == 16

    def test_trace_replay_matches_generated(self, tmp_path):
        trace_path = tmp_path / "t.csv"
        main(["export-trace", "--frames", "25", "--seed", "3", str(trace_path)])
        for name, extra in (("gen", []), ("file", ["--trace", str(trace_path)])):
            main(["run", "--frames", "25", "--seed", "3", "--algo", "drto", "--no-timing",
                  "--out", str(tmp_path / name), *extra])
        assert ((tmp_path / "gen" / "drto_seed3.csv").read_bytes()
                == (tmp_path / "file" / "drto_seed3.csv").read_bytes())

    def test_verify_alloc(self, capsys):
        assert main(["verify-alloc", "--trials", "20"]) == 0
        assert json.loads(capsys.readouterr().out)["pass"] is True

    def test_bench(self, capsys):
        assert main(["bench", "--n", "3", "--frames", "20", "--warmup", "5",
                     "--algo", "pure-tc,enum"]) == 0
        assert "pure-tc" in capsys.readouterr().out

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        assert main(["run", "--config", str(bad)]) == 2
        assert "invalid JSON" in capsys.readouterr().err

    def test_unknown_algo(self):
        with pytest.raises(SystemExit):
            main(["run", "--algo", "nope"])


def test_timing_columns(tmp_path):
    cfg = ExperimentConfig(total_frames=20, algorithms=("drto",), output_dir=tmp_path)
    cfg.agent.delta_train = 5
    s = run_experiment(cfg)
    series = s.series[("drto", 0)]
    assert np.all(series["decide_micros"] > 0)
    assert np.all(series["step_micros"] >= series["decide_micros"])
    trained = ~np.isnan(series["loss"])
    assert np.all(series["step_micros"][trained] > series["decide_micros"][trained])
    agg = s.aggregates()["drto"]
    assert agg["mean_step_seconds"] > agg["mean_decide_seconds"]


def test_enumeration_runtime_scales_with_candidates():
    from drto.harness import channel_trace, make_policy, run_policy
    cfg = ExperimentConfig(total_frames=400)
    medians = {}
    for n in (5, 7):
        params = cfg.system.replace(n_st=n)
        trace = channel_trace(cfg, 0, params=params)
        recs = run_policy(make_policy("enum", cfg, params, None, None), trace)
        assert all(r.decision.info["solves"] == 2**n for r in recs)
        medians[n] = np.median([r.decide_seconds for r in recs[50:]])
    assert 3 <= medians[7] / medians[5] <= 5
