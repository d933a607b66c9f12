import json
import math
import os

import numpy as np
import pytest

from seal import cli
from seal.data import synthetic_inputs, write_synthetic_data_dir
from seal.lab import (
    AutoAdjustEvaluation,
    run_acp_alternate,
    run_autoadjust,
    run_multi,
    run_sensitivity,
    run_single,
)
from seal.params import (
    ConfigError,
    ECONOMIC_PARAMS,
    Params,
    load_params,
    parse_config_file,
    refinement_grid,
    sensitivity_grid,
)
from seal.stats import GENERAL_COLUMNS, read_general_series


FAST = dict(TOTAL_DAYS=21 * 2)  # two months is plenty for harness plumbing


def fast_params(**kw):
    merged = {**FAST, **kw}
    return Params(**merged)


class TestSensitivityGrid:
    def test_alpha_six_values(self):
        grid = sensitivity_grid("ALPHA", 6)
        expected = [0.01, 0.208, 0.406, 0.604, 0.802, 1.0]
        assert len(grid) == 6
        for got, want in zip(grid, expected):
            assert abs(got - want) < 1e-9

    def test_two_values_are_the_bounds(self):
        assert sensitivity_grid("MARKUP", 2) == [0.01, 0.5]

    def test_sorted_inclusive_any_n(self):
        for name in ECONOMIC_PARAMS:
            for n in (2, 3, 7):
                grid = sensitivity_grid(name, n)
                assert len(grid) == n
                assert grid == sorted(grid)
                lo, hi = grid[0], grid[-1]
                from seal.params import PARAM_BOUNDS

                assert (lo, hi) == PARAM_BOUNDS[name]

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError, match="no registered bounds"):
            sensitivity_grid("NOT_A_PARAM", 3)

    def test_too_few_values(self):
        with pytest.raises(ConfigError):
            sensitivity_grid("ALPHA", 1)


class TestRefinementGrid:
    def test_worked_refinement(self):
        grid = refinement_grid(0.505, 0.7525, 5)
        expected = [0.505, 0.57, 0.63, 0.69, 0.75]
        for got, want in zip(grid, expected):
            assert abs(got - want) < 1e-4

    def test_falls_back_when_rounding_collides(self):
        grid = refinement_grid(0.01, 0.02, 5)
        assert grid == sorted(grid)
        assert len(set(grid)) == 5


class TestParamsAndConfig:
    def test_defaults_valid(self):
        assert Params().validate() == []

    def test_mode_exclusivity(self):
        p = Params(sensitivity_choice=True, multi_run_simulation=True)
        assert any("conflicting" in e for e in p.validate())
        with pytest.raises(ConfigError):
            p.mode()

    def test_bad_values_reported(self):
        p = Params(ALPHA=0.0, MARKUP=1.5, TAX_CONSUMPTION=1.0)
        errors = p.validate()
        assert len(errors) == 3

    def test_config_round_trip(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# comment line\n"
            "ALPHA=0.3\n"
            "TOTAL_DAYS = 42   # inline comment\n"
            "alternative0=False\n"
            "PERIODICITY_SAVE_DATA=quarterly\n"
            "LIST_NEW_AGE_GROUPS=[6,12,17,25,35,45,65,100]\n"
        )
        params = load_params(cfg)
        assert params.ALPHA == 0.3
        assert params.TOTAL_DAYS == 42
        assert params.alternative0 is False
        assert params.PERIODICITY_SAVE_DATA == "quarterly"
        assert params.LIST_NEW_AGE_GROUPS == (6, 12, 17, 25, 35, 45, 65, 100)

    def test_unknown_keys_listed_and_refused(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("ALPHA=0.3\nNOT_A_KEY=1\nALSO_BAD=2\n")
        with pytest.raises(ConfigError, match="ALSO_BAD, NOT_A_KEY"):
            parse_config_file(cfg)

    def test_digest_stable_and_sensitive(self):
        assert Params().digest() == Params().digest()
        assert Params().digest() != Params(ALPHA=0.3).digest()


class TestRunSingle:
    def test_smoke_run(self, tmp_path, synthetic_tables):
        result = run_single(fast_params(seed=7), synthetic_tables, tmp_path)
        assert os.path.isdir(result.run_dir)
        assert set(result.final_general) == set(GENERAL_COLUMNS)
        manifest = json.load(open(os.path.join(result.run_dir, "manifest.json")))
        assert manifest["seed"] == 7

    def test_same_seed_same_manifest_digest(self, tmp_path, synthetic_tables):
        a = run_single(fast_params(seed=7), synthetic_tables, tmp_path / "a")
        b = run_single(fast_params(seed=7), synthetic_tables, tmp_path / "b")
        assert a.params_digest == b.params_digest
        assert a.final_general == b.final_general

    def test_mode_flag_refused(self, tmp_path, synthetic_tables):
        with pytest.raises(ConfigError, match="mode"):
            run_single(
                fast_params(sensitivity_choice=True), synthetic_tables, tmp_path
            )

    def test_invalid_params_refused(self, tmp_path, synthetic_tables):
        with pytest.raises(ConfigError, match="MARKUP"):
            run_single(fast_params(MARKUP=2.0), synthetic_tables, tmp_path)

    def test_rerun_from_snapshot_reproduces(self, tmp_path, synthetic_tables):
        from seal.genesis import GenesisConfig, ensure_snapshot

        params = fast_params(seed=7)
        _, snap, _ = ensure_snapshot(
            synthetic_tables, GenesisConfig.from_params(params), tmp_path / "cache"
        )
        a = run_single(params, synthetic_tables, tmp_path / "a", snapshot_path=snap)
        b = run_single(params, synthetic_tables, tmp_path / "b", snapshot_path=snap)
        assert open(a.general_path, "rb").read() == open(b.general_path, "rb").read()


class TestRunSensitivity:
    def test_sweep_counts_and_report(self, tmp_path, synthetic_tables):
        counted = []

        def stub_runner(params, prefix):
            counted.append(prefix)
            return run_single_result_stub(params)

        params = fast_params(sensitivity_choice=True)
        entries, report = run_sensitivity(
            params, 3, synthetic_tables, tmp_path, runner=stub_runner
        )
        assert len(entries) == 9 * 3 + 1  # grid runs plus the baseline
        assert entries[0].parameter == "(baseline)"
        by_param = {}
        for e in entries[1:]:
            by_param.setdefault(e.parameter, []).append(e.value)
        assert set(by_param) == set(ECONOMIC_PARAMS)
        assert all(len(v) == 3 for v in by_param.values())
        lines = open(report).read().splitlines()
        assert lines[0].startswith("parameter,value,status")
        assert len(lines) == 1 + len(entries)

    def test_failures_recorded_not_fatal(self, tmp_path, synthetic_tables):
        def flaky_runner(params, prefix):
            if params.ALPHA == 0.01:
                raise RuntimeError("synthetic failure")
            return run_single_result_stub(params)

        params = fast_params(sensitivity_choice=True)
        entries, _ = run_sensitivity(params, 2, synthetic_tables, tmp_path, runner=flaky_runner)
        failed = [e for e in entries if e.error]
        assert len(failed) == 1
        assert failed[0].parameter == "ALPHA"

    def test_requires_mode_flag(self, tmp_path, synthetic_tables):
        with pytest.raises(ConfigError):
            run_sensitivity(fast_params(), 3, synthetic_tables, tmp_path)


def run_single_result_stub(params):
    from seal.lab import RunResult

    final = {name: 0.0 for name in GENERAL_COLUMNS}
    final["gdp_index"] = params.ALPHA
    return RunResult(
        run_id=f"stub_{params.digest()[:8]}",
        params_digest=params.digest(),
        seed=params.seed,
        final_general=final,
        general_path="",
        regional_path="",
        run_dir="",
        wall_time=0.0,
        total_pop=0,
    )


class TestRunMulti:
    def test_replicas_and_band(self, tmp_path, synthetic_tables):
        params = fast_params(multi_run_simulation=True, seed=3)
        results, aggregates = run_multi(params, 3, synthetic_tables, tmp_path)
        assert [r.seed for r in results] == [3, 4, 5]
        months = len(aggregates["month"]["median"])
        assert months == 2
        for name in GENERAL_COLUMNS:
            block = aggregates[name]
            for i in range(months):
                assert block["q25"][i] <= block["median"][i] <= block["q75"][i]
        assert os.path.exists(os.path.join(tmp_path, "aggregate_general.csv"))

    def test_zero_spread_for_identical_seeds(self, synthetic_tables, tmp_path):
        # Same-seed replicas are byte identical, so the band has zero width.
        from seal.lab import aggregate_general, execute_run

        base = fast_params(seed=5)
        series = []
        for sub in ("a", "b", "c"):
            result = execute_run(base, synthetic_tables, tmp_path / sub, prefix="rep")
            series.append(read_general_series(result.general_path))
        aggregates = aggregate_general(series)
        for name in GENERAL_COLUMNS:
            block = aggregates[name]
            assert block["q25"] == block["q75"] == block["median"]

    def test_requires_at_least_two(self, tmp_path, synthetic_tables):
        with pytest.raises(ConfigError):
            run_multi(fast_params(multi_run_simulation=True), 1, synthetic_tables, tmp_path)


class TestRunAutoAdjust:
    def test_grid_values_match_worked_examples(self):
        seen = {}

        def spy(params):
            for name in ("ALPHA", "BETA", "MARKUP", "TAX_CONSUMPTION"):
                value = getattr(params, name)
                if value != getattr(Params(), name):
                    seen.setdefault(name, []).append(value)
            return (0.0, 0.0)

        params = fast_params(auto_adjust_sensitivity_test=True)
        run_autoadjust(params, 5, 1, evaluator=spy)
        expected = [0.01, 0.2575, 0.505, 0.7525, 1.0]
        got = sorted(set(seen["ALPHA"]))
        assert len(got) == 5
        for g, w in zip(got, expected):
            assert abs(g - w) < 1e-9

    def test_monotone_objective_converges_to_upper_bound(self):
        def objective(params):
            return (params.ALPHA, 0.0)  # higher ALPHA is strictly better

        params = fast_params(auto_adjust_sensitivity_test=True)
        best, trace = run_autoadjust(params, 5, 2, evaluator=objective)
        assert best.ALPHA == 1.0
        alpha_iter2 = [e.value for e in trace if e.parameter == "ALPHA" and e.iteration == 1]
        assert min(alpha_iter2) >= 0.7525 - 1e-9

    def test_trace_length_and_dedup_accounting(self):
        calls = []

        def objective(params):
            calls.append(params.digest())
            return (params.BETA, params.MARKUP)

        params = fast_params(auto_adjust_sensitivity_test=True)
        _, trace = run_autoadjust(params, 4, 3, evaluator=objective)
        assert len(trace) == 4 * 4 * 3
        assert len(set(calls)) == len(calls)  # evaluator never re-invoked
        assert len(calls) <= len(trace)
        cached = [e for e in trace if e.cached]
        assert len(calls) + len(cached) == len(trace)

    def test_writes_trace_and_best(self, tmp_path):
        params = fast_params(auto_adjust_sensitivity_test=True)
        run_autoadjust(params, 3, 1, evaluator=lambda p: (p.ALPHA, 0.0), out_dir=tmp_path)
        trace_lines = open(os.path.join(tmp_path, "autoadjust_trace.csv")).read().splitlines()
        assert trace_lines[0] == "iteration,parameter,value,gdp,gini,score,cached"
        assert len(trace_lines) == 1 + 4 * 3
        best = json.load(open(os.path.join(tmp_path, "autoadjust_best.json")))
        assert best["best_parameter"] == "ALPHA"
        assert best["pareto_front"]

    def test_requires_mode_flag(self):
        with pytest.raises(ConfigError):
            run_autoadjust(fast_params(), 5, 1, evaluator=lambda p: (0, 0))


class TestAcpCompare:
    def test_zero_tax_policies_identical(self, tmp_path):
        tables = synthetic_inputs(equal_hdi=True, static_population=True)
        params = fast_params(TAX_CONSUMPTION=0.0, seed=6, TOTAL_DAYS=21 * 6)
        pairs, deltas = run_acp_alternate(params, 1, tables, tmp_path)
        own, pooled = pairs[0]
        assert open(own.general_path, "rb").read() == open(pooled.general_path, "rb").read()
        assert open(own.regional_path, "rb").read() == open(pooled.regional_path, "rb").read()
        assert all(row["delta"] == 0.0 for row in deltas)

    def test_merged_regions_share_index(self, tmp_path, synthetic_tables):
        params = fast_params(seed=6, TOTAL_DAYS=21 * 6)
        pairs, _ = run_acp_alternate(params, 1, synthetic_tables, tmp_path)
        _, pooled = pairs[0]
        from seal.stats import REGIONAL_COLUMNS, read_output_file

        rows = read_output_file(pooled.regional_path, REGIONAL_COLUMNS)
        by_month = {}
        for row in rows:
            by_month.setdefault(row[0], []).append(row[REGIONAL_COLUMNS.index("qli_index")])
        for month, values in by_month.items():
            assert len(set(values)) == 1, month

    def test_delta_rows_per_indicator_per_month(self, tmp_path):
        tables = synthetic_inputs()
        params = fast_params(seed=6)
        _, deltas = run_acp_alternate(params, 1, tables, tmp_path)
        months = 2
        assert len(deltas) == months * (len(GENERAL_COLUMNS) - 1)
        path = os.path.join(tmp_path, "acp_deltas.csv")
        assert len(open(path).read().splitlines()) == 1 + len(deltas)

    def test_missing_acp_id_is_an_error(self, tmp_path, synthetic_tables):
        import copy

        tables = copy.deepcopy(synthetic_tables)
        tables.boundaries[0].acp_id = None
        with pytest.raises(ConfigError, match="acp_id"):
            run_acp_alternate(fast_params(), 1, tables, tmp_path)


class TestCli:
    def test_run_synthetic_smoke(self, tmp_path, capsys):
        code = cli.main(
            ["run", "--synthetic", "--seed", "7", "--out", str(tmp_path),
             "--config", _fast_config(tmp_path)]
        )
        assert code == 0
        run_dirs = [d for d in os.listdir(tmp_path) if d.startswith("run_")]
        assert len(run_dirs) == 1
        files = os.listdir(tmp_path / run_dirs[0])
        txt = [f for f in files if f.endswith(".txt")]
        assert len(txt) == 5

    def test_unknown_config_key_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("NOT_A_KEY=1\n")
        code = cli.main(["run", "--synthetic", "--config", str(bad), "--out", str(tmp_path)])
        assert code == 1
        assert "NOT_A_KEY" in capsys.readouterr().err

    def test_invalid_param_value_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("MARKUP=2.0\n")
        code = cli.main(["run", "--synthetic", "--config", str(bad), "--out", str(tmp_path)])
        assert code == 1

    def test_sensitivity_run_directories(self, tmp_path):
        code = cli.main(
            ["sensitivity", "--synthetic", "--values", "2", "--seed", "3",
             "--out", str(tmp_path), "--config", _fast_config(tmp_path)]
        )
        assert code == 0
        run_dirs = [d for d in os.listdir(tmp_path) if d.startswith("sens_")]
        assert len(run_dirs) == 9 * 2 + 1

    def test_multirun_command(self, tmp_path):
        code = cli.main(
            ["multirun", "--synthetic", "--runs", "2", "--seed", "3",
             "--out", str(tmp_path), "--config", _fast_config(tmp_path)]
        )
        assert code == 0
        assert os.path.exists(tmp_path / "aggregate_general.csv")

    def test_acp_compare_command(self, tmp_path):
        code = cli.main(
            ["acp-compare", "--synthetic", "--pairs", "1", "--seed", "3",
             "--out", str(tmp_path), "--config", _fast_config(tmp_path)]
        )
        assert code == 0
        assert os.path.exists(tmp_path / "acp_deltas.csv")

    def test_autoadjust_command(self, tmp_path):
        code = cli.main(
            ["autoadjust", "--synthetic", "--values", "2", "--iters", "1",
             "--seed", "3", "--out", str(tmp_path), "--config", _fast_config(tmp_path)]
        )
        assert code == 0
        assert os.path.exists(tmp_path / "autoadjust_best.json")

    def test_gen_snapshot_and_cache_hit(self, tmp_path, capsys):
        args = ["gen-snapshot", "--synthetic", "--seed", "4", "--out", str(tmp_path)]
        assert cli.main(args) == 0
        first = capsys.readouterr().out
        assert "generated" in first
        assert cli.main(args) == 0
        second = capsys.readouterr().out
        assert "cache hit" in second

    def test_validate_data_on_written_dir(self, tmp_path, capsys):
        data_dir = tmp_path / "data"
        write_synthetic_data_dir(data_dir)
        assert cli.main(["validate-data", "--data-dir", str(data_dir)]) == 0
        os.remove(data_dir / "hdi.csv")
        assert cli.main(["validate-data", "--data-dir", str(data_dir)]) == 1

    def test_run_from_data_dir_files(self, tmp_path):
        data_dir = tmp_path / "data"
        write_synthetic_data_dir(data_dir)
        code = cli.main(
            ["run", "--data-dir", str(data_dir), "--seed", "2",
             "--out", str(tmp_path / "out"), "--config", _fast_config(tmp_path)]
        )
        assert code == 0

    def test_env_var_overrides_out(self, tmp_path, monkeypatch):
        env_dir = tmp_path / "env_out"
        monkeypatch.setenv("SEAL_OUTPUT_PATH", str(env_dir))
        code = cli.main(
            ["run", "--synthetic", "--seed", "1", "--out", str(tmp_path / "flag_out"),
             "--config", _fast_config(tmp_path)]
        )
        assert code == 0
        assert env_dir.exists()
        assert not (tmp_path / "flag_out").exists()

    def test_missing_inputs_is_validation_error(self, tmp_path, capsys):
        code = cli.main(["run", "--out", str(tmp_path)])
        assert code == 1


def _fast_config(tmp_path) -> str:
    path = os.path.join(tmp_path, "fast.cfg")
    if not os.path.exists(path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("TOTAL_DAYS=42\n")
    return path
