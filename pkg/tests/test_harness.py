import csv
import json

import pytest

from plateaulab.cli import main
from plateaulab.harness import (
    CellSummary,
    ConfigError,
    RunRecord,
    SweepConfig,
    derive_seed,
    dump_config,
    emit_outputs,
    full_sweep,
    load_config,
    load_result,
    lower_median,
    run_cell,
    run_single,
    select_optimal_N,
)
from plateaulab.harness.output import RUNS_HEADER, fig3_dat, sweep_json
from plateaulab.quantum import AnsatzSpec

SMALL = dict(n_list=[2, 3, 4], shot_grid=[10, 40], runs_per_cell=3, budget=10 ** 6, global_seed=5)


def record(N_total, reached=True, N=10):
    return RunRecord(4, 4, "powell", N, 0, 1, reached, N_total if reached else None, 0.3, 1)


def cell(N, totals, failures=0):
    return CellSummary(4, "powell", N, [record(t, N=N) for t in totals] + [record(None, False, N)] * failures)


@pytest.fixture(scope="module")
def small_result():
    return full_sweep(SweepConfig(**SMALL))


class TestRunSingle:
    @pytest.mark.parametrize("optimizer,expected", [
        ("nelder_mead", lambda m, N: N * (m + 1)),
        ("powell", lambda m, N: N),
        ("cobyla", lambda m, N: N * (m + 1)),
        ("gradient_descent", lambda m, N: 2 * m * N),
    ])
    def test_threshold_one(self, optimizer, expected):
        spec = AnsatzSpec(3, 3)
        rec = run_single(optimizer, spec, 20, seed=4, threshold=1.0, budget=10 ** 7)
        assert rec.reached and rec.N_total == expected(spec.m, 20)

    @pytest.mark.parametrize("optimizer", ["nelder_mead", "powell", "cobyla", "gradient_descent"])
    def test_zero_budget(self, optimizer):
        rec = run_single(optimizer, AnsatzSpec(2, 2), 10, seed=1, threshold=0.4, budget=0)
        assert not rec.reached and rec.evals == 0 and rec.N_total is None

    @pytest.mark.parametrize("optimizer", ["nelder_mead", "powell", "cobyla", "gradient_descent"])
    def test_identical_records(self, optimizer):
        args = (optimizer, AnsatzSpec(3, 3), 40, 77, 0.4, 10 ** 6)
        assert run_single(*args) == run_single(*args)

    @pytest.mark.parametrize("optimizer", ["nelder_mead", "powell", "cobyla", "gradient_descent"])
    def test_ledger_consistency(self, optimizer):
        rec = run_single(optimizer, AnsatzSpec(3, 3), 40, 3, 0.4, 10 ** 7)
        assert rec.reached
        assert rec.N_total == rec.evals * 40 <= 10 ** 7


class TestCells:
    def test_lower_median(self):
        assert lower_median([100, 300, 200]) == 200
        assert lower_median([4, 1, 3, 2]) == 2
        assert lower_median([]) is None

    def test_all_fail(self):
        c = cell(10, [], failures=4)
        assert c.success_fraction == 0 and c.median is None

    def test_success_fraction(self):
        assert cell(10, [5, 6, 7], failures=1).success_fraction == 0.75

    def test_select_examples(self):
        cells = [cell(10, [], failures=3), cell(100, [5 * 10 ** 4] * 3), cell(1000, [2 * 10 ** 5] * 3)]
        assert tuple(select_optimal_N(cells)) == (100, 5 * 10 ** 4)

    def test_single_qualifying(self):
        assert tuple(select_optimal_N([cell(40, [123]), cell(160, [], failures=2)])) == (40, 123)

    def test_tie_goes_to_smaller_N(self):
        assert select_optimal_N([cell(400, [7000]), cell(100, [7000])]).N == 100

    def test_half_success_qualifies(self):
        assert select_optimal_N([cell(10, [50], failures=1)]).N == 10

    def test_none_qualify(self):
        sel = select_optimal_N([cell(10, [50], failures=2)])
        assert sel.N is None and sel.median is None and "N=10" in sel.diagnostic

    def test_run_cell_seeds(self):
        cfg = SweepConfig(**SMALL)
        c = run_cell("powell", 2, 10, cfg)
        assert [r.seed for r in c.records] == [derive_seed(5, 2, "powell", 10, k) for k in range(3)]

    def test_derive_seed_distinct(self):
        seeds = {derive_seed(0, n, o, N, r) for n in (4, 5) for o in ("powell", "cobyla")
                 for N in (10, 40) for r in range(5)}
        assert len(seeds) == 40


class TestSweep:
    def test_optimal_is_minimal(self, small_result):
        for (opt, n), sel in small_result.optimal.items():
            if sel.N is None:
                continue
            assert sel.N in small_result.config.shot_grid
            for N in small_result.config.shot_grid:
                c = small_result.cell(opt, n, N)
                if c.success_fraction >= 0.5:
                    assert sel.median <= c.median

    def test_reproducible(self, small_result):
        again = full_sweep(SweepConfig(**SMALL))
        assert sweep_json(again) == sweep_json(small_result)

    def test_jobs_independent(self, small_result, tmp_path):
        cfg = SweepConfig(**{**SMALL, "n_list": [2, 3]})
        a, b = tmp_path / "a", tmp_path / "b"
        emit_outputs(full_sweep(cfg, jobs=1), a)
        emit_outputs(full_sweep(cfg, jobs=3), b)
        for name in ("runs.csv", "sweep.json", "summary.csv", "fig3.dat"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_empty_optimizers(self):
        res = full_sweep(SweepConfig(**{**SMALL, "optimizers": []}))
        assert res.cells == [] and res.optimal == {} and res.fits == {}


class TestOutputs:
    def test_runs_header(self, small_result, tmp_path):
        paths = emit_outputs(small_result, tmp_path)
        first = paths["runs.csv"].read_text().splitlines()[0]
        assert first == "n,p,optimizer,N,run,seed,reached,N_total,final_cost,evals"
        assert RUNS_HEADER == first.split(",")
        with open(paths["runs.csv"]) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == len(small_result.records())

    def test_json_round_trip(self, small_result, tmp_path):
        paths = emit_outputs(small_result, tmp_path)
        text = paths["sweep.json"].read_text()
        assert sweep_json(load_result(paths["sweep.json"])) == text
        data = json.loads(text)
        assert data["schema_version"] == 1
        assert data["config"]["global_seed"] == 5
        assert all("seed" in r for c in data["cells"] for r in c["records"])

    def test_fig3_block_count(self, small_result):
        text = fig3_dat(small_result)
        expected = sum(1 for o in small_result.config.optimizers if small_result.scaling(o))
        assert text.count("\n# n median_N_total") == expected
        assert len([b for b in text.split("\n\n\n") if b.strip()]) == expected

    def test_summary_rows(self, small_result, tmp_path):
        paths = emit_outputs(small_result, tmp_path)
        lines = paths["summary.csv"].read_text().splitlines()
        assert len(lines) == 1 + len(small_result.optimal)


class TestConfig:
    def test_yaml_round_trip(self, tmp_path):
        cfg = SweepConfig(**SMALL)
        dump_config(cfg, tmp_path / "c.yaml")
        assert load_config(tmp_path / "c.yaml") == cfg

    @pytest.mark.parametrize("bad", [
        {"shot_grid": [40, 10]}, {"shot_grid": [0, 10]}, {"runs_per_cell": 0},
        {"cost_threshold": 1.0}, {"optimizers": ["sgd"]}, {"n_list": [1]}, {"depth_rule": "deep"},
    ])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            SweepConfig(**bad)

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            SweepConfig.from_dict({"n_list": [2], "shots": 3})

    def test_defaults(self):
        cfg = SweepConfig()
        assert cfg.shot_grid == [10, 40, 160, 640, 2560, 10240, 40960, 163840]
        assert cfg.runs_per_cell == 20 and cfg.cost_threshold == 0.4 and cfg.budget == 10 ** 8


class TestCli:
    def test_sweep_and_report(self, tmp_path, capsys):
        cfg = tmp_path / "c.yaml"
        dump_config(SweepConfig(**{**SMALL, "n_list": [2, 3]}), cfg)
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
        assert main(["report", str(tmp_path / "out" / "sweep.json"), "--out", str(tmp_path / "again")]) == 0
        for name in ("runs.csv", "sweep.json", "summary.csv", "fig3.dat"):
            assert (tmp_path / "out" / name).read_bytes() == (tmp_path / "again" / name).read_bytes()

    def test_seed_override(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        dump_config(SweepConfig(**{**SMALL, "n_list": [2], "optimizers": ["powell"]}), cfg)
        main(["sweep", "--config", str(cfg), "--seed", "11", "--out", str(tmp_path / "o")])
        assert json.loads((tmp_path / "o" / "sweep.json").read_text())["config"]["global_seed"] == 11

    def test_empty_optimizer_list(self, capsys):
        assert main(["sweep", "--n-list", "2", "--optimizers"]) == 0

    def test_config_error_exit_code(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("runs_per_cell: 0\n")
        assert main(["sweep", "--config", str(cfg)]) == 2
        cfg.write_text("- just\n- a list\n")
        assert main(["sweep", "--config", str(cfg)]) == 2

    def test_io_error_exit_code(self, tmp_path):
        assert main(["sweep", "--config", str(tmp_path / "missing.yaml")]) == 1
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["report", str(bad), "--out", str(tmp_path / "x")]) == 1

    def test_optimize(self, capsys):
        assert main(["optimize", "--optimizer", "powell", "--n", "2", "--shots", "50", "--seed", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["optimizer"] == "powell" and out["N"] == 50

    def test_check_integral(self, capsys):
        assert main(["check-integral", "--pairs", "2"]) == 0
        assert "max residual" in capsys.readouterr().out

    def test_variance(self, capsys, tmp_path):
        assert main(["variance", "--n-list", "2", "3", "4", "--samples", "50", "--out", str(tmp_path)]) == 0
        assert "fitted base" in capsys.readouterr().out
        assert (tmp_path / "variance.csv").exists()

    def test_delta_c(self, capsys):
        assert main(["delta-c", "--n-list", "2", "--samples", "50", "--gradient-samples", "40",
                     "--mode", "independent"]) == 0
        assert "independent" in capsys.readouterr().out
