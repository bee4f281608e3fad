"""Harness behavior end to end: commands, exit codes, files, selection."""

import csv
import os

import numpy as np
import pytest

from lerp.cli import (EXIT_DATA, EXIT_OK, EXIT_USAGE, ExperimentPlan,
                      HyperParams, ResultCell, ResultTable, UsageError,
                      _effective_jobs, default_grid, grid_search, main,
                      read_results_csv, report, select_best, write_results_csv)
from lerp.data import make_blobs, save_dataset


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("blobs-data")
    save_dataset(make_blobs(20, 3, 4, 8.0, seed=3), root)
    return str(root)


def _run_args(dataset_dir, out, extra=()):
    return ["run", "--dataset", dataset_dir, "--labels-per-class", "1",
            "--repeats", "2", "--max-round", "4", "--max-iter", "2",
            "--out", out, *extra]


class TestRunCommand:
    def test_writes_results_and_runs(self, dataset_dir, tmp_path):
        out = str(tmp_path / "out")
        assert main(_run_args(dataset_dir, out)) == EXIT_OK
        with open(os.path.join(out, "runs.csv")) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert {r["seed"] for r in rows} == {"0", "1"}
        table = read_results_csv(os.path.join(out, "results.csv"))
        assert len(table.cells) == 1
        assert 0.0 <= table.cells[0].mean_acc <= 100.0
        assert table.cells[0].std_acc >= 0.0
        assert os.path.exists(os.path.join(out, "results.md"))

    def test_trace_files(self, dataset_dir, tmp_path):
        out = str(tmp_path / "out")
        assert main(_run_args(dataset_dir, out, ["--trace"])) == EXIT_OK
        traces = os.listdir(os.path.join(out, "traces"))
        assert len(traces) == 2

    def test_population_std_reproducible_from_runs(self, dataset_dir,
                                                   tmp_path):
        out = str(tmp_path / "out")
        assert main(_run_args(dataset_dir, out)) == EXIT_OK
        with open(os.path.join(out, "runs.csv")) as fh:
            accs = [float(r["test_acc"]) for r in csv.DictReader(fh)]
        table = read_results_csv(os.path.join(out, "results.csv"))
        assert table.cells[0].mean_acc == pytest.approx(
            100.0 * np.mean(accs), abs=1e-9)
        assert table.cells[0].std_acc == pytest.approx(
            100.0 * np.std(accs), abs=1e-9)

    @staticmethod
    def _runs_without_timing(out):
        with open(os.path.join(out, "runs.csv")) as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            row.pop("seconds")
        return rows

    def test_deterministic_across_invocations(self, dataset_dir, tmp_path):
        outs = [str(tmp_path / d) for d in ("a", "b")]
        for out in outs:
            assert main(_run_args(dataset_dir, out)) == EXIT_OK
        assert (self._runs_without_timing(outs[0])
                == self._runs_without_timing(outs[1]))

    def test_parallel_matches_serial(self, dataset_dir, tmp_path):
        serial = str(tmp_path / "serial")
        parallel = str(tmp_path / "parallel")
        assert main(_run_args(dataset_dir, serial)) == EXIT_OK
        assert main(_run_args(dataset_dir, parallel, ["--jobs", "2"])) == EXIT_OK
        assert (self._runs_without_timing(serial)
                == self._runs_without_timing(parallel))


class TestExitCodes:
    def test_missing_dataset_is_data_error(self, tmp_path):
        code = main(["run", "--dataset", str(tmp_path / "nope"),
                     "--out", str(tmp_path / "out")])
        assert code == EXIT_DATA

    def test_unknown_flag_is_usage_error(self, dataset_dir, tmp_path):
        assert main(["run", "--dataset", dataset_dir, "--frobnicate"]) == \
            EXIT_USAGE

    def test_no_subcommand_is_usage_error(self):
        assert main([]) == EXIT_USAGE

    def test_bad_rates_list(self, dataset_dir):
        assert main(["run", "--dataset", dataset_dir, "--rates", "1,x"]) == \
            EXIT_USAGE

    def test_bad_repeats(self, dataset_dir):
        assert main(["run", "--dataset", dataset_dir, "--repeats", "0"]) == \
            EXIT_USAGE


class TestGridCommand:
    def test_restricted_grid_end_to_end(self, dataset_dir, tmp_path):
        out = str(tmp_path / "out")
        code = main(["grid", "--dataset", dataset_dir, "--rates", "1,2",
                     "--repeats", "2", "--max-round", "3",
                     "--grid-temperatures", "1", "--grid-alphas", "1",
                     "--grid-betas", "0.5", "--grid-iters", "1,5",
                     "--out", out])
        assert code == EXIT_OK
        with open(os.path.join(out, "runs.csv")) as fh:
            rows = list(csv.DictReader(fh))
        # 2 rates x 2 grid points x 2 repeats
        assert len(rows) == 8
        table = read_results_csv(os.path.join(out, "results.csv"))
        assert sorted(c.labels_per_class for c in table.cells) == [1, 2]
        assert all(c.params.max_iter in (1, 5) for c in table.cells)

    def test_empty_grid_is_usage_error(self, dataset_dir, tmp_path):
        code = main(["grid", "--dataset", dataset_dir,
                     "--grid-temperatures", "", "--out", str(tmp_path)])
        assert code == EXIT_USAGE

    def test_bad_grid_values_are_usage_errors(self, dataset_dir, tmp_path):
        code = main(["grid", "--dataset", dataset_dir,
                     "--grid-betas", "0.5,x", "--out", str(tmp_path)])
        assert code == EXIT_USAGE


class TestSelection:
    def test_singleton_grid(self, dataset_dir):
        ds = make_blobs(20, 3, 4, 8.0, seed=3)
        point = HyperParams(1.0, 1.0, 0.5, 2)
        plan = ExperimentPlan(dataset_dir=dataset_dir, rates=(1,), repeats=1,
                              grid=(point,), max_round=3)
        table, outcomes = grid_search(ds, plan)
        assert table.cells[0].params == point
        assert len(outcomes) == 1

    def test_ties_keep_first_in_grid_order(self):
        grid = (HyperParams(1.0, 1.0, 0.5, 1), HyperParams(2.0, 1.0, 0.5, 1))
        assert select_best(grid, [0.8, 0.8]) == 0
        assert select_best(grid, [0.7, 0.9]) == 1

    def test_selection_never_sees_test_accuracy(self):
        # The selector's whole input is the validation means.
        with pytest.raises(ValueError):
            select_best((), [])

    def test_dominated_sharpening_not_selected(self):
        # Hard sharpening at very low temperature loses on validation on
        # this fixture; the winner is chosen despite being listed last.
        ds = make_blobs(40, 3, 6, 2.5, seed=33)
        sharp = HyperParams(temperature=0.1, alpha=100.0, beta=0.5, max_iter=5)
        mild = HyperParams(temperature=100.0, alpha=100.0, beta=0.5, max_iter=5)
        plan = ExperimentPlan(dataset_dir=".", rates=(1,), repeats=3, seed=7,
                              grid=(sharp, mild), max_round=15)
        table, _ = grid_search(ds, plan)
        assert table.cells[0].params == mild

    def test_default_grid_shape_and_order(self):
        grid = default_grid()
        assert len(grid) == 5 * 4 * 3 * 3
        assert grid[0] == HyperParams(0.1, 0.1, 0.1, 1)
        assert grid[1] == HyperParams(0.1, 0.1, 0.1, 5)


class TestReport:
    def _table(self):
        return ResultTable(cells=[
            ResultCell("demo", "lerp", 1, 81.234567, 1.5,
                       HyperParams(1.0, 10.0, 0.5, 5), 10, 2.25),
            ResultCell("demo", "lerp", 4, 90.0, 0.5,
                       HyperParams(0.5, 1.0, 0.9, 10), 10, 3.5),
            ResultCell("demo", "graphhop", 1, 79.0, 2.0,
                       HyperParams(1.0, 10.0, 0.5, 1), 10, 1.0),
            ResultCell("demo", "graphhop", 4, 90.0, 0.25,
                       HyperParams(1.0, 1.0, 0.5, 1), 10, 1.0),
        ])

    def test_csv_round_trip_identical(self, tmp_path):
        table = self._table()
        path = tmp_path / "results.csv"
        write_results_csv(table, path)
        assert read_results_csv(path) == table

    def test_report_command(self, tmp_path):
        table = self._table()
        src = tmp_path / "in.csv"
        write_results_csv(table, src)
        out = str(tmp_path / "out")
        assert main(["report", "--results", str(src), "--out", out]) == EXIT_OK
        assert read_results_csv(os.path.join(out, "results.csv")) == table

    def test_markdown_layout_and_bolding(self, tmp_path):
        _, md_path = report(self._table(), str(tmp_path))
        lines = open(md_path).read().splitlines()
        header = next(l for l in lines if l.startswith("| method"))
        # One column per label rate plus the method column.
        assert header.count("|") - 1 == 2 + 1
        lerp_row = next(l for l in lines if l.startswith("| lerp"))
        gh_row = next(l for l in lines if l.startswith("| graphhop"))
        assert "**81.23±1.50**" in lerp_row
        assert "**90.00±0.50**" in lerp_row  # ties are both bolded
        assert "**90.00±0.25**" in gh_row
        assert "**79.00" not in gh_row

    def test_empty_report_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            report(ResultTable(), str(tmp_path))


class TestJobsCap:
    def test_env_cap_applies(self, monkeypatch):
        monkeypatch.setenv("LERP_THREADS", "2")
        assert _effective_jobs(8) == 2
        monkeypatch.setenv("LERP_THREADS", "bad")
        with pytest.raises(UsageError):
            _effective_jobs(8)

    def test_without_env(self, monkeypatch):
        monkeypatch.delenv("LERP_THREADS", raising=False)
        assert _effective_jobs(3) == 3
        assert _effective_jobs(0) == 1
