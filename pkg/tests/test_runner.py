import pandas
import pytest

import runner
from data.datamodule import ScenarioGrid
from runner import BenchmarkRecord, BenchmarkRunner, run_benchmark, run_task
from tests.test_simulation import make_config
from utils.exceptions import ConfigError
from utils.file_output import load_records

SIMULATION = {"overlap_samples": 2000, "overlap_tolerance": 0.2, "max_retries": 10}
FAST_METHODS = ["gower_pam", "k_prototypes", "famd_kmeans"]


def tasks(replicates=2):
    return [make_config(n=60, replicate=r) for r in range(replicates)]


def test_run_task_scores_every_method():
    records = run_task(tasks(1)[0], FAST_METHODS, 2, simulation=SIMULATION)
    assert [r.method for r in records] == FAST_METHODS
    for r in records:
        assert r.status in ("ok", "degenerate")
        assert -1.0 <= r.ari <= 1.0
        assert r.runtime >= 0 and r.restarts == 2


def test_method_failure_is_recorded(monkeypatch):
    original = runner.run_method

    def flaky(name, *args, **kwargs):
        if name == "k_prototypes":
            raise ArithmeticError("boom")
        return original(name, *args, **kwargs)

    monkeypatch.setattr(runner, "run_method", flaky)
    records = run_task(tasks(1)[0], FAST_METHODS, 1, simulation=SIMULATION)
    failed = [r for r in records if r.status == "failed"]
    assert [r.method for r in failed] == ["k_prototypes"]
    assert "boom" in failed[0].reason
    assert sum(r.status != "failed" for r in records) == 2


def test_generation_failure_fails_every_method():
    simulation = {**SIMULATION, "max_retries": 1}
    config = make_config(n=60, overlap=0.999)
    records = run_task(config, FAST_METHODS, 1, simulation=simulation)
    assert all(r.status == "failed" and r.reason.startswith("generation") for r in records)


def test_record_validation():
    with pytest.raises(ValueError):
        runner._record(make_config(), "kamila", "finished")


def test_benchmark_writes_and_resumes(tmp_path):
    path = str(tmp_path / "records.csv")
    report = run_benchmark(tasks(), FAST_METHODS, 1, simulation=SIMULATION, records_path=path)
    assert report.written == 6 and report.skipped == 0
    assert len(load_records(path)) == 6

    again = run_benchmark(tasks(), FAST_METHODS, 1, simulation=SIMULATION, records_path=path)
    assert again.written == 0 and again.skipped == 6

    more = run_benchmark(
        tasks(), FAST_METHODS + ["kamila"], 1, simulation=SIMULATION, records_path=path
    )
    assert more.written == 2 and more.skipped == 6
    assert len(load_records(path)) == 8


def test_results_do_not_depend_on_worker_count(tmp_path):
    frames = []
    for workers in (1, 2):
        path = str(tmp_path / f"records_{workers}.csv")
        run_benchmark(
            tasks(), FAST_METHODS, 1, simulation=SIMULATION, records_path=path, num_workers=workers
        )
        frames.append(load_records(path).drop(columns="runtime"))
    pandas.testing.assert_frame_equal(frames[0], frames[1])


def test_benchmark_rejects_bad_method_lists():
    with pytest.raises(ConfigError):
        run_benchmark(tasks(), [], 1)
    with pytest.raises(ConfigError):
        run_benchmark(tasks(), ["kmodes"], 1)


def test_configured_runner(cfg):
    cfg.benchmark.methods = ["k_prototypes", "mixed_rkm"]
    report = BenchmarkRunner(ScenarioGrid(cfg), cfg).run()
    assert report.written == 2
    assert not report.has_failures
    assert all(isinstance(r, BenchmarkRecord) for r in report.records)
    assert set(load_records(cfg.paths.records)["method"]) == {"k_prototypes", "mixed_rkm"}


def test_scenario_grid(cfg):
    cfg.grid.overlap = [0.01, 0.05]
    cfg.benchmark.replicates = 3
    grid = ScenarioGrid(cfg)
    assert len(grid) == 6
    assert [t.replicate for t in grid.tasks()[:3]] == [0, 1, 2]


def test_scenario_grid_strict_mode(cfg):
    cfg.grid.n = [50]
    cfg.benchmark.strict = True
    with pytest.raises(ConfigError):
        ScenarioGrid(cfg).setup()
    cfg.benchmark.strict = False
    ScenarioGrid(cfg).setup()
