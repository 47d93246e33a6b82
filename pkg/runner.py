"""Benchmark sweep: generate every (scenario, replicate), run the methods, score and record."""

import logging
import math
import time
from dataclasses import asdict, dataclass, field

from joblib import Parallel, delayed
from omegaconf import DictConfig
from tqdm import tqdm

from data.datamodule import ScenarioGrid
from data.simulation import ScenarioConfig, generate_scenario, scenario_seed
from model.methods import METHODS, run_method
from utils.exceptions import ConfigError
from utils.file_output import append_records, completed_keys
from utils.metrics import adjusted_mutual_information, adjusted_rand_index
from utils.system import resolve_num_workers

STATUSES = ("ok", "degenerate", "failed")


@dataclass(frozen=True)
class BenchmarkRecord:
    """One method run on one generated dataset."""

    num_clusters: int
    n: int
    p: int
    overlap: float
    pct_categorical: float
    density: str
    sphericity: str
    replicate: int
    seed: int
    method: str
    ari: float
    ami: float
    runtime: float
    iterations: int
    restarts: int
    status: str
    reason: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"Unknown record status '{self.status}'")
        if self.status != "failed" and not (self.ari <= 1 + 1e-12 and self.ami <= 1 + 1e-12):
            raise ValueError(f"Agreement above 1 in record for {self.method}")
        if self.runtime < 0:
            raise ValueError("Negative runtime")


@dataclass
class BenchmarkReport:
    written: int = 0
    skipped: int = 0
    failed: int = 0
    degenerate: int = 0
    records: list = field(default_factory=list)

    @property
    def has_failures(self) -> bool:
        return self.failed > 0


def _record(config: ScenarioConfig, method, status, reason="", **values):
    defaults = {"ari": math.nan, "ami": math.nan, "runtime": 0.0, "iterations": 0, "restarts": 0}
    defaults.update(values)
    return BenchmarkRecord(
        **config.coordinates(),
        replicate=config.replicate,
        seed=scenario_seed(config),
        method=method,
        status=status,
        reason=reason,
        **defaults,
    )


def run_task(config: ScenarioConfig, methods, starts: int, settings=None, simulation=None):
    """Generate one dataset and run every method on it.

    Failures are captured per method; a failed generation fails every method.
    """
    simulation = simulation or {}
    try:
        _, data = generate_scenario(
            config,
            samples=simulation.get("overlap_samples", 20000),
            tolerance=simulation.get("overlap_tolerance", 0.05),
            max_retries=simulation.get("max_retries", 10),
            precision=simulation.get("overlap_precision", 0.01),
        )
    except Exception as error:
        logging.error(f"Generation failed for {config.key()}: {error}")
        return [_record(config, method, "failed", f"generation: {error}") for method in methods]

    records = []
    for method in methods:
        start = time.perf_counter()
        try:
            outcome = run_method(
                method, data, config.num_clusters, starts, scenario_seed(config, method), settings
            )
        except Exception as error:
            logging.warning(f"{method} failed on {config.key()}: {error}")
            records.append(
                _record(
                    config,
                    method,
                    "failed",
                    f"{type(error).__name__}: {error}",
                    runtime=time.perf_counter() - start,
                )
            )
            continue
        runtime = time.perf_counter() - start
        status = "degenerate" if outcome.is_degenerate else "ok"
        if status == "degenerate":
            logging.warning(f"{method} left empty clusters on {config.key()}")
        records.append(
            _record(
                config,
                method,
                status,
                ari=adjusted_rand_index(data.truth, outcome.partition),
                ami=adjusted_mutual_information(data.truth, outcome.partition),
                runtime=runtime,
                iterations=outcome.iterations,
                restarts=outcome.restarts,
            )
        )
    return records


def run_benchmark(
    tasks,
    methods,
    starts: int,
    settings=None,
    simulation=None,
    records_path=None,
    num_workers: int = 1,
    resume: bool = True,
) -> BenchmarkReport:
    """Run every (scenario, replicate) task and append its records as it completes.

    Tasks run on a bounded worker pool but results are consumed in task order,
    so the records file does not depend on the worker count. With resume, keys
    already present in records_path are skipped.
    """
    methods = list(methods)
    tasks = list(tasks)
    if not tasks or not methods:
        raise ConfigError("Benchmark needs at least one scenario and one method")
    unknown = sorted(set(methods) - set(METHODS))
    if unknown:
        raise ConfigError(f"Unknown methods {unknown} (choose from {sorted(METHODS)})")

    report = BenchmarkReport()
    done = completed_keys(records_path) if (records_path and resume) else set()
    pending = []
    for config in tasks:
        todo = [m for m in methods if config.key() + (m,) not in done]
        report.skipped += len(methods) - len(todo)
        if todo:
            pending.append((config, todo))
    if report.skipped:
        logging.info(f"Resuming: {report.skipped} records already present, skipped")

    results = Parallel(n_jobs=num_workers, return_as="generator")(
        delayed(run_task)(config, todo, starts, settings, simulation) for config, todo in pending
    )
    for records in tqdm(results, total=len(pending), desc="Benchmark"):
        rows = [asdict(record) for record in records]
        if records_path:
            append_records(rows, records_path)
        for record in records:
            report.written += 1
            report.failed += record.status == "failed"
            report.degenerate += record.status == "degenerate"
        report.records.extend(records)
    return report


class BenchmarkRunner:
    """Configured benchmark sweep."""

    def __init__(self, grid: ScenarioGrid, cfg: DictConfig) -> None:
        self.grid = grid
        self.cfg = cfg
        self.methods = list(cfg.benchmark.methods)
        self.settings = {**cfg.methods, "pam_init": cfg.benchmark.pam_init}
        self.simulation = dict(cfg.simulation)
        self.num_workers = resolve_num_workers(cfg)

    def run(self) -> BenchmarkReport:
        self.grid.setup()
        logging.info(
            f"Running {len(self.methods)} methods with {self.grid.starts} starts "
            f"on {self.num_workers} worker(s); PAM initialization: {self.settings['pam_init']}"
        )
        report = run_benchmark(
            self.grid.tasks(),
            self.methods,
            self.grid.starts,
            settings=self.settings,
            simulation=self.simulation,
            records_path=self.cfg.paths.records,
            num_workers=self.num_workers,
            resume=self.cfg.benchmark.get("resume", True),
        )
        logging.info(
            f"Wrote {report.written} records ({report.degenerate} degenerate, "
            f"{report.failed} failed) to {self.cfg.paths.records}"
        )
        return report
