import os

import pytest
from hydra import compose, initialize_config_dir

import benchmark
import generate
import plot
import summarize
import validate
from tests.conftest import CONFIG_DIR
from tests.test_summary import synthetic_records
from utils.file_output import append_records


def test_generate_writes_datasets(cfg):
    generate.main(cfg)
    files = sorted(os.listdir(cfg.paths.datasets))
    assert "config.yaml" in files
    name = "K3_n60_p8_ov0.05_pc0.5_equal_spherical_r0"
    assert {f"{name}.csv", f"{name}.csv.meta", f"{name}.yaml"} <= set(files)


def test_benchmark_summary_and_plots(cfg):
    cfg.benchmark.methods = ["gower_pam", "k_prototypes"]
    benchmark.main(cfg)
    assert os.path.exists(cfg.paths.records)
    assert os.path.exists(os.path.join(cfg.paths.output_dir, "config.yaml"))
    summarize.main(cfg)
    assert os.path.exists(os.path.join(cfg.paths.tables, "overall.csv"))
    plot.main(cfg)
    assert sorted(os.listdir(cfg.paths.plots)) == [
        "ami_by_method.svg",
        "ami_by_overlap.svg",
        "ari_by_method.svg",
        "ari_by_overlap.svg",
    ]


def test_config_errors_exit_with_status_one(cfg):
    cfg.benchmark.methods = ["kmodes"]
    with pytest.raises(SystemExit) as exit_info:
        benchmark.main(cfg)
    assert exit_info.value.code == 1


def test_summarize_without_records_exits_with_status_one(cfg):
    with pytest.raises(SystemExit) as exit_info:
        summarize.main(cfg)
    assert exit_info.value.code == 1


def test_validate_succeeds(cfg):
    cfg.validate.cases = 5
    cfg.validate.monotone_instances = 2
    validate.main(cfg)


def test_presets_select_the_ordinal_sweeps():
    with initialize_config_dir(config_dir=CONFIG_DIR, version_base=None):
        default = compose(config_name="mixbench_settings")
        overlap = compose(config_name="mixbench_settings", overrides=["preset=overlap"])
        sphericity = compose(config_name="mixbench_settings", overrides=["preset=sphericity"])
    assert not default.summary.ordinal_checks
    assert list(overlap.grid.overlap) == list(default.grid.overlap)
    assert overlap.summary.ordinal_checks
    assert list(sphericity.grid.sphericity) == ["spherical", "ellipsoidal"]
    assert list(sphericity.grid.overlap) == [0.01, 0.10]
    assert sphericity.benchmark.replicates == 10 and sphericity.benchmark.starts == 20


def test_failed_ordinal_checks_exit_with_status_two(cfg):
    append_records(synthetic_records().to_dict("records"), cfg.paths.records)
    cfg.summary.ordinal_checks = True
    with pytest.raises(SystemExit) as exit_info:
        summarize.main(cfg)
    assert exit_info.value.code == 2
