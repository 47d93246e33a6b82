"""Benchmark script: run the configured methods over the scenario grid."""

import logging
import sys

import hydra
from omegaconf import DictConfig

from data.datamodule import ScenarioGrid
from runner import BenchmarkRunner
from utils.exceptions import ConfigError
from utils.system import save_run_config, setup_system


# pylint: disable=E1120
@hydra.main(version_base=None, config_path="config/", config_name="mixbench_settings")
def main(cfg: DictConfig):
    """Run the clustering benchmark and append its records."""

    # Every task derives its own seed from the master seed
    setup_system(cfg)

    # Instantiate the scenario grid
    grid = ScenarioGrid(cfg)

    # Instantiate the runner with the method settings
    runner = BenchmarkRunner(grid, cfg)

    # Keep track of configuration parameters in the output directory
    save_run_config(cfg.paths.output_dir, cfg)

    # Run the sweep
    try:
        report = runner.run()
    except ConfigError as error:
        logging.error(f"Invalid configuration: {error}")
        sys.exit(1)

    if report.has_failures:
        logging.warning(f"{report.failed} method runs failed, see the reason column")
        sys.exit(2)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    main()
