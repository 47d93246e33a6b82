"""Dataset generation script: one CSV, sidecar and mixture description per (scenario, replicate)."""

import logging
import os
import sys

import hydra
from omegaconf import DictConfig
from tqdm import tqdm

from data.datamodule import ScenarioGrid
from data.simulation import generate_scenario, scenario_seed
from utils.exceptions import ConfigError
from utils.file_output import save_dataset_csv, save_mixture_spec
from utils.system import save_run_config, setup_system


def dataset_name(config) -> str:
    return (
        f"K{config.num_clusters}_n{config.n}_p{config.p}_ov{config.overlap:g}"
        f"_pc{config.pct_categorical:g}_{config.density}_{config.sphericity}"
        f"_r{config.replicate}"
    )


# pylint: disable=E1120
@hydra.main(version_base=None, config_path="config/", config_name="mixbench_settings")
def main(cfg: DictConfig):
    """Generate and write every dataset of the configured grid."""

    # Every task derives its own seed from the master seed
    setup_system(cfg)

    # Expand the factor grid
    grid = ScenarioGrid(cfg)
    try:
        grid.setup()
    except ConfigError as error:
        logging.error(f"Invalid configuration: {error}")
        sys.exit(1)

    # Keep track of configuration parameters next to the datasets
    output_dir = cfg.paths.datasets
    save_run_config(output_dir, cfg)

    failures = 0
    for config in tqdm(grid.tasks(), desc="Generate"):
        name = dataset_name(config)
        try:
            spec, data = generate_scenario(
                config,
                samples=cfg.simulation.overlap_samples,
                tolerance=cfg.simulation.overlap_tolerance,
                max_retries=cfg.simulation.max_retries,
                precision=cfg.simulation.overlap_precision,
            )
        except Exception as error:
            logging.warning(f"Generation failed for {name}: {error}")
            failures += 1
            continue
        save_dataset_csv(data, os.path.join(output_dir, f"{name}.csv"), seed=scenario_seed(config))
        if cfg.simulation.write_mixtures:
            save_mixture_spec(spec, config, os.path.join(output_dir, f"{name}.yaml"))

    logging.info(f"Datasets written to {output_dir} ({failures} failed)")
    if failures:
        sys.exit(2)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    main()
