"""Validation script: oracle and invariant checks of the clustering toolkit."""

import logging
import sys

import hydra
from omegaconf import DictConfig

from utils.validation import run_validation


# pylint: disable=E1120
@hydra.main(version_base=None, config_path="config/", config_name="mixbench_settings")
def main(cfg: DictConfig):
    """Run every check and exit with status 2 when one fails."""

    results = run_validation(
        cases=cfg.validate.cases,
        instances=cfg.validate.monotone_instances,
        seed=cfg.validate.seed,
    )
    failed = [result.name for result in results if not result.passed]
    if failed:
        logging.error(f"Failed checks: {failed}")
        sys.exit(2)
    logging.info(f"All {len(results)} checks passed")


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    main()
