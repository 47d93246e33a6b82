"""Summary script: tabulate mean agreement, effect sizes and method correlations."""

import logging
import sys

import hydra
from omegaconf import DictConfig

from utils.exceptions import EmptyInputError
from utils.summary import ordinal_checks, save_summary, summarize


# pylint: disable=E1120
@hydra.main(version_base=None, config_path="config/", config_name="mixbench_settings")
def main(cfg: DictConfig):
    """Summarize the benchmark records into CSV tables."""

    try:
        summary = summarize(cfg.paths.records, by=list(cfg.summary.factors))
    except (EmptyInputError, ValueError, FileNotFoundError) as error:
        logging.error(f"Cannot summarize {cfg.paths.records}: {error}")
        sys.exit(1)

    save_summary(summary, cfg.paths.tables)
    for method, row in summary.overall.iterrows():
        logging.info(f"{method:>16s}  ARI {row['ari']:.3f}  AMI {row['ami']:.3f}  n={row['count']}")

    if cfg.summary.ordinal_checks:
        results = ordinal_checks(cfg.paths.records)
        for result in results:
            logging.info(f"{'PASS' if result.passed else 'FAIL'} {result.name}: {result.detail}")
        if not all(result.passed for result in results):
            sys.exit(2)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    main()
