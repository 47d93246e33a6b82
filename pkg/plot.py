"""Plot script: SVG figures of mean agreement by factor and by method."""

import logging
import os
import sys

import hydra
from omegaconf import DictConfig

from utils.exceptions import EmptyInputError
from utils.summary import summarize, summary_from_tables
from utils.visualization import emit_plots


# pylint: disable=E1120
@hydra.main(version_base=None, config_path="config/", config_name="mixbench_settings")
def main(cfg: DictConfig):
    """Draw figures from saved summary tables, or from the records when none exist."""

    factors = list(cfg.summary.factors)
    try:
        if os.path.exists(os.path.join(cfg.paths.tables, "means.csv")):
            summary = summary_from_tables(cfg.paths.tables)
        else:
            summary = summarize(cfg.paths.records, by=factors)
    except (EmptyInputError, ValueError, FileNotFoundError) as error:
        logging.error(f"Nothing to plot: {error}")
        sys.exit(1)

    for measure in cfg.summary.measures:
        for filename in emit_plots(summary, cfg.paths.plots, factors=factors, measure=measure):
            logging.info(f"Wrote {filename}")


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    main()
