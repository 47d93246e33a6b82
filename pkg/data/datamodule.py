"""Scenario grid of the simulation benchmark."""

import itertools
import logging

from omegaconf import DictConfig

from data.simulation import FACTORS, ScenarioConfig
from utils.exceptions import ConfigError


class ScenarioGrid:
    """Expands the configured factor levels into (scenario, replicate) tasks."""

    def __init__(self, cfg: DictConfig) -> None:

        # Extract configuration parameters for the sweep
        self.cfg = cfg
        self.full = cfg.benchmark.get("full", False)
        self.seed = cfg.init.seed
        self.levels = cfg.simulation.levels
        self.strict = cfg.benchmark.get("strict", True)

        if self.full:
            logging.warning(
                "Full design requested: 50 replicates and 100 starts over every "
                "scenario, expect days of compute"
            )
            self.grid = cfg.full_grid
            self.replicates = cfg.full_grid.replicates
            self.starts = cfg.full_grid.starts
        else:
            self.grid = cfg.grid
            self.replicates = cfg.benchmark.replicates
            self.starts = cfg.benchmark.starts

        self.scenarios = []
        self.has_setup_been_called = False

    def setup(self):

        if self.has_setup_been_called:
            return

        missing = [factor for factor in FACTORS if factor not in self.grid]
        if missing:
            raise ConfigError(f"Factor grid is missing {missing}")
        if self.replicates < 1 or self.starts < 1:
            raise ConfigError("Replicates and starts must be positive")

        levels = [list(self.grid[factor]) for factor in FACTORS]
        if any(len(values) == 0 for values in levels):
            raise ConfigError("Every factor needs at least one level")

        for combination in itertools.product(*levels):
            try:
                scenario = ScenarioConfig(
                    **dict(zip(FACTORS, combination)), seed=self.seed, levels=self.levels
                )
            except TypeError as error:
                raise ConfigError(f"Invalid factor level in {combination}: {error}")
            if self.strict:
                scenario.check_grid()
            self.scenarios.append(scenario)

        logging.info(
            f"Scenario grid: {len(self.scenarios)} scenarios x {self.replicates} "
            f"replicates, {self.starts} starts per method"
        )
        self.has_setup_been_called = True

    def tasks(self):
        """Every (scenario, replicate) as a ScenarioConfig, scenarios outermost."""
        self.setup()
        return [
            ScenarioConfig(**{**vars(scenario), "replicate": replicate})
            for scenario in self.scenarios
            for replicate in range(self.replicates)
        ]

    def __len__(self):
        self.setup()
        return len(self.scenarios) * self.replicates
