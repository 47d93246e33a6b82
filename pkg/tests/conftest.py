import os

import numpy
import pytest
from hydra import compose, initialize_config_dir

from data.mixed_dataset import MixedDataset

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config")


def blob_dataset(n_per_cluster=20, num_clusters=3, p_r=2, levels=(3, 3), spread=0.3, seed=0):
    """Well separated clusters: continuous blobs, categorical columns mostly equal to the label."""
    rng = numpy.random.default_rng(seed)
    truth = numpy.repeat(numpy.arange(num_clusters), n_per_cluster)
    centers = 5.0 * numpy.arange(num_clusters)[:, None] * numpy.ones(p_r)
    continuous = centers[truth] + spread * rng.standard_normal((truth.shape[0], p_r))
    categorical = []
    for c in levels:
        column = truth % c
        noise = rng.random(truth.shape[0]) < 0.1
        column[noise] = rng.integers(0, c, size=noise.sum())
        categorical.append(column)
    return MixedDataset(
        continuous=continuous,
        categorical=numpy.column_stack(categorical) if levels else numpy.zeros((truth.shape[0], 0)),
        levels=levels,
        truth=truth,
    )


@pytest.fixture
def blobs():
    return blob_dataset()


@pytest.fixture
def small_mixed():
    return MixedDataset(
        continuous=[[1.0, 10.0], [2.0, 20.0], [4.0, 10.0], [8.0, 40.0]],
        categorical=[[0, 1], [0, 0], [1, 1], [2, 1]],
        levels=(3, 2),
        truth=[0, 0, 1, 1],
    )


@pytest.fixture
def cfg(tmp_path):
    """Repository settings with every output redirected to a temporary directory."""
    with initialize_config_dir(config_dir=CONFIG_DIR, version_base=None):
        return compose(
            config_name="mixbench_settings",
            overrides=[
                f"paths.output_dir={tmp_path}",
                f"paths.records={tmp_path}/records.csv",
                f"paths.datasets={tmp_path}/datasets",
                f"paths.plots={tmp_path}/plots",
                f"paths.tables={tmp_path}/tables",
                "compute.num_workers=1",
                "benchmark.replicates=1",
                "benchmark.starts=2",
                "benchmark.strict=false",
                "grid.n=[60]",
                "grid.overlap=[0.05]",
                "simulation.overlap_samples=2000",
                "simulation.overlap_tolerance=0.2",
            ],
        )
