"""Reading and writing datasets, mixtures, dissimilarities and benchmark records."""

import os

import numpy
import pandas
from omegaconf import OmegaConf

from data.mixed_dataset import MixedDataset
from model.dissimilarity import DissimilarityMatrix
from utils.exceptions import InvalidDatasetError, SchemaMismatchError

RECORD_VERSION = "#mixbench-v1"
DISSIMILARITY_MAGIC = b"MXDM"
KEY_COLUMNS = (
    "num_clusters",
    "n",
    "p",
    "overlap",
    "pct_categorical",
    "density",
    "sphericity",
    "replicate",
    "method",
)


def _makedirs_for(filename):
    directory = os.path.dirname(filename)
    if directory:
        os.makedirs(directory, exist_ok=True)


def save_dataset_csv(data: MixedDataset, filename, seed=None):
    """Write a dataset as CSV with a name row and a column-type row, plus a .meta sidecar.

    Types are "con" for continuous columns, "cat:<levels>" for categorical
    columns and "truth" for the label column.
    """
    _makedirs_for(filename)
    columns = {}
    types = []
    for j in range(data.num_continuous):
        columns[f"x{j + 1}"] = data.continuous[:, j]
        types.append("con")
    for j, c in enumerate(data.levels):
        columns[f"c{j + 1}"] = data.categorical[:, j]
        types.append(f"cat:{c}")
    if data.truth is not None:
        columns["truth"] = data.truth
        types.append("truth")

    frame = pandas.DataFrame(columns)
    frame.columns = pandas.MultiIndex.from_arrays([list(columns), types])
    frame.to_csv(filename, index=False, float_format="%.17g")

    meta = {
        "n": data.n,
        "p_r": data.num_continuous,
        "p_c": data.num_categorical,
        "levels": ",".join(str(c) for c in data.levels),
        "seed": "" if seed is None else seed,
    }
    with open(f"{filename}.meta", "w") as f:
        f.writelines(f"{key}={value}\n" for key, value in meta.items())


def load_dataset_csv(filename) -> MixedDataset:
    frame = pandas.read_csv(filename, header=[0, 1])
    types = [column[1] for column in frame.columns]
    continuous = [i for i, t in enumerate(types) if t == "con"]
    categorical = [i for i, t in enumerate(types) if t.startswith("cat:")]
    truth = [i for i, t in enumerate(types) if t == "truth"]
    if len(continuous) + len(categorical) + len(truth) != len(types):
        raise InvalidDatasetError(f"Unknown column type in {filename}: {types}")

    values = frame.to_numpy()
    return MixedDataset(
        continuous=values[:, continuous].astype(float),
        categorical=values[:, categorical].astype(int),
        levels=tuple(int(types[i].split(":")[1]) for i in categorical),
        truth=values[:, truth[0]].astype(int) if truth else None,
    )


def save_mixture_spec(spec, config, filename):
    """Mixture parameters and the achieved overlap map as YAML."""
    _makedirs_for(filename)
    content = OmegaConf.create(
        {
            "scenario": {k: v for k, v in vars(config).items()},
            "target_overlap": float(spec.target),
            "achieved_overlap": spec.mean_overlap,
            "inflation": float(spec.inflation),
            "weights": spec.weights.tolist(),
            "means": spec.means.tolist(),
            "covariances": spec.covariances.tolist(),
            "overlap": spec.overlap.tolist(),
        }
    )
    OmegaConf.save(content, filename)


def save_dissimilarity(matrix: DissimilarityMatrix, filename):
    """Binary dump: magic, n as little-endian uint64, strict lower triangle as float64."""
    _makedirs_for(filename)
    with open(filename, "wb") as f:
        f.write(DISSIMILARITY_MAGIC)
        f.write(numpy.array([matrix.n], dtype="<u8").tobytes())
        f.write(matrix.lower_triangle().astype("<f8").tobytes())


def load_dissimilarity(filename) -> DissimilarityMatrix:
    with open(filename, "rb") as f:
        if f.read(len(DISSIMILARITY_MAGIC)) != DISSIMILARITY_MAGIC:
            raise SchemaMismatchError(f"{filename} is not a dissimilarity dump")
        n = int(numpy.frombuffer(f.read(8), dtype="<u8")[0])
        entries = numpy.frombuffer(f.read(), dtype="<f8")
    if entries.shape[0] != n * (n - 1) // 2:
        raise SchemaMismatchError(f"{filename} holds {entries.shape[0]} entries for n={n}")
    return DissimilarityMatrix.from_lower_triangle(n, entries)


def save_famd_projection(projection, directory, prefix="famd"):
    """Scores and loadings of a FAMD projection as two CSV files."""
    os.makedirs(directory, exist_ok=True)
    names = [f"dim{i + 1}" for i in range(projection.num_dims)]
    pandas.DataFrame(projection.scores, columns=names).to_csv(
        os.path.join(directory, f"{prefix}_scores.csv"), index=False, float_format="%.17g"
    )
    pandas.DataFrame(projection.loadings, columns=names).to_csv(
        os.path.join(directory, f"{prefix}_loadings.csv"), index=False, float_format="%.17g"
    )


def append_records(rows, filename):
    """Append benchmark records (a list of dicts) to a versioned CSV file."""
    if not rows:
        return
    frame = pandas.DataFrame(rows)
    new_file = not os.path.exists(filename) or os.path.getsize(filename) == 0
    if new_file:
        _makedirs_for(filename)
        with open(filename, "w") as f:
            f.write(RECORD_VERSION + "\n")
    frame.to_csv(filename, mode="a", header=new_file, index=False)


def load_records(filename) -> pandas.DataFrame:
    """Read a record CSV; SchemaMismatchError when the version line is missing."""
    with open(filename) as f:
        version = f.readline().strip()
    if version != RECORD_VERSION:
        raise SchemaMismatchError(
            f"{filename} starts with '{version}', expected '{RECORD_VERSION}'"
        )
    return pandas.read_csv(filename, skiprows=1, keep_default_na=False, na_values=[""])


def record_key(row) -> tuple:
    return tuple(row[column] for column in KEY_COLUMNS)


def completed_keys(filename) -> set:
    """Keys of every record already written, for resuming a sweep."""
    if not os.path.exists(filename) or os.path.getsize(filename) == 0:
        return set()
    frame = load_records(filename)
    return {record_key(row) for row in frame[list(KEY_COLUMNS)].to_dict("records")}
