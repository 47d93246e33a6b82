"""Mixed-type dataset model, partitions, dummy coding and standardization."""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy

from utils.exceptions import InvalidDatasetError, TooManyClustersError
from utils.normalization import (
    column_moments,
    level_proportions,
    normalize_standard,
)


def _frozen(array, dtype):
    array = numpy.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class MixedDataset:
    """Observations over continuous and categorical columns.

    Continuous values are stored as an (n, p_r) float matrix and categorical
    values as an (n, p_c) matrix of dense level codes 0..c_j-1.
    """

    continuous: numpy.ndarray
    categorical: numpy.ndarray
    levels: tuple
    truth: Optional[numpy.ndarray] = None
    vocabulary: Optional[tuple] = None

    def __post_init__(self):
        continuous = numpy.asarray(self.continuous, dtype=float)
        categorical = numpy.asarray(self.categorical)
        if continuous.ndim == 1:
            continuous = continuous.reshape(-1, 1) if continuous.size else numpy.zeros((0, 0))
        if categorical.ndim == 1:
            categorical = (
                categorical.reshape(-1, 1) if categorical.size else numpy.zeros((0, 0), int)
            )

        n = max(continuous.shape[0], categorical.shape[0])
        if continuous.shape[1] == 0:
            continuous = numpy.zeros((n, 0))
        if categorical.shape[1] == 0:
            categorical = numpy.zeros((n, 0), dtype=int)

        if continuous.shape[0] != categorical.shape[0]:
            raise InvalidDatasetError(
                f"Continuous part has {continuous.shape[0]} rows, "
                f"categorical part has {categorical.shape[0]}"
            )
        if n < 1:
            raise InvalidDatasetError("Dataset needs at least one observation")
        if continuous.shape[1] + categorical.shape[1] < 1:
            raise InvalidDatasetError("Dataset needs at least one column")
        if not numpy.all(numpy.isfinite(continuous)):
            raise InvalidDatasetError("Continuous part contains missing entries")

        levels = tuple(int(c) for c in self.levels)
        if len(levels) != categorical.shape[1]:
            raise InvalidDatasetError(
                f"{len(levels)} level counts given for "
                f"{categorical.shape[1]} categorical columns"
            )
        if categorical.size and not numpy.issubdtype(categorical.dtype, numpy.integer):
            if not numpy.all(numpy.mod(categorical, 1) == 0):
                raise InvalidDatasetError("Categorical codes must be integers")
        categorical = categorical.astype(int)
        for j, c in enumerate(levels):
            column = categorical[:, j]
            if c < 1 or column.min() < 0 or column.max() >= c:
                raise InvalidDatasetError(
                    f"Categorical column {j} has codes outside [0, {c})"
                )

        object.__setattr__(self, "continuous", _frozen(continuous, float))
        object.__setattr__(self, "categorical", _frozen(categorical, int))
        object.__setattr__(self, "levels", levels)

        if self.truth is not None:
            truth = _frozen(self.truth, int)
            if truth.shape != (n,):
                raise InvalidDatasetError(
                    f"Truth labels have shape {truth.shape}, expected ({n},)"
                )
            object.__setattr__(self, "truth", truth)

        if self.vocabulary is not None:
            vocabulary = tuple(tuple(str(v) for v in vocab) for vocab in self.vocabulary)
            if [len(v) for v in vocabulary] != list(levels):
                raise InvalidDatasetError("Vocabulary sizes do not match level counts")
            object.__setattr__(self, "vocabulary", vocabulary)

    @property
    def n(self) -> int:
        return self.continuous.shape[0]

    @property
    def num_continuous(self) -> int:
        return self.continuous.shape[1]

    @property
    def num_categorical(self) -> int:
        return self.categorical.shape[1]

    @property
    def num_variables(self) -> int:
        return self.num_continuous + self.num_categorical

    def with_continuous(self, continuous) -> "MixedDataset":
        return replace(self, continuous=continuous)


@dataclass(frozen=True)
class Partition:
    """Assignment of n observations to clusters 0..K-1."""

    assign: numpy.ndarray
    num_clusters: int

    def __post_init__(self):
        assign = _frozen(self.assign, int)
        if assign.ndim != 1:
            raise InvalidDatasetError("Partition must be one-dimensional")
        if self.num_clusters < 1:
            raise InvalidDatasetError("Partition needs at least one cluster")
        if assign.size and (assign.min() < 0 or assign.max() >= self.num_clusters):
            raise InvalidDatasetError(
                f"Cluster indices must lie in [0, {self.num_clusters})"
            )
        object.__setattr__(self, "assign", assign)

    @property
    def n(self) -> int:
        return self.assign.shape[0]

    def sizes(self) -> numpy.ndarray:
        return numpy.bincount(self.assign, minlength=self.num_clusters)

    def empty_clusters(self) -> numpy.ndarray:
        return numpy.flatnonzero(self.sizes() == 0)

    @property
    def is_degenerate(self) -> bool:
        """True when at least one cluster is empty."""
        return bool(self.empty_clusters().size)

    def indicator(self) -> numpy.ndarray:
        """(n, K) binary membership matrix."""
        z = numpy.zeros((self.n, self.num_clusters))
        z[numpy.arange(self.n), self.assign] = 1.0
        return z


@dataclass(frozen=True)
class DummyCoding:
    """Layout of the one-hot expansion of a dataset.

    blocks[j] is the slice of columns holding categorical column j.
    """

    num_continuous: int
    levels: tuple
    scales: Optional[numpy.ndarray] = None
    blocks: tuple = field(init=False)

    def __post_init__(self):
        blocks = []
        start = self.num_continuous
        for c in self.levels:
            blocks.append(slice(start, start + c))
            start += c
        object.__setattr__(self, "blocks", tuple(blocks))
        if self.scales is not None:
            scales = _frozen(self.scales, float)
            if scales.shape != (len(self.levels),):
                raise InvalidDatasetError("One scale factor per categorical column")
            object.__setattr__(self, "scales", scales)

    @property
    def p_star(self) -> int:
        return self.num_continuous + sum(self.levels)

    @property
    def categorical_columns(self) -> slice:
        return slice(self.num_continuous, self.p_star)


@dataclass(frozen=True)
class StandardizationParams:
    """Column statistics of a dataset (sample variance, divisor n-1)."""

    mean: numpy.ndarray
    std: numpy.ndarray
    minimum: numpy.ndarray
    maximum: numpy.ndarray
    proportions: tuple

    @property
    def range(self) -> numpy.ndarray:
        return self.maximum - self.minimum


def make_partition(assign: Sequence[int], num_clusters: Optional[int] = None) -> Partition:
    """Build a Partition, inferring K from the labels when not given."""
    assign = numpy.asarray(assign, dtype=int)
    if num_clusters is None:
        num_clusters = int(assign.max()) + 1 if assign.size else 1
    return Partition(assign, num_clusters)


def check_num_clusters(num_clusters: int, n: int):
    if num_clusters > n:
        raise TooManyClustersError(num_clusters, n)
    if num_clusters < 1:
        raise ValueError(f"Number of clusters must be positive, got {num_clusters}")


def standardization_params(data: MixedDataset) -> StandardizationParams:
    """Collect column statistics without modifying the dataset."""
    if data.num_continuous:
        mean, std = column_moments(data.continuous, ddof=1)
        minimum = data.continuous.min(axis=0)
        maximum = data.continuous.max(axis=0)
    else:
        mean = std = minimum = maximum = numpy.zeros(0)
    proportions = tuple(
        level_proportions(data.categorical[:, j], c) for j, c in enumerate(data.levels)
    )
    return StandardizationParams(mean, std, minimum, maximum, proportions)


def z_standardize(data: MixedDataset):
    """Scale every continuous column to mean 0 and unit sample variance.

    Returns:
        Tuple (standardized dataset, StandardizationParams of the input)

    Raises:
        ConstantColumnError: if a continuous column has zero standard deviation
    """
    params = standardization_params(data)
    if not data.num_continuous:
        return data, params
    scaled = normalize_standard(data.continuous, params.mean, params.std)
    return data.with_continuous(scaled), params


def dummy_coding(data: MixedDataset, scales=None) -> DummyCoding:
    return DummyCoding(data.num_continuous, data.levels, scales)


def dummy_code(data: MixedDataset, scales=None) -> numpy.ndarray:
    """Continuous columns followed by one indicator column per category level.

    Args:
        data: Dataset to expand
        scales: Optional per-categorical-column factors multiplied into each block

    Returns:
        Array of shape (n, p_star)
    """
    coding = dummy_coding(data, scales)
    matrix = numpy.zeros((data.n, coding.p_star))
    matrix[:, : data.num_continuous] = data.continuous
    rows = numpy.arange(data.n)
    for j, block in enumerate(coding.blocks):
        factor = 1.0 if coding.scales is None else coding.scales[j]
        matrix[rows, block.start + data.categorical[:, j]] = factor
    return matrix


def categorical_variance(column, num_levels: int) -> float:
    """Gini variance 1 - sum_h p_h^2 of a categorical column."""
    column = numpy.asarray(column, dtype=int)
    if column.size == 0:
        raise InvalidDatasetError("Categorical variance of an empty column")
    proportions = level_proportions(column, num_levels)
    return float(1.0 - numpy.sum(proportions**2))
