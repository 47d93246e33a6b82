"""Pairwise dissimilarities for mixed-type observations."""

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy
from scipy.spatial.distance import pdist, squareform

from data.mixed_dataset import (
    MixedDataset,
    dummy_code,
    z_standardize,
)
from utils.exceptions import (
    InvalidDatasetError,
    NonpositiveWeightError,
    SchemaMismatchError,
)
from utils.normalization import column_ranges


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Dense symmetric n x n matrix with zero diagonal."""

    values: numpy.ndarray

    def __post_init__(self):
        values = numpy.array(self.values, dtype=float, copy=True)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InvalidDatasetError(f"Dissimilarities must be square, got {values.shape}")
        if not numpy.allclose(values, values.T, rtol=0.0, atol=1e-10):
            raise InvalidDatasetError("Dissimilarity matrix is not symmetric")
        if numpy.any(values < -1e-12):
            raise InvalidDatasetError("Dissimilarity matrix has negative entries")
        # Symmetrize exactly so solvers see bit-identical (i, j) and (j, i)
        values = numpy.maximum((values + values.T) / 2.0, 0.0)
        numpy.fill_diagonal(values, 0.0)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def lower_triangle(self) -> numpy.ndarray:
        """Strict lower triangle in row-major order."""
        rows, cols = numpy.tril_indices(self.n, k=-1)
        return self.values[rows, cols]

    @classmethod
    def from_lower_triangle(cls, n: int, entries) -> "DissimilarityMatrix":
        values = numpy.zeros((n, n))
        rows, cols = numpy.tril_indices(n, k=-1)
        values[rows, cols] = entries
        values[cols, rows] = entries
        return cls(values)


@dataclass(frozen=True)
class CooccurrenceModel:
    """Co-occurrence category distances and continuous weights.

    distances[j] is the (c_j, c_j) table of category distances for the j-th
    column of the augmented layout: the categorical columns first, followed by
    the discretized continuous columns.
    """

    num_continuous: int
    levels: tuple
    distances: tuple
    continuous_weights: numpy.ndarray
    bin_edges: tuple

    def category_distances(self, column: int) -> numpy.ndarray:
        return self.distances[column]

    def bin_distances(self, column: int) -> numpy.ndarray:
        return self.distances[len(self.levels) + column]


def gower_matrix(data: MixedDataset, weights=None) -> DissimilarityMatrix:
    """Gower dissimilarity: 1 minus the weighted mean of per-variable similarities.

    Continuous similarity is 1 - |x - x'| / range and categorical similarity is
    the Kronecker delta.

    Args:
        data: Mixed dataset
        weights: Optional positive weight per variable, continuous columns first

    Raises:
        ConstantColumnError: for a continuous column with zero range
        NonpositiveWeightError: for a weight <= 0
    """
    p = data.num_variables
    if weights is None:
        weights = numpy.ones(p)
    weights = numpy.asarray(weights, dtype=float)
    if weights.shape != (p,):
        raise NonpositiveWeightError(f"Expected {p} weights, got {weights.shape}")
    if numpy.any(weights <= 0):
        raise NonpositiveWeightError("Gower weights must be positive")

    similarity = numpy.zeros((data.n, data.n))
    if data.num_continuous:
        _, _, spread = column_ranges(data.continuous)
        for j in range(data.num_continuous):
            column = data.continuous[:, j]
            diff = numpy.abs(column[:, None] - column[None, :]) / spread[j]
            similarity += weights[j] * (1.0 - diff)
    for j in range(data.num_categorical):
        column = data.categorical[:, j]
        similarity += weights[data.num_continuous + j] * (column[:, None] == column[None, :])

    return DissimilarityMatrix(1.0 - similarity / weights.sum())


def hl_category_scale(proportions) -> float:
    """Scale c solving sum_h E{(Z_h1 - Z_h2)^2} = 1 for one dummy-coded column.

    Each dummy differs between two independent draws with probability
    2 p_h (1 - p_h), so the expectation is 2 c^2 (1 - sum p_h^2).
    """
    gini = 1.0 - numpy.sum(numpy.asarray(proportions) ** 2)
    if gini <= 0:
        return 0.0
    return float(1.0 / numpy.sqrt(2.0 * gini))


def hl_scaled_matrix(data: MixedDataset) -> DissimilarityMatrix:
    """Euclidean distances after unit-variance and category-block scaling."""
    standardized, params = z_standardize(data)
    scales = numpy.array([hl_category_scale(p) for p in params.proportions])
    for j in numpy.flatnonzero(scales == 0):
        logging.warning(f"Categorical column {j} is constant and carries no weight")
    matrix = dummy_code(standardized, scales)
    return DissimilarityMatrix(squareform(pdist(matrix, metric="euclidean")))


def cooccurrence_distance(p_a, p_b):
    """Distance between two categories from their conditional distributions.

    Maximizes P(sigma | A) + P(not sigma | B) - 1 over subsets sigma of the
    other column's levels; the maximizer keeps every level more likely under A.

    Returns:
        Tuple (distance, sigma) with sigma a boolean mask over levels
    """
    p_a = numpy.asarray(p_a, dtype=float)
    p_b = numpy.asarray(p_b, dtype=float)
    sigma = p_a > p_b
    value = p_a[sigma].sum() + (1.0 - p_b[sigma].sum()) - 1.0
    return float(min(max(value, 0.0), 1.0)), sigma


def discretize_equal_width(column, bins: int):
    """Equal-width interval codes 0..bins-1 and the interior bin edges."""
    low, high = column.min(), column.max()
    edges = numpy.linspace(low, high, bins + 1)[1:-1]
    return numpy.searchsorted(edges, column, side="right"), edges


def _conditional_table(codes_j, codes_k, levels_j, levels_k):
    """Rows P(x_k = t | x_j = A); all-zero rows for categories without support."""
    counts = numpy.zeros((levels_j, levels_k))
    numpy.add.at(counts, (codes_j, codes_k), 1.0)
    support = counts.sum(axis=1)
    table = numpy.divide(
        counts, support[:, None], out=numpy.zeros_like(counts), where=support[:, None] > 0
    )
    return table


def ahmad_dey_model(data: MixedDataset, bins: int = 4) -> CooccurrenceModel:
    """Fit co-occurrence category distances and continuous weights.

    Continuous columns are discretized into equal-width intervals and join the
    categorical columns; the distance between two categories of one column is
    the mean of their co-occurrence distances against every other column.
    Distances involving a category without support are 0. A continuous weight
    is the mean distance over every pair of its intervals, empty ones included.
    """
    if data.n < 2:
        raise InvalidDatasetError("Co-occurrence distances need at least two observations")
    if bins < 2:
        raise ValueError(f"Need at least two bins, got {bins}")

    standardized, _ = z_standardize(data)
    codes = [data.categorical[:, j] for j in range(data.num_categorical)]
    levels = list(data.levels)
    edges = []
    for j in range(data.num_continuous):
        binned, column_edges = discretize_equal_width(standardized.continuous[:, j], bins)
        codes.append(binned)
        levels.append(bins)
        edges.append(column_edges)

    num_columns = len(codes)
    if num_columns == 1:
        logging.warning("Only one column: category distances fall back to simple matching")

    distances = []
    for j in range(num_columns):
        delta = numpy.zeros((levels[j], levels[j]))
        present = numpy.bincount(codes[j], minlength=levels[j]) > 0
        tables = [
            _conditional_table(codes[j], codes[k], levels[j], levels[k])
            for k in range(num_columns)
            if k != j
        ]
        for a, b in combinations(range(levels[j]), 2):
            if not (present[a] and present[b]):
                continue
            if not tables:
                value = 1.0
            else:
                value = numpy.mean(
                    [cooccurrence_distance(table[a], table[b])[0] for table in tables]
                )
            delta[a, b] = delta[b, a] = value
        distances.append(delta)

    weights = numpy.zeros(data.num_continuous)
    for j in range(data.num_continuous):
        delta = distances[data.num_categorical + j]
        weights[j] = numpy.mean([delta[a, b] for a, b in combinations(range(bins), 2)])

    return CooccurrenceModel(
        num_continuous=data.num_continuous,
        levels=tuple(data.levels),
        distances=tuple(distances),
        continuous_weights=weights,
        bin_edges=tuple(edges),
    )


def ahmad_dey_matrix(data: MixedDataset, model: CooccurrenceModel) -> DissimilarityMatrix:
    """Weighted squared Euclidean part plus squared category distances.

    Raises:
        SchemaMismatchError: if the model was fitted on a different column layout
    """
    if model.num_continuous != data.num_continuous or tuple(model.levels) != data.levels:
        raise SchemaMismatchError(
            f"Model expects {model.num_continuous} continuous columns with levels "
            f"{model.levels}, dataset has {data.num_continuous} and {data.levels}"
        )
    values = numpy.zeros((data.n, data.n))
    if data.num_continuous:
        standardized, _ = z_standardize(data)
        weighted = standardized.continuous * model.continuous_weights
        values += squareform(pdist(weighted, metric="sqeuclidean"))
    for j in range(data.num_categorical):
        column = data.categorical[:, j]
        values += model.category_distances(j)[column[:, None], column[None, :]] ** 2
    return DissimilarityMatrix(values)
