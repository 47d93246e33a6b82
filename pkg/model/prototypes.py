"""Centroid-based partitioning: K-Means, K-Prototypes and Modha-Spangler weighted K-Means.

All three share one Lloyd engine. An objective supplies the point-to-prototype
costs and the optimal prototype update for a fixed partition, so seeding,
tie-breaking and empty-cluster repair are identical across methods.
"""

import copy
import logging
from dataclasses import dataclass

import numpy
from scipy.spatial.distance import cdist

from data.mixed_dataset import (
    MixedDataset,
    Partition,
    categorical_variance,
    check_num_clusters,
    dummy_code,
    z_standardize,
)
from utils.exceptions import AllConstantError, ZeroVectorError

WEIGHT_PRESETS = {
    "uniform": tuple(i / 11 for i in range(1, 11)),
    "sixths": tuple(i / 6 for i in range(1, 6)),
}


@dataclass(frozen=True)
class Prototype:
    """Cluster representatives, one row per cluster.

    continuous holds the (K, p_r) means. categorical holds the (K, p_c) modal
    levels for K-Prototypes, or the (K, sum c_j) in-cluster dummy means for
    Modha-Spangler.
    """

    continuous: numpy.ndarray
    categorical: numpy.ndarray

    @property
    def num_clusters(self) -> int:
        return self.continuous.shape[0]


@dataclass(frozen=True)
class GammaWeight:
    """Categorical weight and how it was chosen.

    provenance is "variance-ratio", "grid-search", "fixed" or "continuous-only";
    for a grid search, grid and scores hold every candidate and its distortion ratio.
    """

    gamma: float
    provenance: str
    grid: tuple = ()
    scores: tuple = ()

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"Categorical weight must be nonnegative, got {self.gamma}")


@dataclass(frozen=True)
class CentroidFit:
    partition: Partition
    prototypes: Prototype
    cost: float
    cost_history: tuple
    iterations: int
    restarts: int


def squared_distances(points, centers) -> numpy.ndarray:
    if points.shape[1] == 0:
        return numpy.zeros((points.shape[0], centers.shape[0]))
    return cdist(points, centers, metric="sqeuclidean")


def cluster_means(points, labels, num_clusters) -> numpy.ndarray:
    sums = numpy.zeros((num_clusters, points.shape[1]))
    numpy.add.at(sums, labels, points)
    counts = numpy.bincount(labels, minlength=num_clusters)
    return sums / numpy.maximum(counts, 1)[:, None]


def cluster_modes(categorical, labels, num_clusters, levels) -> numpy.ndarray:
    """Most frequent level per cluster and column; ties go to the lowest level."""
    modes = numpy.zeros((num_clusters, len(levels)), dtype=int)
    for k in range(num_clusters):
        members = categorical[labels == k]
        for j, c in enumerate(levels):
            modes[k, j] = numpy.argmax(numpy.bincount(members[:, j], minlength=c))
    return modes


class _EuclideanObjective:
    """Within-cluster sum of squares."""

    def __init__(self, points):
        self.points = points
        self.n = points.shape[0]

    def seed(self, indices):
        return Prototype(self.points[indices].copy(), numpy.zeros((len(indices), 0)))

    def costs(self, prototypes):
        return squared_distances(self.points, prototypes.continuous)

    def update(self, labels, num_clusters):
        return Prototype(
            cluster_means(self.points, labels, num_clusters), numpy.zeros((num_clusters, 0))
        )


class _MismatchObjective(_EuclideanObjective):
    """Squared Euclidean distance plus gamma times the number of mismatched categories."""

    def __init__(self, continuous, categorical, levels, gamma):
        super().__init__(continuous)
        self.categorical = categorical
        self.levels = levels
        self.gamma = gamma

    def seed(self, indices):
        return Prototype(self.points[indices].copy(), self.categorical[indices].copy())

    def costs(self, prototypes):
        mismatch = (self.categorical[:, None, :] != prototypes.categorical[None, :, :]).sum(
            axis=2
        )
        return squared_distances(self.points, prototypes.continuous) + self.gamma * mismatch

    def update(self, labels, num_clusters):
        return Prototype(
            cluster_means(self.points, labels, num_clusters),
            cluster_modes(self.categorical, labels, num_clusters, self.levels),
        )


class _CosineObjective(_EuclideanObjective):
    """Squared Euclidean distance plus gamma times the cosine dissimilarity of dummy blocks."""

    def __init__(self, continuous, dummies, gamma):
        super().__init__(continuous)
        self.dummies = dummies
        self.gamma = gamma

    def seed(self, indices):
        return Prototype(self.points[indices].copy(), self.dummies[indices].copy())

    def costs(self, prototypes):
        costs = squared_distances(self.points, prototypes.continuous)
        if self.dummies.shape[1]:
            costs = costs + self.gamma * cdist(
                self.dummies, prototypes.categorical, metric="cosine"
            )
        return costs

    def update(self, labels, num_clusters):
        return Prototype(
            cluster_means(self.points, labels, num_clusters),
            cluster_means(self.dummies, labels, num_clusters),
        )


def _repair_empty(costs, labels, num_clusters):
    """Move the worst-fitting point of a multi-point cluster into each empty cluster."""
    for cluster in numpy.flatnonzero(numpy.bincount(labels, minlength=num_clusters) == 0):
        sizes = numpy.bincount(labels, minlength=num_clusters)
        own = costs[numpy.arange(labels.shape[0]), labels].copy()
        own[sizes[labels] < 2] = -numpy.inf
        labels[int(numpy.argmax(own))] = cluster
    return labels


def _total_cost(objective, labels, prototypes):
    return float(objective.costs(prototypes)[numpy.arange(objective.n), labels].sum())


def _lloyd_single(objective, initial, max_iter):
    num_clusters = len(initial)
    prototypes = objective.seed(initial)
    labels = None
    history = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        costs = objective.costs(prototypes)
        new_labels = _repair_empty(costs, numpy.argmin(costs, axis=1), num_clusters)
        if labels is not None and numpy.array_equal(new_labels, labels):
            break
        labels = new_labels
        prototypes = objective.update(labels, num_clusters)
        history.append(_total_cost(objective, labels, prototypes))
    return labels, prototypes, history, iterations


def lloyd(objective, num_clusters: int, starts: int, rng, max_iter: int = 100) -> CentroidFit:
    """Best-of-starts alternating minimization; each start seeds at distinct random points.

    Ties in the final cost go to the earliest start.
    """
    check_num_clusters(num_clusters, objective.n)
    if starts < 1:
        raise ValueError(f"Need at least one start, got {starts}")
    best = None
    for _ in range(starts):
        initial = rng.choice(objective.n, size=num_clusters, replace=False)
        labels, prototypes, history, iterations = _lloyd_single(objective, initial, max_iter)
        if best is None or history[-1] < best.cost:
            best = CentroidFit(
                partition=Partition(labels, num_clusters),
                prototypes=prototypes,
                cost=history[-1],
                cost_history=tuple(history),
                iterations=iterations,
                restarts=starts,
            )
    return best


def kmeans(points, num_clusters: int, starts: int = 1, seed=None, max_iter: int = 100) -> CentroidFit:
    """Lloyd's K-Means on a real matrix.

    Args:
        points: Array of shape (n, p)
        num_clusters: Number of clusters K
        starts: Random seedings; the lowest within-cluster sum of squares is kept
        seed: Seed or numpy Generator
        max_iter: Maximum Lloyd iterations per start
    """
    points = numpy.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    rng = numpy.random.default_rng(seed)
    return lloyd(_EuclideanObjective(points), num_clusters, starts, rng, max_iter)


def variance_ratio_gamma(data: MixedDataset) -> GammaWeight:
    """Mean continuous sample variance over mean categorical variance.

    Raises:
        AllConstantError: if every categorical column is constant
    """
    if data.num_categorical == 0:
        return GammaWeight(0.0, "continuous-only")
    if data.num_continuous == 0:
        return GammaWeight(1.0, "fixed")
    continuous_variance = numpy.mean(data.continuous.var(axis=0, ddof=1))
    categorical = numpy.mean(
        [categorical_variance(data.categorical[:, j], c) for j, c in enumerate(data.levels)]
    )
    if categorical <= 0:
        raise AllConstantError("Every categorical column is constant")
    return GammaWeight(float(continuous_variance / categorical), "variance-ratio")


def k_prototypes(
    data: MixedDataset,
    num_clusters: int,
    starts: int = 1,
    seed=None,
    gamma=None,
    standardize: bool = True,
    max_iter: int = 100,
):
    """Huang's K-Prototypes with a single categorical weight.

    Args:
        data: Mixed dataset
        num_clusters: Number of clusters K
        starts: Random seedings; the lowest cost is kept
        seed: Seed or numpy Generator
        gamma: Fixed categorical weight; defaults to the variance ratio
        standardize: Z-standardize continuous columns first
        max_iter: Maximum iterations per start

    Returns:
        Tuple (CentroidFit, GammaWeight)
    """
    if standardize:
        data, _ = z_standardize(data)
    weight = variance_ratio_gamma(data) if gamma is None else GammaWeight(float(gamma), "fixed")
    logging.debug(f"K-Prototypes categorical weight {weight.gamma:.4g} ({weight.provenance})")
    objective = _MismatchObjective(data.continuous, data.categorical, data.levels, weight.gamma)
    rng = numpy.random.default_rng(seed)
    return lloyd(objective, num_clusters, starts, rng, max_iter), weight


def weight_grid(preset="uniform") -> tuple:
    """Candidate categorical weights gamma = (1 - w) / w for continuous shares w.

    A preset name selects the continuous shares; any other sequence is taken as
    explicit gamma values.
    """
    if isinstance(preset, str):
        if preset not in WEIGHT_PRESETS:
            raise ValueError(
                f"Unknown weight preset '{preset}' (choose from {sorted(WEIGHT_PRESETS)})"
            )
        return tuple((1.0 - w) / w for w in WEIGHT_PRESETS[preset])
    grid = tuple(float(g) for g in preset)
    if not grid or min(grid) < 0:
        raise ValueError("Weight grid must be a nonempty sequence of nonnegative values")
    return grid


def _between_ratio(within, total):
    between = total - within
    if between <= 0:
        return numpy.inf
    return within / between


def distortion_ratio(continuous, dummies, partition: Partition) -> float:
    """Product of within-to-between dispersion ratios of the continuous and dummy parts.

    The continuous part uses squared Euclidean distances and the dummy part the
    cosine dissimilarity, each measured against cluster and overall means.
    """
    labels = partition.assign
    k = partition.num_clusters
    ratio = 1.0
    if continuous.shape[1]:
        centers = cluster_means(continuous, labels, k)
        within = ((continuous - centers[labels]) ** 2).sum()
        total = ((continuous - continuous.mean(axis=0)) ** 2).sum()
        ratio *= _between_ratio(within, total)
    if dummies.shape[1]:
        centers = cluster_means(dummies, labels, k)
        to_centers = cdist(dummies, centers, metric="cosine")
        within = to_centers[numpy.arange(labels.shape[0]), labels].sum()
        total = cdist(dummies, dummies.mean(axis=0, keepdims=True), metric="cosine").sum()
        ratio *= _between_ratio(within, total)
    return float(ratio)


def modha_spangler(
    data: MixedDataset,
    num_clusters: int,
    starts: int = 1,
    weight_grid_values=None,
    seed=None,
    standardize: bool = True,
    max_iter: int = 100,
):
    """Weighted K-Means with a brute-force search over the categorical weight.

    Every grid point restarts from the same random stream; the weight whose
    solution has the smallest distortion ratio wins, ties to the earliest.

    Returns:
        Tuple (CentroidFit, GammaWeight)

    Raises:
        ZeroVectorError: if an observation has an all-zero dummy block
    """
    grid = weight_grid("uniform" if weight_grid_values is None else weight_grid_values)
    if standardize:
        data, _ = z_standardize(data)
    dummies = dummy_code(data)[:, data.num_continuous :]
    if dummies.shape[1] and not numpy.all(dummies.any(axis=1)):
        raise ZeroVectorError("Observation with an all-zero dummy block")

    rng = numpy.random.default_rng(seed)
    fits, ratios = [], []
    for gamma in grid:
        objective = _CosineObjective(data.continuous, dummies, gamma)
        fit = lloyd(objective, num_clusters, starts, copy.deepcopy(rng), max_iter)
        ratio = distortion_ratio(data.continuous, dummies, fit.partition)
        fits.append(fit)
        ratios.append(ratio if numpy.isfinite(ratio) else numpy.inf)

    best = int(numpy.argmin(ratios))
    logging.debug(f"Modha-Spangler picked gamma {grid[best]:.4g} from {len(grid)} candidates")
    return fits[best], GammaWeight(grid[best], "grid-search", grid, tuple(ratios))
