"""Dimension-reduction clustering: FAMD followed by K-Means, and Mixed Reduced K-Means."""

import logging
from dataclasses import dataclass

import numpy
from scipy import linalg

from data.mixed_dataset import MixedDataset, Partition, check_num_clusters, dummy_code
from model.prototypes import cluster_means, kmeans, squared_distances
from utils.exceptions import ConstantColumnError, RankDeficientError, ZeroVarianceError
from utils.normalization import level_proportions, zscore_columns


@dataclass(frozen=True)
class FamdProjection:
    """Principal components of the FAMD-standardized matrix.

    matrix is the standardized (n, p_star) matrix, loadings its top-d right
    singular vectors and scores the principal coordinates matrix @ loadings.
    """

    matrix: numpy.ndarray
    loadings: numpy.ndarray
    scores: numpy.ndarray
    singular_values: numpy.ndarray

    @property
    def num_dims(self) -> int:
        return self.loadings.shape[1]

    @property
    def eigenvalues(self) -> numpy.ndarray:
        """Inertia of every component, s^2 / n."""
        return self.singular_values**2 / self.matrix.shape[0]

    @property
    def explained_ratio(self) -> numpy.ndarray:
        """Share of the total inertia carried by each retained component."""
        total = self.eigenvalues.sum()
        return self.eigenvalues[: self.num_dims] / total


@dataclass(frozen=True)
class RkmState:
    """Mixed Reduced K-Means solution X ~ Z G B^T."""

    partition: Partition
    centroids: numpy.ndarray
    loadings: numpy.ndarray
    objective: float
    objective_history: tuple
    iterations: int
    restarts: int = 1

    @property
    def indicator(self) -> numpy.ndarray:
        return self.partition.indicator()


def _fix_signs(vectors):
    """Flip columns so the largest-magnitude entry of each is positive."""
    if vectors.size == 0:
        return vectors
    rows = numpy.argmax(numpy.abs(vectors), axis=0)
    signs = numpy.sign(vectors[rows, numpy.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def famd_matrix(data: MixedDataset) -> numpy.ndarray:
    """FAMD standardization of a mixed dataset.

    Continuous columns become z-scores (divisor n). Each indicator column is
    divided by the square root of its category proportion and then centered;
    levels that never occur give all-zero columns.
    """
    matrix = dummy_code(data)
    if data.num_continuous:
        matrix[:, : data.num_continuous], _, _ = zscore_columns(data.continuous, ddof=0)
    start = data.num_continuous
    for j, c in enumerate(data.levels):
        proportions = level_proportions(data.categorical[:, j], c)
        scale = numpy.zeros(c)
        scale[proportions > 0] = 1.0 / numpy.sqrt(proportions[proportions > 0])
        block = matrix[:, start : start + c] * scale
        matrix[:, start : start + c] = block - block.mean(axis=0)
        start += c
    return matrix


def famd_project(data: MixedDataset, num_dims: int) -> FamdProjection:
    """Top principal components of the FAMD-standardized matrix.

    Raises:
        RankDeficientError: when fewer than num_dims singular values are positive
    """
    matrix = famd_matrix(data)
    n, p_star = matrix.shape
    if num_dims < 1 or num_dims > min(n - 1, p_star):
        raise RankDeficientError(
            f"Cannot keep {num_dims} dimensions of an {n} x {p_star} matrix"
        )
    _, singular, right_t = linalg.svd(matrix, full_matrices=False)
    tolerance = max(n, p_star) * numpy.finfo(float).eps * max(singular[0], 1.0)
    rank = int(numpy.sum(singular > tolerance))
    if rank < num_dims:
        raise RankDeficientError(f"Only {rank} positive singular values, {num_dims} requested")

    loadings = _fix_signs(right_t[:num_dims].T)
    return FamdProjection(
        matrix=matrix,
        loadings=loadings,
        scores=matrix @ loadings,
        singular_values=singular,
    )


def correlation_ratio(scores, codes, num_levels) -> float:
    """Between-category sum of squares over total sum of squares."""
    centered = scores - scores.mean()
    total = numpy.sum(centered**2)
    counts = numpy.bincount(codes, minlength=num_levels)
    sums = numpy.bincount(codes, weights=centered, minlength=num_levels)
    present = counts > 0
    between = numpy.sum(sums[present] ** 2 / counts[present])
    return float(between / total)


def famd_criterion(scores, data: MixedDataset) -> float:
    """Sum of squared correlations with continuous columns and correlation ratios with categorical ones.

    Raises:
        ZeroVarianceError: if the score vector is constant
    """
    scores = numpy.asarray(scores, dtype=float)
    centered = scores - scores.mean()
    if not numpy.sum(centered**2) > 0:
        raise ZeroVarianceError("Score vector is constant")

    value = 0.0
    for j in range(data.num_continuous):
        column = data.continuous[:, j] - data.continuous[:, j].mean()
        if not numpy.sum(column**2) > 0:
            raise ConstantColumnError(j)
        value += numpy.dot(centered, column) ** 2 / (
            numpy.sum(centered**2) * numpy.sum(column**2)
        )
    for j, c in enumerate(data.levels):
        value += correlation_ratio(scores, data.categorical[:, j], c)
    return float(value)


def famd_kmeans(
    data: MixedDataset,
    num_clusters: int,
    starts: int = 1,
    seed=None,
    num_dims=None,
    max_iter: int = 100,
):
    """Tandem analysis: K-Means on the first K-1 FAMD principal coordinates.

    Returns:
        Tuple (CentroidFit, FamdProjection)
    """
    if num_clusters < 2:
        raise ValueError(f"FAMD/K-Means needs at least two clusters, got {num_clusters}")
    num_dims = num_clusters - 1 if num_dims is None else num_dims
    projection = famd_project(data, num_dims)
    fit = kmeans(projection.scores, num_clusters, starts=starts, seed=seed, max_iter=max_iter)
    return fit, projection


def rkm_loadings(matrix, labels, num_clusters, num_dims) -> numpy.ndarray:
    """Top eigenvectors of X^T P X, with P the projector onto the cluster indicators."""
    centers = cluster_means(matrix, labels, num_clusters)
    counts = numpy.bincount(labels, minlength=num_clusters)
    between = centers.T @ (centers * counts[:, None])
    _, vectors = linalg.eigh(between)
    return _fix_signs(vectors[:, ::-1][:, :num_dims])


def rkm_objective(matrix, partition: Partition, loadings, centroids=None) -> float:
    """Squared Frobenius norm of X - Z G B^T.

    centroids defaults to the least-squares G for the given partition and
    loadings, the cluster means of the scores X B.
    """
    scores = matrix @ loadings
    if centroids is None:
        centroids = cluster_means(scores, partition.assign, partition.num_clusters)
    fitted = (centroids @ loadings.T)[partition.assign]
    return float(numpy.sum((matrix - fitted) ** 2))


def _repair_empty(matrix, loadings, centroids, labels, num_clusters):
    """Move the point with the largest residual (from a cluster of two or more) into each empty cluster."""
    for cluster in numpy.flatnonzero(numpy.bincount(labels, minlength=num_clusters) == 0):
        sizes = numpy.bincount(labels, minlength=num_clusters)
        residual = numpy.sum((matrix - (centroids @ loadings.T)[labels]) ** 2, axis=1)
        residual[sizes[labels] < 2] = -numpy.inf
        labels[int(numpy.argmax(residual))] = cluster
    return labels


def _rkm_single(matrix, labels, num_clusters, num_dims, tol, max_iter):
    history = []
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        loadings = rkm_loadings(matrix, labels, num_clusters, num_dims)
        scores = matrix @ loadings
        centroids = cluster_means(scores, labels, num_clusters)
        new_labels = numpy.argmin(squared_distances(scores, centroids), axis=1)
        new_labels = _repair_empty(matrix, loadings, centroids, new_labels, num_clusters)
        centroids = cluster_means(scores, new_labels, num_clusters)
        objective = rkm_objective(
            matrix, Partition(new_labels, num_clusters), loadings, centroids
        )
        unchanged = numpy.array_equal(new_labels, labels)
        labels = new_labels
        previous = history[-1] if history else None
        history.append(objective)
        if unchanged:
            break
        if previous is not None and previous - objective <= tol * max(abs(previous), 1e-300):
            break

    partition = Partition(labels, num_clusters)
    loadings = rkm_loadings(matrix, labels, num_clusters, num_dims)
    centroids = cluster_means(matrix @ loadings, labels, num_clusters)
    objective = rkm_objective(matrix, partition, loadings, centroids)
    history.append(objective)
    return partition, loadings, centroids, history, sweeps


def _random_partition(rng, n, num_clusters):
    labels = rng.integers(0, num_clusters, size=n)
    labels[rng.choice(n, size=num_clusters, replace=False)] = numpy.arange(num_clusters)
    return labels


def mixed_rkm(
    data: MixedDataset,
    num_clusters: int,
    starts: int = 1,
    seed=None,
    tol: float = 1e-8,
    max_iter: int = 100,
    num_dims=None,
):
    """Mixed Reduced K-Means fitted by alternating least squares on the FAMD-standardized matrix.

    Each sweep updates the loadings B from the current partition, the reduced
    centroids G, and the partition by nearest centroid in the score space X B.
    Sweeps stop when the relative objective decrease is at most tol or after
    max_iter sweeps.

    Args:
        data: Mixed dataset
        num_clusters: Number of clusters K (at least two)
        starts: Random initial partitions; the lowest objective is kept
        seed: Seed or numpy Generator
        tol: Relative objective decrease for convergence
        max_iter: Maximum sweeps per start
        num_dims: Reduced dimension, K - 1 by default

    Returns:
        Tuple (Partition, RkmState)
    """
    if num_clusters < 2:
        raise ValueError(f"Mixed RKM needs at least two clusters, got {num_clusters}")
    matrix = famd_matrix(data)
    n, p_star = matrix.shape
    check_num_clusters(num_clusters, n)
    num_dims = num_clusters - 1 if num_dims is None else num_dims
    if num_dims < 1 or num_dims > p_star:
        raise RankDeficientError(f"Cannot keep {num_dims} of {p_star} dimensions")

    rng = numpy.random.default_rng(seed)
    best = None
    for _ in range(starts):
        initial = _random_partition(rng, n, num_clusters)
        partition, loadings, centroids, history, sweeps = _rkm_single(
            matrix, initial, num_clusters, num_dims, tol, max_iter
        )
        if best is None or history[-1] < best.objective:
            best = RkmState(
                partition=partition,
                centroids=centroids,
                loadings=loadings,
                objective=history[-1],
                objective_history=tuple(history),
                iterations=sweeps,
                restarts=starts,
            )
    logging.debug(f"Mixed RKM objective {best.objective:.6g} after {best.iterations} sweeps")
    return best.partition, best
