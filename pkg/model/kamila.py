"""KAMILA: radial kernel density for continuous columns combined with a multinomial categorical model."""

import logging
from dataclasses import dataclass, replace

import numpy
from scipy.spatial.distance import cdist
from scipy.special import gammaln
from scipy.stats import iqr
from sklearn.neighbors import KernelDensity

from data.mixed_dataset import MixedDataset, Partition, check_num_clusters, z_standardize
from model.prototypes import cluster_means
from utils.exceptions import InvalidDatasetError

DENSITY_FLOOR = 1e-12
RADIUS_FLOOR = 1e-10
SMOOTHING = 0.025


@dataclass(frozen=True)
class KamilaState:
    """Fitted KAMILA parameters.

    centroids, theta, radii and bandwidth are the values that produced the
    stored partition, so recomputing the scores from them reproduces it.
    theta[j] is a (K, c_j) table of per-cluster level probabilities.
    """

    partition: Partition
    centroids: numpy.ndarray
    theta: tuple
    radii: numpy.ndarray
    bandwidth: float
    objective: float
    iterations: int
    restarts: int = 1


def silverman_bandwidth(sample) -> float:
    """Rule-of-thumb bandwidth 0.9 min(sd, IQR / 1.34) n^(-1/5)."""
    sample = numpy.asarray(sample, dtype=float)
    n = sample.shape[0]
    sd = sample.std(ddof=1) if n > 1 else 0.0
    spreads = numpy.array([sd, iqr(sample) / 1.34])
    positive = spreads[spreads > 0]
    spread = positive.min() if positive.size else 1.0
    return float(0.9 * spread * n ** (-0.2))


def radial_log_density(
    r,
    radii,
    p_r: int,
    bandwidth=None,
    density_floor: float = DENSITY_FLOOR,
    radius_floor: float = RADIUS_FLOOR,
):
    """Log density of a spherically symmetric distribution at distance r from its center.

    The radial density is a Gaussian kernel density estimate over radii; the
    change of variables to p_r dimensions adds
    log Gamma(p_r / 2 + 1) - (p_r - 1) log r - log p_r - (p_r / 2) log pi.

    Args:
        r: Distance or array of distances
        radii: Sample of minimum distances the density is estimated from
        p_r: Number of continuous dimensions
        bandwidth: Kernel bandwidth; Silverman's rule on radii by default
        density_floor: Lower bound applied to the radial density before the log
        radius_floor: Lower bound applied to r in the (p_r - 1) log r term
    """
    radii = numpy.asarray(radii, dtype=float).reshape(-1, 1)
    if radii.size == 0:
        raise InvalidDatasetError("Radial density needs at least one radius")
    r = numpy.asarray(r, dtype=float)
    if bandwidth is None:
        bandwidth = silverman_bandwidth(radii[:, 0])

    kde = KernelDensity(kernel="gaussian", bandwidth=bandwidth).fit(radii)
    log_radial = kde.score_samples(r.reshape(-1, 1)).reshape(r.shape)
    log_radial = numpy.maximum(log_radial, numpy.log(density_floor))
    constant = gammaln(p_r / 2.0 + 1.0) - numpy.log(p_r) - (p_r / 2.0) * numpy.log(numpy.pi)
    log_r = numpy.log(numpy.maximum(r, radius_floor))
    return log_radial + constant - (p_r - 1) * log_r


def categorical_log_likelihood(categorical, theta) -> numpy.ndarray:
    """(n, K) sum over columns of log theta_lj(x_ij)."""
    num_clusters = theta[0].shape[0] if theta else 0
    total = numpy.zeros((categorical.shape[0], num_clusters))
    for j, table in enumerate(theta):
        total += numpy.log(table[:, categorical[:, j]]).T
    return total


def kamila_scores(
    continuous,
    categorical,
    centroids,
    theta,
    bandwidth=None,
    density_floor: float = DENSITY_FLOOR,
    radius_floor: float = RADIUS_FLOOR,
):
    """Per-point, per-cluster log-scores and the minimum-distance sample behind them.

    Returns:
        Tuple (scores of shape (n, K), radii, bandwidth)
    """
    distances = cdist(continuous, centroids, metric="euclidean")
    radii = distances.min(axis=1)
    if bandwidth is None:
        bandwidth = silverman_bandwidth(radii)
    scores = radial_log_density(
        distances, radii, continuous.shape[1], bandwidth, density_floor, radius_floor
    )
    if theta:
        scores = scores + categorical_log_likelihood(categorical, theta)
    return scores, radii, bandwidth


def update_theta(categorical, labels, num_clusters, levels, smoothing=SMOOTHING) -> tuple:
    """Add-smoothing in-cluster level frequencies (count + delta) / (n_l + delta c_j)."""
    tables = []
    counts_per_cluster = numpy.bincount(labels, minlength=num_clusters)
    for j, c in enumerate(levels):
        counts = numpy.zeros((num_clusters, c))
        numpy.add.at(counts, (labels, categorical[:, j]), 1.0)
        tables.append((counts + smoothing) / (counts_per_cluster[:, None] + smoothing * c))
    return tuple(tables)


def _reseed_empty(scores, labels, num_clusters):
    """Move the point with the lowest winning score (from a cluster of two or more) into each empty cluster."""
    for cluster in numpy.flatnonzero(numpy.bincount(labels, minlength=num_clusters) == 0):
        sizes = numpy.bincount(labels, minlength=num_clusters)
        winning = scores[numpy.arange(labels.shape[0]), labels].copy()
        winning[sizes[labels] < 2] = numpy.inf
        labels[int(numpy.argmin(winning))] = cluster
    return labels


def _kamila_single(continuous, categorical, levels, initial, settings):
    num_clusters = len(initial)
    centroids = continuous[initial].copy()
    theta = tuple(numpy.full((num_clusters, c), 1.0 / c) for c in levels)
    labels = None
    for iteration in range(1, settings["max_iter"] + 1):
        scores, radii, bandwidth = kamila_scores(
            continuous,
            categorical,
            centroids,
            theta,
            density_floor=settings["density_floor"],
            radius_floor=settings["radius_floor"],
        )
        new_labels = _reseed_empty(scores, numpy.argmax(scores, axis=1), num_clusters)
        objective = float(scores[numpy.arange(new_labels.shape[0]), new_labels].sum())
        state = KamilaState(
            partition=Partition(new_labels, num_clusters),
            centroids=centroids,
            theta=theta,
            radii=radii,
            bandwidth=bandwidth,
            objective=objective,
            iterations=iteration,
        )
        if labels is not None and numpy.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = cluster_means(continuous, labels, num_clusters)
        theta = update_theta(categorical, labels, num_clusters, levels, settings["smoothing"])
    return state


def kamila_fit(
    data: MixedDataset,
    num_clusters: int,
    starts: int = 1,
    seed=None,
    max_iter: int = 25,
    smoothing: float = SMOOTHING,
    density_floor: float = DENSITY_FLOOR,
    radius_floor: float = RADIUS_FLOOR,
    standardize: bool = True,
):
    """KAMILA clustering.

    Each start places the centroids at distinct random points with uniform
    level probabilities, then alternates the assignment (largest radial plus
    categorical log-score) with centroid and level-probability updates until
    the partition repeats or max_iter is reached. The start with the largest
    sum of winning log-scores is kept.

    Returns:
        Tuple (Partition, KamilaState)
    """
    if data.num_continuous < 1:
        raise InvalidDatasetError("KAMILA needs at least one continuous column")
    check_num_clusters(num_clusters, data.n)
    if standardize:
        data, _ = z_standardize(data)
    settings = {
        "max_iter": max_iter,
        "smoothing": smoothing,
        "density_floor": density_floor,
        "radius_floor": radius_floor,
    }

    rng = numpy.random.default_rng(seed)
    best = None
    for _ in range(starts):
        initial = rng.choice(data.n, size=num_clusters, replace=False)
        state = _kamila_single(data.continuous, data.categorical, data.levels, initial, settings)
        if best is None or state.objective > best.objective:
            best = state
    logging.debug(f"KAMILA objective {best.objective:.6g} after {best.iterations} iterations")
    return best.partition, replace(best, restarts=starts)
