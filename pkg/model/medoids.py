"""K-Medoids solvers on a precomputed dissimilarity matrix."""

import logging
from dataclasses import dataclass

import numpy

from data.mixed_dataset import Partition, check_num_clusters
from model.dissimilarity import DissimilarityMatrix


@dataclass(frozen=True)
class MedoidState:
    """Medoids (sorted observation indices), nearest-medoid partition and cost."""

    medoids: numpy.ndarray
    partition: Partition
    cost: float
    cost_history: tuple = ()
    iterations: int = 0
    restarts: int = 1


def assign_to_medoids(values: numpy.ndarray, medoids):
    """Nearest-medoid labels and total cost; ties go to the lowest medoid index."""
    medoids = numpy.sort(numpy.asarray(medoids))
    to_medoids = values[:, medoids]
    labels = numpy.argmin(to_medoids, axis=1)
    labels[medoids] = numpy.arange(medoids.shape[0])
    cost = float(to_medoids[numpy.arange(values.shape[0]), labels].sum())
    return medoids, labels, cost


def _state(values, medoids, history, iterations, restarts=1):
    medoids, labels, cost = assign_to_medoids(values, medoids)
    return MedoidState(
        medoids=medoids,
        partition=Partition(labels, medoids.shape[0]),
        cost=cost,
        cost_history=tuple(history),
        iterations=iterations,
        restarts=restarts,
    )


def pam_build(values: numpy.ndarray, num_clusters: int) -> numpy.ndarray:
    """Greedy BUILD seeding.

    The first medoid minimizes the total dissimilarity; every next medoid is
    the candidate with the largest cost reduction.
    """
    medoids = [int(numpy.argmin(values.sum(axis=1)))]
    nearest = values[:, medoids[0]].copy()
    for _ in range(1, num_clusters):
        gain = numpy.maximum(nearest[:, None] - values, 0.0).sum(axis=0)
        gain[medoids] = -numpy.inf
        candidate = int(numpy.argmax(gain))
        medoids.append(candidate)
        nearest = numpy.minimum(nearest, values[:, candidate])
    return numpy.array(medoids)


def pam_swap(values: numpy.ndarray, medoids, max_iter: int = 1000):
    """Apply the best strictly improving (medoid, non-medoid) swap until none exists.

    Returns:
        Tuple (medoids, cost history, number of swaps)
    """
    n = values.shape[0]
    medoids = numpy.sort(numpy.asarray(medoids)).copy()
    num_clusters = medoids.shape[0]
    _, _, cost = assign_to_medoids(values, medoids)
    history = [cost]
    iterations = 0

    while iterations < max_iter and num_clusters < n:
        to_medoids = values[:, medoids]
        order = numpy.argsort(to_medoids, axis=1, kind="stable")
        nearest_pos = order[:, 0]
        nearest = to_medoids[numpy.arange(n), nearest_pos]
        second = (
            to_medoids[numpy.arange(n), order[:, 1]]
            if num_clusters > 1
            else numpy.full(n, numpy.inf)
        )

        is_medoid = numpy.zeros(n, dtype=bool)
        is_medoid[medoids] = True
        best_cost, best_pos, best_candidate = cost, -1, -1
        for pos in range(num_clusters):
            # Distance to the closest remaining medoid once medoids[pos] leaves
            without = numpy.where(nearest_pos == pos, second, nearest)
            swapped = numpy.minimum(without[:, None], values).sum(axis=0)
            swapped[is_medoid] = numpy.inf
            candidate = int(numpy.argmin(swapped))
            if swapped[candidate] < best_cost - 1e-12 * max(1.0, abs(best_cost)):
                best_cost, best_pos, best_candidate = swapped[candidate], pos, candidate

        if best_pos < 0:
            break
        medoids[best_pos] = best_candidate
        medoids = numpy.sort(medoids)
        _, _, cost = assign_to_medoids(values, medoids)
        history.append(cost)
        iterations += 1

    return medoids, history, iterations


def pam(
    d: DissimilarityMatrix,
    num_clusters: int,
    init: str = "build",
    starts: int = 1,
    seed=None,
) -> MedoidState:
    """Partitioning Around Medoids.

    Args:
        d: Dissimilarity matrix
        num_clusters: Number of medoids K
        init: "build" for the greedy BUILD seeding, "random" for random seedings
        starts: Number of random seedings when init is "random"
        seed: Seed or numpy Generator for the random seedings

    Returns:
        The lowest-cost MedoidState; ties go to the earliest start
    """
    values = d.values
    check_num_clusters(num_clusters, d.n)

    if init == "build":
        medoids = pam_build(values, num_clusters)
        medoids, history, iterations = pam_swap(values, medoids)
        return _state(values, medoids, history, iterations)
    if init != "random":
        raise ValueError(f"Unknown PAM initialization '{init}' (use 'build' or 'random')")

    rng = numpy.random.default_rng(seed)
    best = None
    for start in range(starts):
        initial = rng.choice(d.n, size=num_clusters, replace=False)
        medoids, history, iterations = pam_swap(values, initial)
        state = _state(values, medoids, history, iterations, restarts=starts)
        if best is None or state.cost < best.cost:
            best = state
    return best


def park_jun_medoids(values: numpy.ndarray, num_clusters: int) -> numpy.ndarray:
    """Deterministic seeding: the K points with the smallest normalized dissimilarity sums."""
    row_sums = values.sum(axis=1)
    row_sums[row_sums == 0] = 1.0
    score = (values / row_sums[:, None]).sum(axis=0)
    return numpy.sort(numpy.argsort(score, kind="stable")[:num_clusters])


def _update_medoids(values, labels, medoids):
    new_medoids = medoids.copy()
    for cluster in range(medoids.shape[0]):
        members = numpy.flatnonzero(labels == cluster)
        within = values[numpy.ix_(members, members)].sum(axis=1)
        new_medoids[cluster] = members[int(numpy.argmin(within))]
    return new_medoids


def _repair_empty(values, labels, medoids):
    """Reseed each empty cluster's medoid at the point farthest from its medoid."""
    num_clusters = medoids.shape[0]
    for cluster in numpy.flatnonzero(numpy.bincount(labels, minlength=num_clusters) == 0):
        distance = values[numpy.arange(values.shape[0]), medoids[labels]]
        distance[medoids] = -numpy.inf
        point = int(numpy.argmax(distance))
        medoids[cluster] = point
        labels[point] = cluster
    return labels, medoids


def _alternate(values, medoids, max_iter):
    medoids = numpy.sort(numpy.asarray(medoids)).copy()
    history = []
    labels = None
    for iteration in range(1, max_iter + 1):
        _, labels, cost = assign_to_medoids(values, medoids)
        labels, medoids = _repair_empty(values, labels, medoids)
        history.append(float(values[numpy.arange(values.shape[0]), medoids[labels]].sum()))
        new_medoids = _update_medoids(values, labels, medoids)
        if numpy.array_equal(new_medoids, medoids):
            break
        medoids = numpy.sort(new_medoids)
    return medoids, history, iteration


def fast_kmedoids(
    d: DissimilarityMatrix,
    num_clusters: int,
    starts: int = 1,
    seed=None,
    init: str = "random",
    max_iter: int = 100,
) -> MedoidState:
    """Alternating k-medoids: nearest-medoid assignment, then in-cluster medoid update.

    Args:
        d: Dissimilarity matrix
        num_clusters: Number of medoids K
        starts: Number of random initializations (ignored for "park_jun")
        seed: Seed or numpy Generator
        init: "random" or the deterministic "park_jun" seeding
        max_iter: Maximum alternations per start
    """
    values = d.values
    check_num_clusters(num_clusters, d.n)

    if init == "park_jun":
        initial_sets = [park_jun_medoids(values, num_clusters)]
    elif init == "random":
        rng = numpy.random.default_rng(seed)
        initial_sets = [
            rng.choice(d.n, size=num_clusters, replace=False) for _ in range(starts)
        ]
    else:
        raise ValueError(f"Unknown k-medoids initialization '{init}'")

    best = None
    for initial in initial_sets:
        medoids, history, iterations = _alternate(values, initial, max_iter)
        state = _state(values, medoids, history, iterations, restarts=len(initial_sets))
        if best is None or state.cost < best.cost:
            best = state
    logging.debug(f"fast k-medoids: best cost {best.cost:.6g} over {len(initial_sets)} starts")
    return best
