import numpy
import pytest

from data.mixed_dataset import MixedDataset, make_partition
from model.factor import (
    correlation_ratio,
    famd_criterion,
    famd_kmeans,
    famd_matrix,
    famd_project,
    mixed_rkm,
    rkm_loadings,
    rkm_objective,
)
from utils.exceptions import ConstantColumnError, RankDeficientError, ZeroVarianceError
from utils.metrics import adjusted_rand_index


def test_famd_matrix_is_centered(blobs):
    matrix = famd_matrix(blobs)
    assert matrix.shape == (blobs.n, 2 + 3 + 3)
    numpy.testing.assert_allclose(matrix.mean(axis=0), 0.0, atol=1e-12)
    numpy.testing.assert_allclose(matrix[:, :2].std(axis=0), 1.0)


def test_famd_indicator_scaling():
    data = MixedDataset(continuous=[], categorical=[[0], [0], [0], [1]], levels=(2,))
    matrix = famd_matrix(data)
    # 1 / sqrt(3/4) and 1 / sqrt(1/4), centered
    numpy.testing.assert_allclose(matrix[0], [2 / numpy.sqrt(3) * 0.25, -0.5])


def test_famd_equals_pca_without_categorical_columns():
    rng = numpy.random.default_rng(0)
    continuous = rng.normal(size=(40, 4)) @ rng.normal(size=(4, 4))
    data = MixedDataset(continuous, numpy.zeros((40, 0), dtype=int), ())
    projection = famd_project(data, 2)
    z = (continuous - continuous.mean(axis=0)) / continuous.std(axis=0)
    left, singular, _ = numpy.linalg.svd(z, full_matrices=False)
    reference = left[:, :2] * singular[:2]
    for j in range(2):
        sign = numpy.sign(projection.scores[:, j] @ reference[:, j])
        numpy.testing.assert_allclose(projection.scores[:, j], sign * reference[:, j], atol=1e-8)


def test_famd_components_maximize_the_criterion(blobs):
    projection = famd_project(blobs, 2)
    for j in range(2):
        assert famd_criterion(projection.scores[:, j], blobs) == pytest.approx(
            projection.eigenvalues[j]
        )


def test_explained_ratio(blobs):
    projection = famd_project(blobs, 2)
    assert projection.num_dims == 2
    assert 0 < projection.explained_ratio.sum() <= 1
    assert projection.explained_ratio[0] >= projection.explained_ratio[1]


def test_famd_signs_are_fixed(blobs):
    loadings = famd_project(blobs, 2).loadings
    rows = numpy.argmax(numpy.abs(loadings), axis=0)
    assert numpy.all(loadings[rows, [0, 1]] > 0)


def test_famd_rank_deficient():
    data = MixedDataset(continuous=[[1.0], [2.0], [3.0]], categorical=[], levels=())
    with pytest.raises(RankDeficientError):
        famd_project(data, 2)


def test_famd_criterion_errors(small_mixed):
    with pytest.raises(ZeroVarianceError):
        famd_criterion(numpy.ones(4), small_mixed)
    constant = MixedDataset(continuous=[[1.0], [1.0], [1.0]], categorical=[], levels=())
    with pytest.raises(ConstantColumnError):
        famd_criterion(numpy.array([0.0, 1.0, 2.0]), constant)


def test_correlation_ratio():
    assert correlation_ratio(numpy.array([0.0, 0.0, 1.0, 1.0]), numpy.array([0, 0, 1, 1]), 2) == (
        pytest.approx(1.0)
    )
    assert correlation_ratio(numpy.array([0.0, 1.0, 0.0, 1.0]), numpy.array([0, 0, 1, 1]), 2) == (
        pytest.approx(0.0)
    )


def test_famd_kmeans_recovers_blobs(blobs):
    fit, projection = famd_kmeans(blobs, 3, starts=5, seed=0)
    assert projection.num_dims == 2
    assert adjusted_rand_index(blobs.truth, fit.partition) > 0.9


def test_famd_kmeans_needs_two_clusters(blobs):
    with pytest.raises(ValueError):
        famd_kmeans(blobs, 1)


def test_rkm_loadings_are_orthonormal(blobs):
    loadings = rkm_loadings(famd_matrix(blobs), blobs.truth, 3, 2)
    numpy.testing.assert_allclose(loadings.T @ loadings, numpy.eye(2), atol=1e-10)


def test_mixed_rkm_recovers_blobs(blobs):
    partition, state = mixed_rkm(blobs, 3, starts=5, seed=0)
    assert adjusted_rand_index(blobs.truth, partition) > 0.9
    assert state.loadings.shape == (8, 2)
    assert state.centroids.shape == (3, 2)
    assert state.indicator.shape == (blobs.n, 3)
    history = numpy.asarray(state.objective_history)
    assert numpy.all(numpy.diff(history) <= 1e-9 * history[0])


def test_rkm_objective_matches_state(blobs):
    partition, state = mixed_rkm(blobs, 3, starts=2, seed=1)
    assert rkm_objective(famd_matrix(blobs), partition, state.loadings) == pytest.approx(
        state.objective
    )


def test_simultaneous_fit_is_no_worse_than_tandem_in_its_objective(blobs):
    matrix = famd_matrix(blobs)
    fit, _ = famd_kmeans(blobs, 3, starts=5, seed=0)
    tandem = rkm_objective(matrix, fit.partition, rkm_loadings(matrix, fit.partition.assign, 3, 2))
    _, state = mixed_rkm(blobs, 3, starts=5, seed=0)
    assert state.objective <= tandem * (1 + 1e-9)


def test_mixed_rkm_truth_partition_objective(blobs):
    matrix = famd_matrix(blobs)
    truth = make_partition(blobs.truth)
    loadings = rkm_loadings(matrix, blobs.truth, 3, 2)
    total = numpy.sum(matrix**2)
    assert 0 < rkm_objective(matrix, truth, loadings) < total


def test_first_component_beats_random_directions(blobs):
    projection = famd_project(blobs, 1)
    best = famd_criterion(projection.scores[:, 0], blobs)
    rng = numpy.random.default_rng(12)
    for _ in range(200):
        direction = rng.normal(size=projection.matrix.shape[1])
        scores = projection.matrix @ (direction / numpy.linalg.norm(direction))
        assert famd_criterion(scores, blobs) <= best + 1e-9


def test_famd_scores_are_centered_and_uncorrelated(blobs):
    scores = famd_project(blobs, 3).scores
    numpy.testing.assert_allclose(scores.mean(axis=0), 0.0, atol=1e-10)
    gram = scores.T @ scores
    numpy.testing.assert_allclose(gram - numpy.diag(numpy.diag(gram)), 0.0, atol=1e-8)


@pytest.mark.parametrize("num_dims", [None, 2])
def test_mixed_rkm_with_singleton_clusters_is_a_low_rank_fit(num_dims):
    rng = numpy.random.default_rng(13)
    data = MixedDataset(rng.normal(size=(5, 6)), numpy.zeros((5, 0), dtype=int), ())
    partition, state = mixed_rkm(data, 5, seed=0, num_dims=num_dims)
    singular = numpy.linalg.svd(famd_matrix(data), compute_uv=False)
    kept = 4 if num_dims is None else num_dims
    assert sorted(partition.assign) == list(range(5))
    assert state.objective == pytest.approx(numpy.sum(singular[kept:] ** 2), abs=1e-9)
