import numpy
import pytest
from scipy.stats import norm, ortho_group

from data.simulation import (
    MixtureSpec,
    ScenarioConfig,
    calibrate_mixture,
    calibration_draws,
    cholesky_factor,
    component_sizes,
    derive_seed,
    draw_covariances,
    generate_scenario,
    pairwise_overlap_mc,
    quantile_discretize,
    scenario_seed,
)
from utils.exceptions import CalibrationFailedError, ConfigError, NonSPDCovarianceError


def make_config(**overrides):
    values = dict(num_clusters=3, n=100, p=8, overlap=0.05, pct_categorical=0.5)
    values.update(overrides)
    return ScenarioConfig(**values)


@pytest.mark.parametrize(
    "p, pct, expected", [(8, 0.5, 4), (8, 0.2, 2), (12, 0.2, 3), (8, 0.8, 7), (16, 0.0, 0)]
)
def test_number_of_categorical_columns(p, pct, expected):
    config = make_config(p=p, pct_categorical=pct)
    assert config.num_categorical == expected
    assert config.num_continuous == p - expected


def test_invalid_scenarios():
    with pytest.raises(ConfigError):
        make_config(density="two_small")
    with pytest.raises(ConfigError):
        make_config(overlap=0.0)
    with pytest.raises(ConfigError):
        make_config(n=2)


def test_grid_membership():
    make_config().check_grid()
    make_config(overlap=0.005).check_grid()
    with pytest.raises(ConfigError):
        make_config(n=50).check_grid()


def test_key_has_factors_and_replicate():
    config = make_config(replicate=4)
    assert config.key() == (3, 100, 8, 0.05, 0.5, "equal", "spherical", 4)


def test_seeds_are_stable_and_distinct():
    assert derive_seed(42, "a", 1) == derive_seed(42, "a", 1)
    assert derive_seed(42, "a", 1) != derive_seed(42, "a", 2)
    config = make_config()
    assert scenario_seed(config) != scenario_seed(make_config(replicate=1))
    assert scenario_seed(config, "kamila") != scenario_seed(config, "gower_pam")


def test_component_sizes():
    numpy.testing.assert_array_equal(component_sizes(10, 3, "equal"), [4, 3, 3])
    numpy.testing.assert_array_equal(component_sizes(100, 3, "equal"), [34, 33, 33])
    numpy.testing.assert_array_equal(component_sizes(100, 3, "one_small_10"), [10, 45, 45])
    assert component_sizes(1000, 8, "one_small_10").sum() == 1000


def test_quantile_discretize_balances_levels():
    codes = quantile_discretize(numpy.arange(100.0), 4)
    numpy.testing.assert_array_equal(numpy.bincount(codes), [25, 25, 25, 25])
    small = quantile_discretize(numpy.arange(1.0, 9.0), 4)
    numpy.testing.assert_array_equal(numpy.bincount(small), [2, 2, 2, 2])


@pytest.mark.parametrize("sphericity", ["spherical", "ellipsoidal"])
def test_covariances_are_spd(sphericity):
    covariances = draw_covariances(sphericity, 3, 4, numpy.random.default_rng(0))
    assert covariances.shape == (3, 4, 4)
    for covariance in covariances:
        cholesky_factor(covariance)
    if sphericity == "spherical":
        numpy.testing.assert_allclose(covariances[0], covariances[0][0, 0] * numpy.eye(4))


def test_cholesky_rejects_non_spd():
    with pytest.raises(NonSPDCovarianceError):
        cholesky_factor(numpy.array([[1.0, 2.0], [2.0, 1.0]]))


def test_univariate_overlap_matches_closed_form():
    delta = norm.ppf(0.9)
    spec = MixtureSpec(
        weights=numpy.array([0.5, 0.5]),
        means=numpy.array([[0.0], [2.0 * delta]]),
        covariances=numpy.ones((2, 1, 1)),
        overlap=numpy.zeros((2, 2)),
        target=0.2,
    )
    estimate = pairwise_overlap_mc(spec, 0, 1, samples=100000, seed=0)
    assert estimate == pytest.approx(0.2, abs=0.01)


def test_calibration_hits_the_target():
    config = make_config(p=4)
    spec = calibrate_mixture(config, seed=1, samples=4000, tolerance=0.05)
    assert spec.mean_overlap == pytest.approx(0.05, rel=0.05)
    assert spec.inflation > 0
    numpy.testing.assert_allclose(spec.weights.sum(), 1.0)
    numpy.testing.assert_array_equal(numpy.diag(spec.overlap), 0.0)


def test_calibration_gives_up():
    with pytest.raises(CalibrationFailedError):
        calibrate_mixture(make_config(overlap=0.999), seed=0, samples=500, max_retries=2)


def test_generated_dataset_layout():
    config = make_config(density="one_small_10", sphericity="ellipsoidal")
    spec, data = generate_scenario(config, samples=4000, tolerance=0.1)
    assert data.n == 100
    assert data.num_continuous == 4 and data.num_categorical == 4
    assert data.levels == (4, 4, 4, 4)
    numpy.testing.assert_array_equal(numpy.bincount(data.truth), [10, 45, 45])
    assert spec.num_components == 3


def test_generation_is_reproducible():
    config = make_config()
    _, a = generate_scenario(config, samples=2000, tolerance=0.2)
    _, b = generate_scenario(config, samples=2000, tolerance=0.2)
    numpy.testing.assert_array_equal(a.continuous, b.continuous)
    numpy.testing.assert_array_equal(a.categorical, b.categorical)


def fresh_mean_overlap(spec, seed, information=16000, chunk=200000):
    """Mean pair overlap re-estimated from independent draws, about information / omega per pair."""
    total = int(numpy.ceil(information / spec.target))
    estimates = []
    for l, m in [(0, 1), (0, 2), (1, 2)]:
        sizes = [chunk] * (total // chunk) + ([total % chunk] if total % chunk else [])
        seeds = numpy.random.SeedSequence([seed, l, m]).spawn(len(sizes))
        pair = [pairwise_overlap_mc(spec, l, m, samples=s, seed=q) for s, q in zip(sizes, seeds)]
        estimates.append(numpy.average(pair, weights=sizes))
    return float(numpy.mean(estimates))


def test_calibration_draws_grow_as_the_target_shrinks():
    assert calibration_draws(0.10, 3, 20000, 0.01) == 33334
    assert calibration_draws(0.01, 3, 20000, 0.01) == 333334
    assert calibration_draws(0.20, 8, 20000, 0.01) == 20000
    with pytest.raises(ConfigError):
        calibration_draws(0.10, 3, 20000, 0.0)


@pytest.mark.slow
@pytest.mark.parametrize("target", [0.01, 0.10, 0.20])
@pytest.mark.parametrize("seed", range(20))
def test_calibrated_overlap_holds_on_fresh_samples(target, seed):
    spec = calibrate_mixture(make_config(overlap=target), seed=seed)
    assert spec.mean_overlap == pytest.approx(target, rel=0.05)
    assert fresh_mean_overlap(spec, seed + 1000) == pytest.approx(target, rel=0.05)


def two_component_spec(covariances, means):
    return MixtureSpec(
        weights=numpy.array([0.4, 0.6]),
        means=numpy.asarray(means),
        covariances=numpy.asarray(covariances),
        overlap=numpy.zeros((2, 2)),
        target=0.1,
    )


def test_overlap_grows_with_inflation():
    covariances = numpy.stack([numpy.diag([1.0, 0.5, 2.0]), numpy.eye(3)])
    means = [[0.0, 0.0, 0.0], [2.0, 1.0, 0.0]]
    estimates = [
        pairwise_overlap_mc(two_component_spec(c * covariances, means), 0, 1, 50000, seed=3)
        for c in [0.1, 0.3, 1.0, 3.0, 10.0]
    ]
    assert numpy.all(numpy.diff(estimates) > 0)


def test_overlap_is_invariant_to_rotation():
    covariances = numpy.stack([numpy.diag([1.0, 0.5, 2.0]), numpy.eye(3) * 1.5])
    means = numpy.array([[0.0, 0.0, 0.0], [2.0, 1.0, 0.5]])
    rotation = ortho_group.rvs(dim=3, random_state=4)
    rotated = two_component_spec(rotation @ covariances @ rotation.T, means @ rotation.T)
    base = pairwise_overlap_mc(two_component_spec(covariances, means), 0, 1, 100000, seed=5)
    turned = pairwise_overlap_mc(rotated, 0, 1, 100000, seed=6)
    assert turned == pytest.approx(base, abs=0.01)
