"""Gaussian mixtures with a calibrated average pairwise overlap, sampled into mixed datasets."""

import hashlib
import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy
from scipy import linalg
from scipy.stats import ortho_group

from data.mixed_dataset import MixedDataset
from utils.exceptions import CalibrationFailedError, ConfigError, NonSPDCovarianceError

DENSITIES = ("equal", "one_small_10")
SPHERICITIES = ("spherical", "ellipsoidal")

# Factor levels of the benchmark design. Both overlap scales are accepted.
GRID_LEVELS = {
    "num_clusters": (3, 5, 8),
    "n": (100, 600, 1000),
    "p": (8, 12, 16),
    "overlap": (0.01, 0.05, 0.10, 0.15, 0.20, 0.001, 0.005, 0.010, 0.015, 0.020),
    "pct_categorical": (0.2, 0.5, 0.8),
    "density": DENSITIES,
    "sphericity": SPHERICITIES,
}

FACTORS = tuple(GRID_LEVELS)


@dataclass(frozen=True)
class ScenarioConfig:
    """One cell of the factorial design plus its replicate and master seed."""

    num_clusters: int
    n: int
    p: int
    overlap: float
    pct_categorical: float
    density: str = "equal"
    sphericity: str = "spherical"
    replicate: int = 0
    seed: int = 0
    levels: int = 4

    def __post_init__(self):
        if self.density not in DENSITIES:
            raise ConfigError(f"Unknown density '{self.density}' (choose from {DENSITIES})")
        if self.sphericity not in SPHERICITIES:
            raise ConfigError(
                f"Unknown sphericity '{self.sphericity}' (choose from {SPHERICITIES})"
            )
        if self.num_clusters < 2 or self.n < self.num_clusters or self.p < 1:
            raise ConfigError(
                f"Invalid design K={self.num_clusters}, n={self.n}, p={self.p}"
            )
        if not 0.0 < self.overlap < 1.0:
            raise ConfigError(f"Overlap target must lie in (0, 1), got {self.overlap}")
        if not 0.0 <= self.pct_categorical <= 1.0:
            raise ConfigError(
                f"Categorical share must lie in [0, 1], got {self.pct_categorical}"
            )
        if self.levels < 2:
            raise ConfigError("Need at least two levels per categorical column")

    @property
    def num_categorical(self) -> int:
        return int(math.ceil(round(self.p * self.pct_categorical, 9)))

    @property
    def num_continuous(self) -> int:
        return self.p - self.num_categorical

    def coordinates(self) -> dict:
        """The seven design factors."""
        return {factor: getattr(self, factor) for factor in FACTORS}

    def key(self) -> tuple:
        return tuple(self.coordinates().values()) + (self.replicate,)

    def check_grid(self):
        """Raise ConfigError for a factor level outside the benchmark design."""
        for factor, value in self.coordinates().items():
            allowed = GRID_LEVELS[factor]
            if isinstance(value, str):
                ok = value in allowed
            else:
                ok = any(numpy.isclose(value, level, rtol=0, atol=1e-12) for level in allowed)
            if not ok:
                raise ConfigError(f"{factor}={value} is not a level of the design {allowed}")


@dataclass(frozen=True)
class MixtureSpec:
    """Weighted Gaussian components with their pairwise overlaps.

    overlap[l, l'] is the sum of both directed misclassification probabilities
    between components l and l'; the diagonal is zero.
    """

    weights: numpy.ndarray
    means: numpy.ndarray
    covariances: numpy.ndarray
    overlap: numpy.ndarray
    target: float
    inflation: float = 1.0

    def __post_init__(self):
        weights = numpy.asarray(self.weights, dtype=float)
        if numpy.any(weights <= 0) or not numpy.isclose(weights.sum(), 1.0, atol=1e-12):
            raise ValueError("Mixture weights must be positive and sum to 1")
        for covariance in numpy.asarray(self.covariances):
            cholesky_factor(covariance)
        overlap = numpy.asarray(self.overlap, dtype=float)
        if not numpy.allclose(overlap, overlap.T) or overlap.min() < 0 or overlap.max() > 1:
            raise ValueError("Overlap map must be symmetric with entries in [0, 1]")

    @property
    def num_components(self) -> int:
        return self.means.shape[0]

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    @property
    def mean_overlap(self) -> float:
        rows, cols = numpy.triu_indices(self.num_components, k=1)
        return float(self.overlap[rows, cols].mean())


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit seed from a master seed and any scenario/method coordinates."""
    digest = hashlib.sha256(repr((int(master_seed),) + parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def scenario_seed(config: ScenarioConfig, *extra) -> int:
    return derive_seed(config.seed, tuple(config.coordinates().items()), config.replicate, *extra)


def cholesky_factor(covariance) -> numpy.ndarray:
    """Lower Cholesky factor; NonSPDCovarianceError when the matrix is not SPD."""
    covariance = numpy.asarray(covariance, dtype=float)
    if not numpy.allclose(covariance, covariance.T, atol=1e-10):
        raise NonSPDCovarianceError("Covariance matrix is not symmetric")
    try:
        return linalg.cholesky(covariance, lower=True)
    except linalg.LinAlgError as error:
        raise NonSPDCovarianceError(f"Covariance matrix is not positive definite: {error}")


class OverlapEvaluator:
    """Pairwise overlaps of a mixture under a common covariance inflation c.

    Standard normal draws are made once per directed pair, so evaluating
    different c reuses the same random numbers and the estimate is monotone
    in c up to sampling noise. A draw z from component s, x = mu_s + sqrt(c) L_s z,
    is misclassified into t iff

        log pi_s - |z|^2/2 - log|L_s| < log pi_t - |a + sqrt(c) w|^2 / (2c) - log|L_t|

    with a = L_t^-1 (mu_s - mu_t) and w = L_t^-1 L_s z.
    """

    def __init__(self, weights, means, covariances, samples: int, rng):
        if samples < 1:
            raise ValueError(f"Need at least one Monte Carlo sample, got {samples}")
        self.num_components = len(weights)
        factors = [cholesky_factor(c) for c in covariances]
        log_dets = [numpy.sum(numpy.log(numpy.diag(f))) for f in factors]
        self._terms = {}
        for source in range(self.num_components):
            for target in range(self.num_components):
                if source == target:
                    continue
                z = rng.standard_normal((samples, len(means[source])))
                offset = linalg.solve_triangular(
                    factors[target], means[source] - means[target], lower=True
                )
                w = linalg.solve_triangular(factors[target], factors[source] @ z.T, lower=True).T
                lhs = numpy.log(weights[source]) - 0.5 * numpy.sum(z**2, axis=1) - log_dets[source]
                rhs = numpy.log(weights[target]) - log_dets[target] - 0.5 * numpy.sum(w**2, axis=1)
                self._terms[source, target] = (lhs, rhs, offset @ offset, w @ offset)

    def directed(self, source: int, target: int, inflation: float) -> float:
        """Probability that a draw from source is assigned to target."""
        lhs, rhs, offset_sq, cross = self._terms[source, target]
        root = numpy.sqrt(inflation)
        right = rhs - 0.5 * (offset_sq / inflation + 2.0 * cross / root)
        return float(numpy.mean(lhs < right))

    def matrix(self, inflation: float) -> numpy.ndarray:
        overlap = numpy.zeros((self.num_components, self.num_components))
        for l, m in combinations(range(self.num_components), 2):
            overlap[l, m] = overlap[m, l] = min(
                self.directed(l, m, inflation) + self.directed(m, l, inflation), 1.0
            )
        return overlap

    def mean(self, inflation: float) -> float:
        rows, cols = numpy.triu_indices(self.num_components, k=1)
        return float(self.matrix(inflation)[rows, cols].mean())


def pairwise_overlap_mc(spec: MixtureSpec, l: int, m: int, samples: int = 20000, seed=None) -> float:
    """Monte Carlo estimate of the overlap between components l and m of a mixture.

    Raises:
        NonSPDCovarianceError: if either covariance is not SPD
    """
    if l == m:
        raise ValueError("Overlap needs two distinct components")
    rng = numpy.random.default_rng(seed)
    pair = [l, m]
    evaluator = OverlapEvaluator(
        spec.weights[pair], spec.means[pair], spec.covariances[pair], samples, rng
    )
    return min(evaluator.directed(0, 1, 1.0) + evaluator.directed(1, 0, 1.0), 1.0)


def component_sizes(n: int, num_clusters: int, density: str) -> numpy.ndarray:
    """Observations per component.

    "equal" splits n evenly with the remainder on the first components;
    "one_small_10" puts ceil(0.1 n) in the first component and splits the rest evenly.
    """
    if density == "equal":
        sizes = numpy.full(num_clusters, n // num_clusters)
        sizes[: n % num_clusters] += 1
        return sizes
    if density == "one_small_10":
        small = int(math.ceil(0.1 * n))
        rest = component_sizes(n - small, num_clusters - 1, "equal")
        return numpy.concatenate([[small], rest])
    raise ConfigError(f"Unknown density '{density}'")


def draw_covariances(sphericity: str, num_clusters: int, p: int, rng) -> numpy.ndarray:
    """Heteroscedastic component covariances before inflation.

    Spherical components get sigma_l^2 I; ellipsoidal ones a random rotation
    of their own random eigenvalue spectrum.
    """
    if sphericity == "spherical":
        variances = rng.uniform(0.5, 2.0, size=num_clusters)
        return numpy.stack([v * numpy.eye(p) for v in variances])
    covariances = []
    for _ in range(num_clusters):
        rotation = ortho_group.rvs(dim=p, random_state=rng) if p > 1 else numpy.eye(1)
        spectrum = rng.uniform(0.1, 2.0, size=p)
        covariance = (rotation * spectrum) @ rotation.T
        covariances.append((covariance + covariance.T) / 2.0)
    return numpy.stack(covariances)


def _bisect_inflation(evaluator, target, tolerance, max_steps=60):
    """Bisection on log c; None when the target cannot be bracketed."""
    low, high = -12.0, 12.0
    if evaluator.mean(numpy.exp(low)) > target or evaluator.mean(numpy.exp(high)) < target:
        return None
    middle = 0.0
    for _ in range(max_steps):
        middle = 0.5 * (low + high)
        achieved = evaluator.mean(numpy.exp(middle))
        if abs(achieved - target) <= tolerance * target:
            break
        if achieved < target:
            low = middle
        else:
            high = middle
    return numpy.exp(middle)


def calibration_draws(target: float, num_clusters: int, samples: int, precision: float) -> int:
    """Draws per directed pair giving the mean overlap at most precision relative standard error.

    A pair overlap omega estimated from N draws per direction has relative
    standard error about sqrt(1 / (omega N)); averaging K(K-1)/2 pairs divides
    the variance by their number. samples is the floor.
    """
    if not precision > 0:
        raise ConfigError(f"Overlap precision must be positive, got {precision}")
    pairs = num_clusters * (num_clusters - 1) / 2.0
    return max(int(samples), int(math.ceil(1.0 / (precision**2 * pairs * target))))


def calibrate_mixture(
    config: ScenarioConfig,
    seed=None,
    samples: int = 20000,
    tolerance: float = 0.05,
    max_retries: int = 10,
    precision: float = 0.01,
) -> MixtureSpec:
    """Draw a mixture and inflate its covariances to hit the target mean overlap.

    Means are uniform in the unit hypercube and weights follow the component
    sizes. The common inflation c is found by bisection; a draw whose target
    cannot be bracketed or reached within tolerance is redrawn. Small targets
    get more Monte Carlo draws, see calibration_draws.

    Raises:
        CalibrationFailedError: after max_retries unsuccessful draws
    """
    rng = numpy.random.default_rng(seed)
    k, p = config.num_clusters, config.p
    weights = component_sizes(config.n, k, config.density) / config.n
    draws = calibration_draws(config.overlap, k, samples, precision)

    for attempt in range(1, max_retries + 1):
        means = rng.uniform(0.0, 1.0, size=(k, p))
        base = draw_covariances(config.sphericity, k, p, rng)
        evaluator = OverlapEvaluator(weights, means, base, draws, rng)
        inflation = _bisect_inflation(evaluator, config.overlap, tolerance / 10.0)
        if inflation is not None:
            overlap = evaluator.matrix(inflation)
            spec = MixtureSpec(weights, means, base * inflation, overlap, config.overlap, inflation)
            if abs(spec.mean_overlap - config.overlap) <= tolerance * config.overlap:
                logging.debug(
                    f"Calibrated overlap {spec.mean_overlap:.4f} (target {config.overlap}) "
                    f"with inflation {inflation:.4g} after {attempt} draw(s)"
                )
                return spec
        logging.warning(
            f"Overlap target {config.overlap} not reached on draw {attempt}, redrawing"
        )
    raise CalibrationFailedError(
        f"Could not calibrate overlap {config.overlap} in {max_retries} draws"
    )


def quantile_discretize(column, num_levels: int = 4) -> numpy.ndarray:
    """Cut a column at its 100/c% sample quantiles; values on a cut go to the lower level."""
    cuts = numpy.quantile(column, numpy.arange(1, num_levels) / num_levels)
    return numpy.searchsorted(cuts, column, side="left")


def sample_dataset(spec: MixtureSpec, config: ScenarioConfig, seed=None) -> MixedDataset:
    """Draw n points from the mixture and discretize the last columns.

    Component sizes follow the scenario density exactly; rows are shuffled.
    The last ceil(p * pct_categorical) columns are cut into config.levels
    quantile classes.
    """
    rng = numpy.random.default_rng(seed)
    sizes = component_sizes(config.n, spec.num_components, config.density)
    blocks, truth = [], []
    for component, size in enumerate(sizes):
        factor = cholesky_factor(spec.covariances[component])
        z = rng.standard_normal((size, spec.dimension))
        blocks.append(spec.means[component] + z @ factor.T)
        truth.append(numpy.full(size, component))
    order = rng.permutation(config.n)
    values = numpy.concatenate(blocks)[order]
    truth = numpy.concatenate(truth)[order]

    split = config.num_continuous
    categorical = numpy.column_stack(
        [quantile_discretize(values[:, j], config.levels) for j in range(split, config.p)]
    ) if config.num_categorical else numpy.zeros((config.n, 0), dtype=int)
    return MixedDataset(
        continuous=values[:, :split],
        categorical=categorical,
        levels=(config.levels,) * config.num_categorical,
        truth=truth,
    )


def generate_scenario(
    config: ScenarioConfig, samples: int = 20000, tolerance=0.05, max_retries=10, precision=0.01
):
    """Calibrate and sample one (scenario, replicate) from its derived seed.

    Returns:
        Tuple (MixtureSpec, MixedDataset)
    """
    rng = numpy.random.default_rng(scenario_seed(config))
    spec = calibrate_mixture(config, rng, samples, tolerance, max_retries, precision)
    return spec, sample_dataset(spec, config, rng)

