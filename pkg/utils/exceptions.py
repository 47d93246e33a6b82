"""Exceptions raised by the clustering toolkit and the benchmark harness."""


class MixbenchError(Exception):
    """Base class for all toolkit errors."""


class InvalidDatasetError(MixbenchError, ValueError):
    """Dataset violates its structural invariants."""


class ConstantColumnError(MixbenchError, ValueError):
    """A continuous column has zero spread."""

    def __init__(self, column: int, statistic: str = "standard deviation"):
        super().__init__(f"Continuous column {column} has zero {statistic}")
        self.column = column


class LengthMismatchError(MixbenchError, ValueError):
    """Two partitions do not cover the same observations."""


class NonpositiveWeightError(MixbenchError, ValueError):
    """A variable weight is zero or negative."""


class SchemaMismatchError(MixbenchError, ValueError):
    """A fitted model does not match the dataset's column layout."""


class TooManyClustersError(MixbenchError, ValueError):
    """More clusters were requested than there are observations."""

    def __init__(self, num_clusters: int, num_observations: int):
        super().__init__(
            f"Cannot have more clusters ({num_clusters}) "
            f"than observations ({num_observations})"
        )


class AllConstantError(MixbenchError, ValueError):
    """Every categorical column is constant, so no categorical weight exists."""


class ZeroVectorError(MixbenchError, ValueError):
    """An observation has an all-zero dummy block."""


class ZeroVarianceError(MixbenchError, ArithmeticError):
    """A score vector is constant."""


class RankDeficientError(MixbenchError, ArithmeticError):
    """Fewer positive singular values than requested dimensions."""


class NonSPDCovarianceError(MixbenchError, ArithmeticError):
    """A covariance matrix is not symmetric positive definite."""


class CalibrationFailedError(MixbenchError, RuntimeError):
    """The overlap target could not be reached within the retry budget."""


class ConfigError(MixbenchError, ValueError):
    """The benchmark configuration is invalid."""


class EmptyInputError(MixbenchError, ValueError):
    """No benchmark records were available."""
