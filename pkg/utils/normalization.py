"""Column normalization helpers shared by the clustering methods."""

import numpy

from utils.exceptions import ConstantColumnError


def normalize_standard(data, mean, std):
    """Normalize data using Z-score normalization."""
    return (data - mean) / std


def column_moments(data, ddof=1):
    """Per-column mean and standard deviation of a 2D array.

    Args:
        data: Array of shape (n, p)
        ddof: Delta degrees of freedom of the standard deviation

    Returns:
        Tuple (mean, std), each of length p

    Raises:
        ConstantColumnError: if a column has zero standard deviation
    """
    mean = data.mean(axis=0)
    std = data.std(axis=0, ddof=ddof) if data.shape[0] > ddof else numpy.zeros_like(mean)
    for j, value in enumerate(std):
        if not value > 0:
            raise ConstantColumnError(j)
    return mean, std


def zscore_columns(data, ddof=1):
    """Z-score every column of a 2D array, returning (scores, mean, std)."""
    mean, std = column_moments(data, ddof=ddof)
    return normalize_standard(data, mean, std), mean, std


def column_ranges(data):
    """Per-column (min, max, range); zero ranges are rejected."""
    minimum = data.min(axis=0)
    maximum = data.max(axis=0)
    spread = maximum - minimum
    for j, value in enumerate(spread):
        if not value > 0:
            raise ConstantColumnError(j, "range")
    return minimum, maximum, spread


def level_proportions(column, num_levels):
    """Relative frequency of each level code 0..num_levels-1 in a column."""
    counts = numpy.bincount(column, minlength=num_levels)
    return counts / counts.sum()
