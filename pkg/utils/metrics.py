"""External cluster validity indices: adjusted Rand index and adjusted mutual information."""

from dataclasses import dataclass

import numpy
from scipy import sparse
from scipy.special import comb, gammaln

from data.mixed_dataset import Partition
from utils.exceptions import LengthMismatchError


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-tabulation of two partitions of the same n observations."""

    counts: numpy.ndarray
    row_sums: numpy.ndarray
    col_sums: numpy.ndarray
    n: int


def _labels(partition):
    if isinstance(partition, Partition):
        return partition.assign
    return numpy.asarray(partition)


def contingency_table(u, v) -> ContingencyTable:
    """Count n_uv for every pair of non-empty clusters of u and v.

    Raises:
        LengthMismatchError: if the partitions cover different numbers of points
    """
    u, v = _labels(u), _labels(v)
    if u.shape != v.shape:
        raise LengthMismatchError(
            f"Partitions have lengths {u.shape[0]} and {v.shape[0]}"
        )
    _, u_idx = numpy.unique(u, return_inverse=True)
    _, v_idx = numpy.unique(v, return_inverse=True)
    counts = sparse.coo_matrix(
        (numpy.ones(u_idx.shape[0], dtype=numpy.int64), (u_idx, v_idx)),
        shape=(u_idx.max(initial=-1) + 1, v_idx.max(initial=-1) + 1),
        dtype=numpy.int64,
    ).toarray()
    return ContingencyTable(counts, counts.sum(axis=1), counts.sum(axis=0), int(u.shape[0]))


def adjusted_rand_index(u, v) -> float:
    """Hubert-Arabie adjusted Rand index from pair counts.

    Returns 1 for identical partitions (including the degenerate cases where
    the maximum and expected index coincide) and can be negative.
    """
    table = contingency_table(u, v)
    if table.n < 2:
        return 1.0
    sum_pairs = comb(table.counts, 2).sum()
    sum_rows = comb(table.row_sums, 2).sum()
    sum_cols = comb(table.col_sums, 2).sum()
    expected = sum_rows * sum_cols / comb(table.n, 2)
    maximum = (sum_rows + sum_cols) / 2.0
    if maximum == expected:
        return 1.0
    return float((sum_pairs - expected) / (maximum - expected))


def entropy(sums) -> float:
    """Shannon entropy (natural log) of a vector of cluster sizes."""
    sums = numpy.asarray(sums, dtype=float)
    sums = sums[sums > 0]
    if sums.size <= 1:
        return 0.0
    p = sums / sums.sum()
    return float(-numpy.sum(p * numpy.log(p)))


def mutual_information(table: ContingencyTable) -> float:
    n = table.n
    rows, cols = numpy.nonzero(table.counts)
    nij = table.counts[rows, cols].astype(float)
    outer = table.row_sums[rows].astype(float) * table.col_sums[cols].astype(float)
    mi = nij / n * (numpy.log(nij) + numpy.log(n) - numpy.log(outer))
    return float(max(mi.sum(), 0.0))


def expected_mutual_information(table: ContingencyTable) -> float:
    """Expected MI of two partitions under the hypergeometric permutation model.

    Every term of the sum is evaluated in log-space, so large n does not
    overflow the factorials.
    """
    n = table.n
    a = table.row_sums.astype(numpy.int64)
    b = table.col_sums.astype(numpy.int64)
    log_n = numpy.log(n)
    gln_a = gammaln(a + 1)
    gln_b = gammaln(b + 1)
    gln_na = gammaln(n - a + 1)
    gln_nb = gammaln(n - b + 1)
    gln_n = gammaln(n + 1)

    emi = 0.0
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            start = max(1, a[i] + b[j] - n)
            end = min(a[i], b[j])
            if start > end:
                continue
            nij = numpy.arange(start, end + 1, dtype=float)
            term1 = nij / n * (numpy.log(nij) + log_n - numpy.log(float(a[i]) * b[j]))
            log_term2 = (
                gln_a[i]
                + gln_b[j]
                + gln_na[i]
                + gln_nb[j]
                - gln_n
                - gammaln(nij + 1)
                - gammaln(a[i] - nij + 1)
                - gammaln(b[j] - nij + 1)
                - gammaln(n - a[i] - b[j] + nij + 1)
            )
            emi += numpy.sum(term1 * numpy.exp(log_term2))
    return float(emi)


def _normalizer(h_u, h_v, average_method):
    if average_method == "max":
        return max(h_u, h_v)
    if average_method == "sqrt":
        return numpy.sqrt(h_u * h_v)
    raise ValueError(f"Unknown AMI normalizer '{average_method}' (use 'max' or 'sqrt')")


def adjusted_mutual_information(u, v, average_method: str = "max") -> float:
    """Chance-adjusted mutual information (MI - E[MI]) / (norm - E[MI]).

    Args:
        u, v: Partitions or label sequences over the same observations
        average_method: Entropy normalizer, "max" (default) or "sqrt"
    """
    table = contingency_table(u, v)
    num_u, num_v = table.counts.shape
    # Both trivial (or both all-singleton) partitions agree perfectly
    if (num_u == num_v == 1) or (num_u == num_v == table.n) or table.n == 0:
        return 1.0

    mi = mutual_information(table)
    emi = expected_mutual_information(table)
    h_u, h_v = entropy(table.row_sums), entropy(table.col_sums)
    denominator = _normalizer(h_u, h_v, average_method) - emi
    eps = numpy.finfo("float64").eps
    if denominator < 0:
        denominator = min(denominator, -eps)
    else:
        denominator = max(denominator, eps)
    return float((mi - emi) / denominator)
