"""Summary statistics of benchmark records."""

import logging
import os
from dataclasses import dataclass

import numpy
import pandas

from data.simulation import FACTORS
from utils.exceptions import EmptyInputError
from utils.file_output import load_records
from utils.validation import CheckResult

MEASURES = ("ari", "ami")
DATASET_COLUMNS = FACTORS + ("replicate",)


@dataclass(frozen=True)
class SummaryTable:
    """Aggregated agreement of every method with the true partition.

    means has one row per (method, factor, level) with mean ARI/AMI and the
    record count; overall has one row per method. eta_squared holds the
    one-way effect size of each factor, pooled across methods, and
    correlations the Pearson correlation matrices between methods' per-dataset
    ARI and AMI.
    """

    means: pandas.DataFrame
    overall: pandas.DataFrame
    eta_squared: pandas.DataFrame
    correlations: dict
    best_shares: pandas.DataFrame
    factors: tuple

    @property
    def methods(self) -> list:
        return list(self.overall.index)


def eta_squared(values, groups) -> float:
    """Between-group over total sum of squares; 0 when the values are constant."""
    frame = pandas.DataFrame({"value": values, "group": groups})
    grand = frame["value"].mean()
    total = ((frame["value"] - grand) ** 2).sum()
    if total <= 0:
        return 0.0
    stats = frame.groupby("group")["value"].agg(["mean", "count"])
    between = (stats["count"] * (stats["mean"] - grand) ** 2).sum()
    return float(between / total)


def best_method_shares(records: pandas.DataFrame) -> pandas.DataFrame:
    """Fraction of scenarios in which each method has the highest mean ARI (and AMI).

    Ties go to the first method in alphabetical order.
    """
    shares = {}
    for measure in MEASURES:
        scenario_means = records.groupby(list(FACTORS) + ["method"])[measure].mean().unstack()
        winners = scenario_means.idxmax(axis=1).dropna()
        shares[measure] = (
            winners.value_counts(normalize=True).reindex(scenario_means.columns, fill_value=0.0)
        )
    return pandas.DataFrame(shares).rename_axis("method")


def _usable(records) -> pandas.DataFrame:
    if not isinstance(records, pandas.DataFrame):
        records = load_records(records)
    usable = records[records["status"] != "failed"].dropna(subset=list(MEASURES))
    if usable.empty:
        raise EmptyInputError("No successful benchmark records to summarize")
    if len(usable) < len(records):
        logging.info(f"Ignoring {len(records) - len(usable)} failed records")
    return usable


def summarize(records, by=()) -> SummaryTable:
    """Aggregate benchmark records.

    Args:
        records: Path of a record CSV, or a DataFrame of records
        by: Factors to tabulate mean ARI/AMI against

    Raises:
        EmptyInputError: when no successful record is available
    """
    by = tuple(by)
    unknown = [factor for factor in by if factor not in FACTORS]
    if unknown:
        raise ValueError(f"Unknown factors {unknown} (choose from {FACTORS})")

    usable = _usable(records)

    tables = []
    for factor in by:
        table = (
            usable.groupby(["method", factor])
            .agg(ari=("ari", "mean"), ami=("ami", "mean"), count=("ari", "size"))
            .reset_index()
            .rename(columns={factor: "level"})
        )
        table.insert(1, "factor", factor)
        tables.append(table)
    means = (
        pandas.concat(tables, ignore_index=True)
        if tables
        else pandas.DataFrame(columns=["method", "factor", "level", "ari", "ami", "count"])
    )

    overall = usable.groupby("method").agg(
        ari=("ari", "mean"), ami=("ami", "mean"), count=("ari", "size")
    )

    effects = pandas.DataFrame(
        {
            measure: {
                factor: eta_squared(usable[measure].to_numpy(), usable[factor].to_numpy())
                for factor in FACTORS
            }
            for measure in MEASURES
        }
    ).rename_axis("factor")

    correlations = {}
    for measure in MEASURES:
        wide = usable.pivot_table(
            index=list(DATASET_COLUMNS), columns="method", values=measure, aggfunc="mean"
        )
        correlations[measure] = wide.corr(method="pearson")

    return SummaryTable(
        means=means,
        overall=overall,
        eta_squared=effects,
        correlations=correlations,
        best_shares=best_method_shares(usable),
        factors=by,
    )


LEADING_METHODS = ("kamila", "famd_kmeans", "k_prototypes")


def ordinal_checks(
    records, lowest_overlap=0.01, kamila_floor=0.55, margin=0.10, sphericity_gap=0.03
):
    """Qualitative orderings a desk-scale sweep is expected to reproduce.

    Mean ARI falls strictly with overlap for every method; at the lowest
    overlap KAMILA reaches kamila_floor and each leading method beats Gower/PAM
    by margin; spherical scenarios beat ellipsoidal ones by sphericity_gap.
    A check is skipped when the records lack the factor levels it compares.
    """
    usable = _usable(records)
    by_overlap = usable.groupby(["method", "overlap"])["ari"].mean().unstack("overlap")
    by_overlap = by_overlap.sort_index(axis=1)
    results = []

    if by_overlap.shape[1] > 1:
        rising = [
            method
            for method, row in by_overlap.iterrows()
            if not numpy.all(numpy.diff(row.to_numpy()) < 0)
        ]
        detail = f"not decreasing: {rising}" if rising else f"{len(by_overlap)} methods"
        results.append(CheckResult("ari-falls-with-overlap", not rising, detail))

    if numpy.isclose(by_overlap.columns.min(), lowest_overlap):
        lowest = by_overlap[by_overlap.columns.min()]
        if "kamila" in lowest.index:
            value = lowest["kamila"]
            passed = bool(value >= kamila_floor)
            results.append(CheckResult("kamila-at-lowest-overlap", passed, f"mean ARI {value:.3f}"))
        leaders = [m for m in LEADING_METHODS if m in lowest.index]
        if "gower_pam" in lowest.index and leaders:
            short = [m for m in leaders if lowest[m] < lowest["gower_pam"] + margin]
            detail = f"within {margin} of Gower/PAM: {short}" if short else f"{leaders}"
            results.append(CheckResult("leaders-beat-gower-pam", not short, detail))

    spheres = usable.groupby("sphericity")["ari"].mean()
    if {"spherical", "ellipsoidal"} <= set(spheres.index):
        gap = spheres["spherical"] - spheres["ellipsoidal"]
        passed = bool(gap >= sphericity_gap)
        results.append(CheckResult("spherical-beats-ellipsoidal", passed, f"gap {gap:.3f}"))
    return results


def save_summary(summary: SummaryTable, directory) -> list:
    """Write every table of a summary as CSV; returns the written paths."""
    os.makedirs(directory, exist_ok=True)
    outputs = {
        "means.csv": summary.means,
        "overall.csv": summary.overall.join(summary.best_shares, rsuffix="_best_share"),
        "eta_squared.csv": summary.eta_squared,
        "correlation_ari.csv": summary.correlations["ari"],
        "correlation_ami.csv": summary.correlations["ami"],
    }
    paths = []
    for name, frame in outputs.items():
        path = os.path.join(directory, name)
        frame.to_csv(path, index=name != "means.csv")
        paths.append(path)
    logging.info(f"Summary tables written to {directory}")
    return paths


def summary_from_tables(directory) -> SummaryTable:
    """Reload the tables written by save_summary."""
    means = pandas.read_csv(os.path.join(directory, "means.csv"))
    overall = pandas.read_csv(os.path.join(directory, "overall.csv"), index_col="method")
    return SummaryTable(
        means=means,
        overall=overall[["ari", "ami", "count"]],
        eta_squared=pandas.read_csv(os.path.join(directory, "eta_squared.csv"), index_col=0),
        correlations={
            measure: pandas.read_csv(
                os.path.join(directory, f"correlation_{measure}.csv"), index_col=0
            )
            for measure in MEASURES
        },
        best_shares=overall[[f"{m}_best_share" for m in MEASURES]].rename(
            columns=lambda c: c.replace("_best_share", "")
        ),
        factors=tuple(means["factor"].unique()) if not means.empty else (),
    )
