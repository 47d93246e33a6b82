import itertools

import numpy
import pandas
import pytest

from utils.exceptions import EmptyInputError
from utils.file_output import append_records
from utils.summary import (
    best_method_shares,
    eta_squared,
    ordinal_checks,
    save_summary,
    summarize,
    summary_from_tables,
)


def synthetic_records(failed=0):
    """Two methods over two overlap levels and three replicates; gower_pam degrades with overlap."""
    rows = []
    for overlap, replicate, method in itertools.product(
        (0.01, 0.2), range(3), ("gower_pam", "kamila")
    ):
        base = 0.9 if method == "gower_pam" and overlap == 0.01 else 0.5
        value = base + 0.01 * replicate
        rows.append(
            {
                "num_clusters": 3,
                "n": 100,
                "p": 8,
                "overlap": overlap,
                "pct_categorical": 0.5,
                "density": "equal",
                "sphericity": "spherical",
                "replicate": replicate,
                "seed": 1,
                "method": method,
                "ari": value,
                "ami": value - 0.1,
                "runtime": 0.1,
                "iterations": 3,
                "restarts": 2,
                "status": "ok",
                "reason": "",
            }
        )
    for i in range(failed):
        rows[i] = {**rows[i], "status": "failed", "ari": numpy.nan, "ami": numpy.nan}
    return pandas.DataFrame(rows)


def test_eta_squared():
    assert eta_squared([1.0, 1.0, 3.0, 3.0], ["a", "a", "b", "b"]) == pytest.approx(1.0)
    assert eta_squared([1.0, 3.0, 1.0, 3.0], ["a", "a", "b", "b"]) == pytest.approx(0.0)
    assert eta_squared([2.0, 2.0], ["a", "b"]) == 0.0


def test_means_by_factor():
    summary = summarize(synthetic_records(), by=["overlap"])
    row = summary.means[(summary.means["method"] == "gower_pam") & (summary.means["level"] == 0.01)]
    assert row["ari"].item() == pytest.approx(0.91)
    assert row["count"].item() == 3
    assert summary.methods == ["gower_pam", "kamila"]
    assert summary.overall.loc["kamila", "ari"] == pytest.approx(0.51)


def test_effect_sizes_and_correlations():
    summary = summarize(synthetic_records())
    assert summary.eta_squared.loc["overlap", "ari"] > 0
    assert summary.eta_squared.loc["num_clusters", "ari"] == 0.0
    assert summary.correlations["ari"].loc["gower_pam", "gower_pam"] == pytest.approx(1.0)


def test_best_method_shares():
    shares = best_method_shares(synthetic_records())
    assert shares.loc["gower_pam", "ari"] == pytest.approx(1.0)
    # Ties at overlap 0.2 go to the alphabetically first method
    assert shares.loc["kamila", "ari"] == pytest.approx(0.0)


def test_failed_records_are_excluded():
    summary = summarize(synthetic_records(failed=1))
    assert summary.overall["count"].sum() == 11


def test_empty_input():
    with pytest.raises(EmptyInputError):
        summarize(synthetic_records(failed=12))


def test_unknown_factor():
    with pytest.raises(ValueError):
        summarize(synthetic_records(), by=["colour"])


def test_summary_from_csv_records_and_tables(tmp_path):
    path = str(tmp_path / "records.csv")
    append_records(synthetic_records().to_dict("records"), path)
    summary = summarize(path, by=["overlap"])
    written = save_summary(summary, str(tmp_path / "tables"))
    assert len(written) == 5
    reloaded = summary_from_tables(str(tmp_path / "tables"))
    assert reloaded.factors == ("overlap",)
    pandas.testing.assert_series_equal(reloaded.overall["ari"], summary.overall["ari"])


def test_factor_with_identical_means_has_no_effect():
    records = synthetic_records()
    relabeled = records.assign(density="one_small_10")
    summary = summarize(pandas.concat([records, relabeled], ignore_index=True), by=["density"])
    assert summary.eta_squared.loc["density", "ari"] == pytest.approx(0.0)
    assert summary.eta_squared.loc["overlap", "ari"] > 0


def test_ordinal_checks_flag_a_flat_method():
    checks = {result.name: result.passed for result in ordinal_checks(synthetic_records())}
    # Only spherical records: the sphericity comparison is skipped
    assert checks == {
        "ari-falls-with-overlap": False,
        "kamila-at-lowest-overlap": False,
        "leaders-beat-gower-pam": False,
    }


def test_ordinal_checks_pass_on_the_expected_ordering():
    records = synthetic_records()
    base = numpy.where(records["method"] == "kamila", 0.95, 0.6)
    spherical = records.assign(ari=base - records["overlap"])
    ellipsoidal = spherical.assign(sphericity="ellipsoidal", ari=spherical["ari"] - 0.1)
    results = ordinal_checks(pandas.concat([spherical, ellipsoidal], ignore_index=True))
    assert [result.name for result in results] == [
        "ari-falls-with-overlap",
        "kamila-at-lowest-overlap",
        "leaders-beat-gower-pam",
        "spherical-beats-ellipsoidal",
    ]
    assert all(result.passed for result in results)
