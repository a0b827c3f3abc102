"""
普查测试：小 m 的完整枚举、对称约化、随机抽样与报告文件
"""

import sys
import os
sys.path.append(os.path.join(os.path.dirname(__file__), 'src'))

import csv
import json

import pytest

from src.algorithms.census import (
    CensusOptions,
    CensusReport,
    conjecture_check,
    enumerate_multisets,
    multiset_count,
    run_census,
    run_random_census,
    write_reports,
)
from src.algorithms.spectrum_oracle import OracleCapExceeded


def create_test_options(**overrides):
    options = {"workers": 1, "progress": False, "oracle_cap": 12, "seed": 0}
    options.update(overrides)
    return CensusOptions(**options)


def comparable(report):
    row = report.summary_row()
    row.pop("seconds")
    return row, report.pattern_overlaps, report.mismatches, report.conjecture_violations


def test_multiset_count():
    assert multiset_count(1) == 1
    assert multiset_count(3) == 10
    assert multiset_count(5) == 126
    assert sum(1 for _ in enumerate_multisets(4)) == multiset_count(4)


def test_enumeration_is_lexicographic():
    listed = [M.elements for M in enumerate_multisets(3)]
    assert listed[0] == (0, 0, 0)
    assert listed[-1] == (2, 2, 2)
    assert listed == sorted(listed)


@pytest.mark.parametrize("m", range(1, 7))
def test_small_census_is_clean(m):
    report = run_census(m, create_test_options())
    assert report.clean, report.to_dict()
    assert report.fallbacks == 0
    assert report.total == multiset_count(m)
    assert report.zero_solved + report.homogeneous + report.inhomogeneous == report.total


def test_census_counts_for_m2():
    report = run_census(2, create_test_options())
    assert report.total == 3
    assert report.zero_solved == 2
    assert report.homogeneous == 1
    # {1,1} also has the {a, a+b, a−b} shape with a = 0
    assert report.pattern_overlaps == 1


def test_census_counts_for_m3():
    report = run_census(3, create_test_options())
    # translates of {0,1,2} are the same multiset
    assert report.inhomogeneous == 1
    assert report.homogeneous == 0
    assert report.zero_solved == 9


@pytest.mark.parametrize("m", [5, 6])
def test_reduced_census_matches_full_totals(m):
    full = run_census(m, create_test_options())
    reduced = run_census(m, create_test_options(reduce_symmetry=True))
    assert reduced.mode == "reduced"
    assert reduced.total == multiset_count(m)
    assert reduced.zero_solved == full.zero_solved
    assert reduced.homogeneous == full.homogeneous
    assert reduced.inhomogeneous == full.inhomogeneous


def test_reduced_enumeration_weights():
    weighted = list(enumerate_multisets(5, reduce_symmetry=True))
    assert sum(orbit for _, orbit in weighted) == multiset_count(5)
    assert len(weighted) < multiset_count(5)


def test_worker_count_does_not_change_the_report():
    single = run_census(5, create_test_options(workers=1))
    pooled = run_census(5, create_test_options(workers=2))
    assert comparable(single) == comparable(pooled)


def test_random_census_is_seeded():
    first = run_random_census(7, samples=40, seed=3, options=create_test_options(seed=3))
    second = run_random_census(7, samples=40, seed=3, options=create_test_options(seed=3))
    assert first.mode == "random"
    assert first.samples == 40
    assert first.total == 40
    assert first.clean
    assert comparable(first) == comparable(second)


def test_cap_is_enforced():
    with pytest.raises(OracleCapExceeded):
        run_census(13, create_test_options())


def test_conjecture_check_small_orders():
    for m in range(1, 6):
        assert conjecture_check(m, create_test_options()) == []


def test_merge_sorts_anomalies():
    left = CensusReport(m=4, total=2, mismatches=[{"elements": [1, 1, 1, 1], "reason": "x"}])
    right = CensusReport(m=4, total=3, mismatches=[{"elements": [0, 1, 2, 3], "reason": "y"}])
    merged = left.merge(right)
    assert merged.total == 5
    assert [entry["elements"] for entry in merged.mismatches] == [[0, 1, 2, 3], [1, 1, 1, 1]]
    assert not merged.clean


def test_fallbacks_make_a_report_unclean():
    assert CensusReport(m=9, total=4862).clean
    report = CensusReport(m=9, total=4862, fallbacks=1)
    assert not report.clean
    assert report.merge(CensusReport(m=9, total=1)).fallbacks == 1


def test_write_reports(tmp_path):
    reports = [run_census(m, create_test_options()) for m in (3, 4)]
    written = write_reports(reports, tmp_path / "out")
    names = sorted(path.name for path in written)
    assert names == ["census-m03.jsonl", "census-m04.jsonl", "census-summary.csv"]

    lines = (tmp_path / "out" / "census-m04.jsonl").read_text(encoding="utf-8").splitlines()
    summary = json.loads(lines[-1])
    assert summary["kind"] == "summary"
    assert summary["total"] == multiset_count(4)

    with open(tmp_path / "out" / "census-summary.csv", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert [row["m"] for row in rows] == ["3", "4"]
    assert rows[0]["mismatches"] == "0"


@pytest.mark.slow
@pytest.mark.parametrize("m", range(7, 11))
def test_census_is_clean(m):
    report = run_census(m, create_test_options(reduce_symmetry=True))
    assert report.clean, report.to_dict()
    assert report.fallbacks == 0
    assert report.total == multiset_count(m)
