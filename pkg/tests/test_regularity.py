"""正则性模块测试"""

import math

import pytest

from src.errors import BudgetExceededError
from src.notation import RhythmPattern, gap_profile
from src.regularity import (
    RegularityCriterion, balanced_multiset, balanced_pattern, best_selection,
    characterize_optimal, criterion_value, is_optimal,
)

BALANCED_12_5 = (3, 3, 2, 2, 2)


def _multisets(result):
    return {gap_profile(RhythmPattern(result.n, s)).multiset() for s in result.optimizers}


def test_max_area_12_5(canonical):
    result = best_selection(12, 5, "max-area")
    assert result.total == 792
    assert result.count == 24
    assert _multisets(result) == {BALANCED_12_5}
    assert list(result.multisets) == [BALANCED_12_5]
    for name in ("solea", "seguiriya", "guajira"):
        assert canonical[name].onsets in result.optimizers
    assert canonical["buleria"].onsets not in result.optimizers
    assert result.value == pytest.approx(1 + 3 * math.sqrt(3) / 4, abs=1e-12)


def test_max_area_12_4(canonical):
    result = best_selection(12, 4, RegularityCriterion.MAX_AREA)
    assert _multisets(result) == {(3, 3, 3, 3)}
    assert canonical["fandango"].onsets in result.optimizers
    assert result.count == 3


def test_optimizers_sorted():
    result = best_selection(12, 5, "max-area")
    assert list(result.optimizers) == sorted(result.optimizers)


@pytest.mark.parametrize("criterion", ["max-perimeter", "min-sum-ears", "min-max-ear"])
def test_criteria_agree_with_area(criterion):
    area = best_selection(12, 5, "max-area")
    other = best_selection(12, 5, criterion)
    assert other.optimizers == area.optimizers


def test_min_max_ear_value():
    result = best_selection(12, 5, "min-max-ear")
    assert result.value == 3


def test_min_max_gap_is_wider():
    result = best_selection(12, 5, "min-max-gap")
    assert result.value == 3
    assert (3, 3, 3, 2, 1) in _multisets(result)
    assert BALANCED_12_5 in _multisets(result)
    assert result.count > 24


@pytest.mark.parametrize("n", range(3, 17))
def test_pigeonhole_bound(n):
    for k in range(3, n + 1):
        result = best_selection(n, k, "min-max-gap")
        assert result.value == -(-n // k)


@pytest.mark.parametrize("n", range(3, 17))
def test_small_instances_are_balanced(n):
    """n ≤ 16 穷举：面积最大、耳朵和最小、最大耳朵最小三者都落在平衡多重集上"""
    for k in range(3, n + 1):
        balanced = {balanced_multiset(n, k)}
        area = best_selection(n, k, "max-area")
        assert _multisets(area) == balanced
        assert best_selection(n, k, "min-sum-ears").optimizers == area.optimizers
        assert _multisets(best_selection(n, k, "min-max-ear")) == balanced


@pytest.mark.parametrize("n,k", [(12, 13), (12, 2), (5, 0)])
def test_invalid_instance(n, k):
    with pytest.raises(ValueError):
        best_selection(n, k, "max-area")


def test_budget():
    with pytest.raises(BudgetExceededError) as exc:
        best_selection(40, 20, "max-area", budget=1000)
    assert exc.value.budget == 1000
    assert exc.value.size == math.comb(40, 20)


def test_parallel_matches_serial():
    serial = best_selection(14, 6, "max-area", n_jobs=1)
    parallel = best_selection(14, 6, "max-area", n_jobs=2)
    assert serial.optimizers == parallel.optimizers


def test_characterize():
    profile = characterize_optimal(12, 5, "max-area", verify=True)
    assert (profile.q, profile.r) == (2, 2)
    assert profile.multiset == BALANCED_12_5
    assert profile.status == "verified"
    assert characterize_optimal(12, 5, "min-max-gap").status == "proven"
    assert characterize_optimal(100, 37, "max-area", verify=True, budget=1000).status == "unverified"


def test_balanced():
    assert balanced_multiset(12, 5) == BALANCED_12_5
    assert balanced_multiset(12, 4) == (3, 3, 3, 3)
    p = balanced_pattern(12, 5)
    assert gap_profile(p).multiset() == BALANCED_12_5


def test_is_optimal(canonical):
    report = is_optimal(canonical["solea"], "max-area")
    assert report.optimal
    assert report.shortfall == pytest.approx(0.0, abs=1e-12)

    report = is_optimal(canonical["buleria"], "max-area")
    assert not report.optimal
    assert report.shortfall == pytest.approx(0.25, abs=1e-9)

    report = is_optimal(canonical["buleria"], "min-max-ear")
    assert not report.optimal
    assert report.value == 4
    assert report.shortfall == 1

    assert is_optimal(canonical["fandango"], "min-max-ear").optimal


def test_criterion_value():
    assert criterion_value((3, 3, 3, 3), 12, "min-max-gap") == 3
    assert criterion_value((3, 3, 3, 3), 12, "max-area") == pytest.approx(2.0)
    assert criterion_value((3, 3, 3, 3), 12, "min-sum-ears") == pytest.approx(3 - 2.0)
