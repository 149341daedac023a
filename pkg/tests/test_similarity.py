"""相似性模块测试（含暴力枚举对照）"""

import random
from itertools import combinations, permutations

import numpy as np
import pytest

from src.errors import CycleMismatchError, OnsetCountError
from src.geometry import chronotonic
from src.notation import RhythmPattern, canonical_patterns, parse_rhythm
from src.similarity import (
    MAX_ROW, SUM_ROW, DistanceMatrix, chronotonic_distance, distance_matrix,
    hamming_distance, permutation_distance, permutation_distance_equal,
    permutation_distance_unequal,
)

TABLE_CHRONOTONIC = np.array([
    [0, 6, 8, 4, 10],
    [6, 0, 12, 8, 14],
    [8, 12, 0, 8, 6],
    [4, 8, 8, 0, 6],
    [10, 14, 6, 6, 0],
])

TABLE_PERMUTATION = np.array([
    [0, 1, 11, 7, 7],
    [1, 0, 12, 8, 8],
    [11, 12, 0, 4, 4],
    [7, 8, 4, 0, 2],
    [7, 8, 4, 2, 0],
])


def _random_pattern(rng: random.Random, n: int, k: int) -> RhythmPattern:
    return RhythmPattern(n, tuple(sorted(rng.sample(range(n), k))))


# ============ 表格复现 ============

def test_chronotonic_table():
    m = distance_matrix(canonical_patterns(), "chronotonic")
    assert m.labels == ("solea", "buleria", "seguiriya", "guajira", "fandango")
    assert np.array_equal(m.values, TABLE_CHRONOTONIC)
    assert m.column_sums.tolist() == [28, 40, 34, 26, 36]
    assert m.column_max.tolist() == [10, 14, 12, 8, 14]


def test_permutation_table():
    m = distance_matrix(canonical_patterns(), "permutation")
    assert np.array_equal(m.values, TABLE_PERMUTATION)
    # seguiriya 一列按各项重新求和
    assert m.column_sums.tolist() == [26, 29, 31, 21, 21]
    assert m.column_max.tolist() == [11, 12, 12, 8, 8]


def test_worked_values(canonical):
    assert chronotonic_distance(canonical["fandango"], canonical["seguiriya"]) == 6
    assert permutation_distance(canonical["seguiriya"], canonical["guajira"]) == 4
    assert permutation_distance(canonical["seguiriya"], canonical["fandango"]) == 4
    assert hamming_distance(canonical["solea"], canonical["buleria"]) == 2
    assert permutation_distance(canonical["solea"], canonical["buleria"]) == 1


METRICS = [chronotonic_distance, permutation_distance, hamming_distance]


@pytest.mark.parametrize("metric", METRICS)
def test_metric_axioms(metric):
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(4, 16)
        a = _random_pattern(rng, n, rng.randint(1, n))
        b = _random_pattern(rng, n, rng.randint(1, n))
        assert metric(a, a) == 0
        assert metric(a, b) >= 0
        assert metric(a, b) == metric(b, a)


def _rectangle_area(a, b):
    """按两条曲线断点的并集切成矩形逐块求面积"""
    ca, cb = chronotonic(a), chronotonic(b)
    cuts = sorted(set(ca.breakpoints) | set(cb.breakpoints))
    return sum((right - left) * abs(ca.value_at(left) - cb.value_at(left))
               for left, right in zip(cuts, cuts[1:]))


@pytest.mark.parametrize("seed", range(4))
def test_chronotonic_matches_rectangles(seed):
    rng = random.Random(200 + seed)
    for _ in range(250):
        n = rng.randint(2, 24)
        a = _random_pattern(rng, n, rng.randint(1, n))
        b = _random_pattern(rng, n, rng.randint(1, n))
        assert chronotonic_distance(a, b) == _rectangle_area(a, b)


def test_hamming_even_for_equal_counts():
    rng = random.Random(11)
    for _ in range(500):
        n = rng.randint(2, 16)
        k = rng.randint(1, n)
        a, b = _random_pattern(rng, n, k), _random_pattern(rng, n, k)
        assert hamming_distance(a, b) % 2 == 0


def test_hamming_binary_example():
    a = parse_rhythm("1011101")
    b = parse_rhythm("1001001")
    assert hamming_distance(a, b) == 2


def test_rankings():
    m = distance_matrix(canonical_patterns(), "chronotonic")
    assert m.nearest() == ["guajira"]
    assert m.most_distant() == ["buleria"]
    assert m.most_distant(MAX_ROW) == ["buleria", "fandango"]


# ============ 置换距离 ============

def test_equal_variant_rejects_unequal_k(canonical):
    with pytest.raises(OnsetCountError):
        permutation_distance_equal(canonical["solea"], canonical["fandango"])
    with pytest.raises(OnsetCountError):
        permutation_distance_unequal(canonical["solea"], canonical["buleria"])


def test_cycle_mismatch():
    with pytest.raises(CycleMismatchError):
        chronotonic_distance(RhythmPattern(12, (0,)), RhythmPattern(8, (0,)))
    with pytest.raises(CycleMismatchError):
        hamming_distance(RhythmPattern(12, (0,)), RhythmPattern(8, (0,)))


def test_unequal_assignment(canonical):
    a = permutation_distance_unequal(canonical["solea"], canonical["fandango"])
    assert a.distance == 7
    assert (a.source, a.target) == ("solea", "fandango")
    assert len(a.pairs) == 5
    assert {t for _, t in a.pairs} == set(canonical["fandango"].onsets)
    assert sum(abs(s - t) for s, t in a.pairs) == 7
    targets = [t for _, t in a.pairs]
    assert targets == sorted(targets)

    assert permutation_distance_unequal(canonical["fandango"], canonical["guajira"]).distance == 2


def _brute_equal(a, b):
    return min(sum(abs(x - y) for x, y in zip(a.onsets, perm)) for perm in permutations(b.onsets))


def _brute_unequal(a, b):
    src, dst = (a.onsets, b.onsets) if a.k > b.k else (b.onsets, a.onsets)
    k1, k2 = len(src), len(dst)
    best = None
    # 单调满射：k1-1 次转移中恰好 k2-1 次前进
    for advances in combinations(range(1, k1), k2 - 1):
        j, cost = 0, 0
        for i in range(k1):
            if i in advances:
                j += 1
            cost += abs(src[i] - dst[j])
        best = cost if best is None else min(best, cost)
    return best


@pytest.mark.parametrize("seed", range(4))
def test_equal_matches_bruteforce(seed):
    rng = random.Random(seed)
    for _ in range(250):
        n = rng.randint(6, 16)
        k = rng.randint(1, 6)
        a, b = _random_pattern(rng, n, k), _random_pattern(rng, n, k)
        assert permutation_distance_equal(a, b) == _brute_equal(a, b)


@pytest.mark.parametrize("seed", range(4))
def test_unequal_matches_bruteforce(seed):
    rng = random.Random(100 + seed)
    for _ in range(250):
        n = rng.randint(6, 16)
        k1, k2 = rng.sample(range(1, 7), 2)
        a, b = _random_pattern(rng, n, k1), _random_pattern(rng, n, k2)
        assignment = permutation_distance_unequal(a, b)
        assert assignment.distance == _brute_unequal(a, b)
        assert permutation_distance_unequal(b, a).distance == assignment.distance


# ============ 距离矩阵 ============

def test_matrix_validation():
    with pytest.raises(ValueError):
        DistanceMatrix(("a", "b"), [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        DistanceMatrix(("a", "b"), [[1, 1], [1, 0]])
    with pytest.raises(ValueError):
        DistanceMatrix(("a", "a"), [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        DistanceMatrix(("a", "b", "c"), [[0, 1], [1, 0]])


def test_matrix_is_read_only():
    m = DistanceMatrix(("a", "b"), [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        m.values[0, 1] = 5


def test_triangle_violations():
    m = DistanceMatrix(("a", "b", "c"), [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert m.triangle_violations() == [("a", "b", "c")]
    assert distance_matrix(canonical_patterns(), "chronotonic").triangle_violations() == []


def test_csv_table():
    text = distance_matrix(canonical_patterns(), "chronotonic").to_csv()
    assert text.splitlines() == [
        "chronotonic,solea,buleria,seguiriya,guajira,fandango",
        "solea,0,6,8,4,10",
        "buleria,6,0,12,8,14",
        "seguiriya,8,12,0,8,6",
        "guajira,4,8,8,0,6",
        "fandango,10,14,6,6,0",
        f"{SUM_ROW},28,40,34,26,36",
        f"{MAX_ROW},10,14,12,8,14",
    ]


def test_read_csv():
    m = distance_matrix(canonical_patterns(), "permutation")
    again = DistanceMatrix.read_csv(m.to_csv())
    assert again.labels == m.labels
    assert again.metric == "permutation"
    assert np.array_equal(again.values, m.values)


def test_float_matrix_text():
    m = DistanceMatrix(("a", "b"), [[0, 0.5], [0.5, 0]])
    assert not m.integral
    assert "0.500000" in m.to_csv()
    assert SUM_ROW not in m.to_text(summary=False)


def test_pair_errors_name_patterns():
    patterns = [RhythmPattern(12, (0, 3), "x"), RhythmPattern(8, (0,), "y")]
    with pytest.raises(CycleMismatchError, match="x vs y"):
        distance_matrix(patterns, "hamming")
