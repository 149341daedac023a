"""正则性模块 - 圆周n个等距点中选k个点的最优化

准则：
    max-area       多边形面积最大
    max-perimeter  相邻顶点弦长之和最大
    min-sum-ears   耳朵面积之和最小（与 max-area 互补）
    min-max-ear    最大耳朵最小；并列时按降序耳朵向量的字典序比较
    min-max-gap    只看最大间隔（字面意义上的瓶颈准则，最优集更大）

耳朵面积随间隔严格递增，因此比较降序耳朵向量等价于比较降序间隔向量，
后者为整数，比较是精确的。
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from joblib import Parallel, delayed
from tqdm import tqdm

from .errors import BudgetExceededError
from .geometry import ear_area, polygon_area, polygon_perimeter
from .notation import RhythmPattern, gap_profile

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000_000
DEFAULT_TOLERANCE = 1e-9

Multiset = Tuple[int, ...]


class RegularityCriterion(str, Enum):
    MAX_AREA = "max-area"
    MAX_PERIMETER = "max-perimeter"
    MIN_SUM_EARS = "min-sum-ears"
    MIN_MAX_EAR = "min-max-ear"
    MIN_MAX_GAP = "min-max-gap"

    @property
    def maximize(self) -> bool:
        return self in (RegularityCriterion.MAX_AREA, RegularityCriterion.MAX_PERIMETER)

    @property
    def discrete(self) -> bool:
        """取值为整数（最大间隔）的准则"""
        return self in (RegularityCriterion.MIN_MAX_EAR, RegularityCriterion.MIN_MAX_GAP)


@dataclass(frozen=True)
class SelectionResult:
    n: int
    k: int
    criterion: RegularityCriterion
    value: Union[float, int]
    optimizers: Tuple[Tuple[int, ...], ...]
    multisets: Dict[Multiset, int]
    total: int

    @property
    def count(self) -> int:
        return len(self.optimizers)


@dataclass(frozen=True)
class OptimalProfile:
    """平衡间隔多重集刻画：n = k·q + r，r 个 q+1 与 k-r 个 q"""
    n: int
    k: int
    criterion: RegularityCriterion
    q: int
    r: int
    multiset: Multiset
    max_gap: int
    value: Union[float, int]
    status: str  # proven | verified | unverified | refuted


@dataclass(frozen=True)
class OptimalityReport:
    optimal: bool
    value: Union[float, int]
    optimum: Union[float, int]
    shortfall: Union[float, int]


# ============ 准则取值 ============

def criterion_value(gaps: Sequence[int], n: int, c: RegularityCriterion) -> Union[float, int]:
    c = RegularityCriterion(c)
    if c is RegularityCriterion.MAX_AREA:
        return polygon_area(gaps, n)
    if c is RegularityCriterion.MAX_PERIMETER:
        return polygon_perimeter(gaps, n)
    if c is RegularityCriterion.MIN_SUM_EARS:
        return math.fsum(ear_area(g, n) for g in gaps)
    return max(gaps)


def _rank_key(ms: Multiset, n: int, c: RegularityCriterion):
    """越小越好"""
    if c is RegularityCriterion.MIN_MAX_EAR:
        return ms
    value = criterion_value(ms, n, c)
    return -value if c.maximize else value


def _multiset(subset: Sequence[int], n: int) -> Multiset:
    gaps = [b - a for a, b in zip(subset, subset[1:])]
    gaps.append(n - subset[-1] + subset[0])
    return tuple(sorted(gaps, reverse=True))


# ============ 分块穷举 ============

def _count_block(n: int, k: int, first: int) -> Dict[Multiset, int]:
    """统计以 first 为最小元素的全部子集的间隔多重集"""
    counts: Dict[Multiset, int] = {}
    for rest in combinations(range(first + 1, n), k - 1):
        ms = _multiset((first,) + rest, n)
        counts[ms] = counts.get(ms, 0) + 1
    return counts


def _collect_block(n: int, k: int, first: int, wanted: FrozenSet[Multiset]) -> List[Tuple[int, ...]]:
    found = []
    for rest in combinations(range(first + 1, n), k - 1):
        subset = (first,) + rest
        if _multiset(subset, n) in wanted:
            found.append(subset)
    return found


def _check_instance(n: int, k: int, budget: int) -> int:
    if k > n:
        raise ValueError(f"k={k} 大于 n={n}")
    if k < 3:
        raise ValueError(f"k={k} 不构成多边形（要求 k ≥ 3）")
    total = math.comb(n, k)
    if total > budget:
        raise BudgetExceededError(
            f"C({n},{k}) = {total} 超出穷举预算 {budget}，请改用 characterize_optimal",
            size=total, budget=budget
        )
    return total


@lru_cache(maxsize=256)
def _multiset_counts(n: int, k: int, n_jobs: int = 1, progress: bool = False) -> Dict[Multiset, int]:
    blocks = range(n - k + 1)
    if progress:
        blocks = tqdm(blocks, desc=f"穷举 C({n},{k})")
    parts = Parallel(n_jobs=n_jobs)(delayed(_count_block)(n, k, first) for first in blocks)
    counts: Dict[Multiset, int] = {}
    for part in parts:
        for ms, c in part.items():
            counts[ms] = counts.get(ms, 0) + c
    return counts


def _optimal_multisets(
    n: int,
    k: int,
    c: RegularityCriterion,
    tolerance: float,
    n_jobs: int,
    progress: bool = False
) -> Tuple[Union[float, int], Dict[Multiset, int]]:
    counts = _multiset_counts(n, k, n_jobs, progress)
    keys = {ms: _rank_key(ms, n, c) for ms in counts}
    best = min(keys.values())
    if c.discrete:
        chosen = {ms: counts[ms] for ms, key in keys.items() if key == best}
    else:
        chosen = {ms: counts[ms] for ms, key in keys.items() if key <= best + tolerance}
    representative = min(chosen, key=lambda ms: keys[ms])
    return criterion_value(representative, n, c), chosen


def best_selection(
    n: int,
    k: int,
    c: Union[RegularityCriterion, str],
    budget: int = DEFAULT_BUDGET,
    n_jobs: int = 1,
    tolerance: float = DEFAULT_TOLERANCE,
    progress: bool = False
) -> SelectionResult:
    """穷举全部 C(n,k) 个子集，返回所有最优解（按重音集合字典序）"""
    c = RegularityCriterion(c)
    total = _check_instance(n, k, budget)
    value, chosen = _optimal_multisets(n, k, c, tolerance, n_jobs, progress)

    wanted = frozenset(chosen)
    parts = Parallel(n_jobs=n_jobs)(
        delayed(_collect_block)(n, k, first, wanted) for first in range(n - k + 1)
    )
    optimizers = tuple(s for part in parts for s in part)

    logger.debug("best_selection(%d, %d, %s): %d 个最优解", n, k, c.value, len(optimizers))
    return SelectionResult(
        n=n, k=k, criterion=c, value=value,
        optimizers=optimizers,
        multisets=dict(sorted(chosen.items(), reverse=True)),
        total=total
    )


# ============ 结构刻画 ============

def balanced_multiset(n: int, k: int) -> Multiset:
    q, r = divmod(n, k)
    return (q + 1,) * r + (q,) * (k - r)


def balanced_pattern(n: int, k: int) -> RhythmPattern:
    """间隔只取 q 或 q+1 的一个具体实现（欧几里得节奏）"""
    onsets = tuple(sorted({(i * n) // k for i in range(k)}))
    return RhythmPattern(n, onsets, f"E({k},{n})")


def characterize_optimal(
    n: int,
    k: int,
    c: Union[RegularityCriterion, str],
    verify: bool = False,
    budget: int = DEFAULT_BUDGET,
    n_jobs: int = 1,
    tolerance: float = DEFAULT_TOLERANCE
) -> OptimalProfile:
    """最优间隔多重集的刻画；对面积/周长准则可选地用穷举验证"""
    c = RegularityCriterion(c)
    if not 1 <= k <= n:
        raise ValueError(f"要求 1 ≤ k ≤ n，实际 k={k}, n={n}")
    q, r = divmod(n, k)
    ms = balanced_multiset(n, k)
    max_gap = -(-n // k)

    if c.discrete:
        status = "proven"
    elif verify and 3 <= k and math.comb(n, k) <= budget:
        _, chosen = _optimal_multisets(n, k, c, tolerance, n_jobs)
        status = "verified" if set(chosen) == {ms} else "refuted"
        if status == "refuted":
            logger.warning("平衡多重集不是 (%d, %d, %s) 的唯一最优: %s", n, k, c.value, sorted(chosen))
    else:
        status = "unverified"

    return OptimalProfile(
        n=n, k=k, criterion=c, q=q, r=r,
        multiset=ms, max_gap=max_gap,
        value=criterion_value(ms, n, c),
        status=status
    )


def is_optimal(
    p: RhythmPattern,
    c: Union[RegularityCriterion, str],
    budget: int = DEFAULT_BUDGET,
    n_jobs: int = 1,
    tolerance: float = DEFAULT_TOLERANCE
) -> OptimalityReport:
    """判断节奏在给定准则下是否最优，并给出与最优值的差距"""
    c = RegularityCriterion(c)
    _check_instance(p.n, p.k, budget)
    optimum, chosen = _optimal_multisets(p.n, p.k, c, tolerance, n_jobs)
    ms = gap_profile(p).multiset()
    value = criterion_value(ms, p.n, c)
    shortfall = (optimum - value) if c.maximize else (value - optimum)
    if not c.discrete:
        shortfall = max(0.0, shortfall)
    return OptimalityReport(
        optimal=ms in chosen,
        value=value,
        optimum=optimum,
        shortfall=shortfall
    )
