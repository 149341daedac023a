"""相似性模块 - 节奏距离与带 Σ / Max 汇总行的距离矩阵"""

import io
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import CompasError, CycleMismatchError, OnsetCountError
from .geometry import chronotonic
from .notation import RhythmPattern

logger = logging.getLogger(__name__)

SUM_ROW = "Σ"
MAX_ROW = "Max"


class Metric(str, Enum):
    CHRONOTONIC = "chronotonic"
    PERMUTATION = "permutation"
    HAMMING = "hamming"


def _check_cycles(a: RhythmPattern, b: RhythmPattern):
    if a.n != b.n:
        raise CycleMismatchError(f"拍数不同: {a.label()} (n={a.n}) vs {b.label()} (n={b.n})")


# ============ 距离 ============

def chronotonic_distance(a: RhythmPattern, b: RhythmPattern) -> int:
    """两条时值曲线之间的面积 ∫|f-g|（整数拍网格上为整数）"""
    _check_cycles(a, b)
    fa, fb = chronotonic(a).per_beat(), chronotonic(b).per_beat()
    return int(np.abs(fa - fb).sum())


def hamming_distance(a: RhythmPattern, b: RhythmPattern) -> int:
    _check_cycles(a, b)
    return int(np.count_nonzero(a.accents() != b.accents()))


def permutation_distance_equal(a: RhythmPattern, b: RhythmPattern) -> int:
    """重音数相同：按位置向量逐项相减取绝对值之和（线性串，不回绕）"""
    _check_cycles(a, b)
    if a.k != b.k:
        raise OnsetCountError(f"重音数不同 ({a.k} vs {b.k})，请使用 permutation_distance_unequal")
    return sum(abs(x - y) for x, y in zip(a.onsets, b.onsets))


@dataclass(frozen=True)
class Assignment:
    """重音多的节奏 → 重音少的节奏 的单调满射"""
    distance: int
    pairs: Tuple[Tuple[int, int], ...]  # (源位置, 目标位置)，0起始
    source: Optional[str] = None
    target: Optional[str] = None


def permutation_distance_unequal(a: RhythmPattern, b: RhythmPattern) -> Assignment:
    """重音数不同：动态规划求最小代价的不交叉满射

    dp[i][j] 为前 i+1 个源重音分配完毕且第 i 个落在目标 j 上的最小代价；
    单调满射保证相邻源重音的目标要么相同要么前进一格。
    """
    _check_cycles(a, b)
    if a.k == b.k:
        raise OnsetCountError(f"重音数相同 ({a.k})，请使用 permutation_distance_equal")
    p1, p2 = (a, b) if a.k > b.k else (b, a)
    src, dst = p1.onsets, p2.onsets
    k1, k2 = len(src), len(dst)

    inf = float("inf")
    dp = [[inf] * k2 for _ in range(k1)]
    back = [[0] * k2 for _ in range(k1)]
    dp[0][0] = abs(src[0] - dst[0])

    for i in range(1, k1):
        # 剩余源重音必须足够覆盖剩余目标
        lo = max(0, k2 - (k1 - i))
        hi = min(i, k2 - 1)
        for j in range(lo, hi + 1):
            stay = dp[i - 1][j]
            advance = dp[i - 1][j - 1] if j > 0 else inf
            if stay <= advance:
                dp[i][j], back[i][j] = stay, j
            else:
                dp[i][j], back[i][j] = advance, j - 1
            dp[i][j] += abs(src[i] - dst[j])

    targets = [k2 - 1]
    for i in range(k1 - 1, 0, -1):
        targets.append(back[i][targets[-1]])
    targets.reverse()

    return Assignment(
        distance=int(dp[k1 - 1][k2 - 1]),
        pairs=tuple((src[i], dst[j]) for i, j in enumerate(targets)),
        source=p1.name,
        target=p2.name
    )


def permutation_distance(a: RhythmPattern, b: RhythmPattern) -> int:
    """按重音数选择相应的置换距离"""
    if a.k == b.k:
        return permutation_distance_equal(a, b)
    return permutation_distance_unequal(a, b).distance


METRICS: Dict[Metric, Callable[[RhythmPattern, RhythmPattern], int]] = {
    Metric.CHRONOTONIC: chronotonic_distance,
    Metric.PERMUTATION: permutation_distance,
    Metric.HAMMING: hamming_distance,
}


# ============ 距离矩阵 ============

@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: Tuple[str, ...]
    values: np.ndarray
    metric: Optional[str] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        object.__setattr__(self, "labels", tuple(self.labels))
        n = len(self.labels)
        if values.shape != (n, n):
            raise ValueError(f"矩阵形状 {values.shape} 与标签数 {n} 不符")
        if len(set(self.labels)) != n:
            raise ValueError(f"标签重复: {self.labels}")
        if not np.allclose(values, values.T, atol=1e-12):
            raise ValueError("距离矩阵不对称")
        if np.any(np.diag(values) != 0):
            raise ValueError("距离矩阵对角线必须为0")
        if np.any(values < 0):
            raise ValueError("距离矩阵存在负值")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def integral(self) -> bool:
        return bool(np.all(self.values == np.round(self.values)))

    @property
    def column_sums(self) -> np.ndarray:
        return self.values.sum(axis=0)

    @property
    def column_max(self) -> np.ndarray:
        return self.values.max(axis=0)

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])

    def nearest(self) -> List[str]:
        """Σ 最小的标签（与其他节奏最相似）"""
        sums = self.column_sums
        return [l for l, s in zip(self.labels, sums) if np.isclose(s, sums.min())]

    def most_distant(self, by: str = SUM_ROW) -> List[str]:
        """按 Σ 或 Max 最大的标签"""
        row = self.column_sums if by == SUM_ROW else self.column_max
        return [l for l, s in zip(self.labels, row) if np.isclose(s, row.max())]

    def triangle_violations(self, tolerance: float = 1e-9) -> List[Tuple[str, str, str]]:
        """诊断：满足 d(a,c) > d(a,b) + d(b,c) 的三元组 (a, b, c)"""
        d = self.values
        found = []
        n = self.size
        for i in range(n):
            for k in range(i + 1, n):
                for j in range(n):
                    if j in (i, k):
                        continue
                    if d[i, k] > d[i, j] + d[j, k] + tolerance:
                        found.append((self.labels[i], self.labels[j], self.labels[k]))
        return found

    def to_frame(self, summary: bool = True) -> pd.DataFrame:
        dtype = np.int64 if self.integral else float
        rows, index = self.values, list(self.labels)
        if summary:
            rows = np.vstack([rows, self.column_sums, self.column_max])
            index += [SUM_ROW, MAX_ROW]
        df = pd.DataFrame(rows.astype(dtype), index=index, columns=list(self.labels))
        df.index.name = self.metric or ""
        return df

    def to_csv(self, summary: bool = True) -> str:
        return self.to_frame(summary).to_csv(lineterminator="\n", float_format="%.6f")

    def to_text(self, summary: bool = True) -> str:
        return self.to_frame(summary).to_string(float_format=lambda v: f"{v:.6f}") + "\n"

    @classmethod
    def read_csv(cls, text: str) -> "DistanceMatrix":
        """读取 to_csv 的输出（忽略 Σ / Max 行）"""
        df = pd.read_csv(io.StringIO(text), index_col=0)
        df.index = df.index.map(str)
        df.columns = df.columns.map(str)
        df = df.drop(index=[r for r in (SUM_ROW, MAX_ROW) if r in df.index])
        labels = list(df.columns)
        if sorted(df.index) != sorted(labels):
            raise ValueError("行标签与列标签不一致")
        df = df.loc[labels, labels]
        metric = df.index.name if isinstance(df.index.name, str) and df.index.name else None
        return cls(tuple(labels), df.to_numpy(dtype=float), metric)


def distance_matrix(
    patterns: Sequence[RhythmPattern],
    metric: Union[Metric, str] = Metric.CHRONOTONIC
) -> DistanceMatrix:
    """成对距离矩阵，标签顺序与输入顺序相同"""
    metric = Metric(metric)
    fn = METRICS[metric]
    labels = tuple(p.label() for p in patterns)
    n = len(patterns)
    values = np.zeros((n, n))

    for i in range(n):
        for j in range(i + 1, n):
            try:
                d = fn(patterns[i], patterns[j])
            except CompasError as e:
                raise type(e)(f"{labels[i]} vs {labels[j]}: {e}") from e
            values[i, j] = values[j, i] = d

    return DistanceMatrix(labels, values, metric.value)
