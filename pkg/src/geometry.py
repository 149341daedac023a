"""几何模块 - 时值（chronotonic）曲线与时钟多边形

时钟方向：位置0在12点钟方向，按顺时针排列；只影响坐标，不影响面积。
面积均在单位圆上计算（无量纲）。
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import NotationError
from .notation import GapProfile, RhythmPattern, gap_profile

logger = logging.getLogger(__name__)

GapsLike = Union[GapProfile, Sequence[int]]


# ============ 时值曲线 ============

@dataclass(frozen=True)
class ChronotonicCurve:
    """[0, n) 上的阶梯函数，每段高度等于其宽度"""
    n: int
    breakpoints: Tuple[int, ...]
    heights: Tuple[int, ...]

    def __post_init__(self):
        bp, h = self.breakpoints, self.heights
        if len(bp) != len(h) + 1 or bp[0] != 0 or bp[-1] != self.n:
            raise ValueError(f"非法的分段: {bp}")
        for (a, b), height in zip(zip(bp, bp[1:]), h):
            if b - a != height or height <= 0:
                raise ValueError(f"分段 [{a}, {b}) 的高度应为 {b - a}，实际 {height}")

    def segments(self) -> List[Tuple[int, int, int]]:
        return [(a, b, h) for a, b, h in zip(self.breakpoints, self.breakpoints[1:], self.heights)]

    def value_at(self, t: float) -> int:
        if not 0 <= t < self.n:
            raise ValueError(f"t={t} 超出定义域 [0, {self.n})")
        for a, b, h in self.segments():
            if a <= t < b:
                return h
        raise AssertionError("unreachable")

    def per_beat(self) -> np.ndarray:
        """每一拍上的高度（断点都在整数拍上）"""
        return np.repeat(np.array(self.heights, dtype=np.int64), self.heights)

    def area(self) -> int:
        return sum(h * h for h in self.heights)


def chronotonic(p: RhythmPattern) -> ChronotonicCurve:
    """构造时值曲线：分段边界为 {0} ∪ onsets ∪ {n}"""
    bounds = sorted({0, *p.onsets, p.n})
    heights = tuple(b - a for a, b in zip(bounds, bounds[1:]))
    return ChronotonicCurve(p.n, tuple(bounds), heights)


# ============ 时钟多边形 ============

@dataclass(frozen=True)
class Ear:
    """相邻两个顶点间的弦与 g 条网格边围成的区域"""
    start_onset: int
    end_onset: int
    gap: int
    area: float


@dataclass(frozen=True)
class OnsetPolygon:
    n: int
    onsets: Tuple[int, ...]
    vertices: Tuple[Tuple[float, float], ...]
    gaps: GapProfile
    ears: Tuple[Ear, ...]

    @property
    def k(self) -> int:
        return len(self.onsets)

    @property
    def degenerate(self) -> bool:
        return self.k < 3

    @property
    def reflex(self) -> bool:
        """存在跨越半圆以上的弧"""
        return any(2 * g > self.n for g in self.gaps.gaps)

    @property
    def area(self) -> float:
        return polygon_area(self.gaps, self.n)

    @property
    def perimeter(self) -> float:
        return polygon_perimeter(self.gaps, self.n)


def vertex_angle(pos: int, n: int) -> float:
    """位置0在顶部，顺时针"""
    return math.pi / 2 - 2 * math.pi * pos / n


def clock_coordinates(onsets: Sequence[int], n: int) -> np.ndarray:
    theta = np.array([vertex_angle(p, n) for p in onsets])
    return np.column_stack([np.cos(theta), np.sin(theta)])


def ear_area(g: int, n: int) -> float:
    """g 条网格边与弦之间的面积"""
    step = 2 * math.pi / n
    return g * math.sin(step) / 2 - math.sin(g * step) / 2


def polygon(p: RhythmPattern) -> OnsetPolygon:
    gaps = gap_profile(p)
    coords = clock_coordinates(p.onsets, p.n)
    k = p.k
    ears = tuple(
        Ear(p.onsets[i], p.onsets[(i + 1) % k], g, ear_area(g, p.n))
        for i, g in enumerate(gaps.gaps)
    )
    poly = OnsetPolygon(
        n=p.n,
        onsets=p.onsets,
        vertices=tuple((float(x), float(y)) for x, y in coords),
        gaps=gaps,
        ears=ears,
    )
    if poly.degenerate:
        logger.debug("退化多边形 (k=%d): %s", k, p.label())
    if poly.reflex:
        logger.debug("存在大于半圆的弧，面积按带符号正弦和计算: %s", p.label())
    return poly


def _check_gaps(gaps: GapsLike, n: int = None) -> Tuple[Tuple[int, ...], int]:
    values = gaps.gaps if isinstance(gaps, GapProfile) else tuple(int(g) for g in gaps)
    total = sum(values)
    if n is None:
        n = total
    if total != n:
        raise NotationError(f"间隔之和 {total} 不等于拍数 {n}")
    return values, n


def polygon_area(gaps: GapsLike, n: int = None) -> float:
    """以圆心为公共顶点的三角形面积之和：Σ sin(2πg/n)/2"""
    values, n = _check_gaps(gaps, n)
    if len(values) < 3:
        return 0.0
    step = 2 * math.pi / n
    return math.fsum(math.sin(g * step) / 2 for g in values)


def polygon_perimeter(gaps: GapsLike, n: int = None) -> float:
    """相邻顶点弦长之和：Σ 2·sin(πg/n)"""
    values, n = _check_gaps(gaps, n)
    return math.fsum(2 * math.sin(g * math.pi / n) for g in values)


def ear_areas(poly: OnsetPolygon) -> List[float]:
    if poly.k < 2:
        raise ValueError("至少需要2个顶点")
    return [ear.area for ear in poly.ears]


def regular_polygon_area(n: int) -> float:
    return n * math.sin(2 * math.pi / n) / 2


def shoelace_area(vertices) -> float:
    """鞋带公式（与三角形求和独立的面积计算）"""
    pts = np.asarray(vertices, dtype=float)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)) / 2)
