"""旋律分段模块 - 用最少的水平段在竖直误差 α 内逼近音高轮廓

贪心扫描：从左到右维护可行取值区间 Δ = ∩[y_i-α, y_i+α]，
遇到与 Δ 不相交的点时结束当前段并从该点重新开始。
闭区间：恰好相切视为相交。
"""

import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import BudgetExceededError, UnitMismatchError
from .geometry import ChronotonicCurve
from .notation import PitchUnit, TimedPitchSequence

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_BUDGET = 2000

_hz_warned = False


@dataclass(frozen=True)
class Step:
    t_start: float
    t_end: float
    value: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class StepApproximation:
    """阶梯函数：各段无缝覆盖 [t_1, t_n]"""
    steps: Tuple[Step, ...]
    alpha: float
    n: int
    unit: Optional[PitchUnit] = PitchUnit.HZ
    work: int = field(default=0, compare=False)

    def __post_init__(self):
        steps = tuple(s if isinstance(s, Step) else Step(*s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise ValueError("阶梯函数至少需要一段")
        for s in steps:
            if s.t_end < s.t_start:
                raise ValueError(f"非法分段: {s}")
        for a, b in zip(steps, steps[1:]):
            if a.t_end != b.t_start:
                raise ValueError(f"分段之间存在间隙或重叠: {a.t_end} vs {b.t_start}")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def start(self) -> float:
        return self.steps[0].t_start

    @property
    def end(self) -> float:
        return self.steps[-1].t_end

    def values(self) -> List[float]:
        return [s.value for s in self.steps]

    def evaluate(self, t: float) -> float:
        """E(t)；内部边界归属右侧一段，末端闭合"""
        if not self.start <= t <= self.end:
            raise ValueError(f"t={t} 超出定义域 [{self.start}, {self.end}]")
        ends = [s.t_end for s in self.steps]
        i = bisect.bisect_right(ends, t)
        return self.steps[min(i, len(self.steps) - 1)].value

    def max_error(self, m: TimedPitchSequence) -> float:
        """max d_v(p_i, E)"""
        return max(abs(self.evaluate(t) - f) for t, f in m.points)

    @classmethod
    def from_curve(cls, curve: ChronotonicCurve) -> "StepApproximation":
        """把节奏的时值曲线当作阶梯函数（单位为拍，不带音高单位）"""
        steps = tuple(Step(float(a), float(b), float(h)) for a, b, h in curve.segments())
        return cls(steps, alpha=0.0, n=len(steps), unit=None)


def _check_alpha(alpha: float):
    if alpha is None or math.isnan(alpha) or alpha < 0:
        raise ValueError(f"容差 α 必须 ≥ 0，实际 {alpha}")


def _warn_hz(m: TimedPitchSequence):
    global _hz_warned
    if m.unit is PitchUnit.HZ and not _hz_warned:
        logger.warning("音高单位为 Hz：α 按 Hz 解释，建议换算为 cents（半音 = 100 cents）")
        _hz_warned = True


def _build(m: TimedPitchSequence, runs: Sequence[Tuple[int, int, float, float]],
           alpha: float, work: int) -> StepApproximation:
    """runs: (首点下标, 末点下标, Δ下界, Δ上界)；边界取相邻两段端点时间的中点"""
    times = [t for t, _ in m.points]
    steps = []
    for idx, (first, last, lo, hi) in enumerate(runs):
        start = times[0] if idx == 0 else (times[first - 1] + times[first]) / 2
        end = times[-1] if idx == len(runs) - 1 else (times[last] + times[last + 1]) / 2
        steps.append(Step(start, end, (lo + hi) / 2))
    return StepApproximation(tuple(steps), alpha, len(m), m.unit, work)


def segment_greedy(m: TimedPitchSequence, alpha: float) -> StepApproximation:
    """线性时间贪心分段，段数最少"""
    _check_alpha(alpha)
    _warn_hz(m)
    ys = [f for _, f in m.points]

    runs = []
    start, lo, hi = 0, ys[0] - alpha, ys[0] + alpha
    work = 1
    for i in range(1, len(ys)):
        work += 1
        nlo, nhi = max(lo, ys[i] - alpha), min(hi, ys[i] + alpha)
        if nlo <= nhi:
            lo, hi = nlo, nhi
        else:
            runs.append((start, i - 1, lo, hi))
            start, lo, hi = i, ys[i] - alpha, ys[i] + alpha
    runs.append((start, len(ys) - 1, lo, hi))

    return _build(m, runs, alpha, work)


def segment_oracle(
    m: TimedPitchSequence,
    alpha: float,
    budget: int = DEFAULT_ORACLE_BUDGET
) -> StepApproximation:
    """O(n²) 动态规划：对每个前缀求最少段数，用于校验贪心解的最优性"""
    _check_alpha(alpha)
    n = len(m)
    if n > budget:
        raise BudgetExceededError(f"序列长度 {n} 超出校验预算 {budget}", size=n, budget=budget)
    ys = [f for _, f in m.points]

    inf = math.inf
    best = [0] + [inf] * n
    prev = [0] * (n + 1)
    work = 0
    for j in range(1, n + 1):
        top, bottom = -inf, inf
        for i in range(j, 0, -1):
            work += 1
            top, bottom = max(top, ys[i - 1]), min(bottom, ys[i - 1])
            if top - alpha > bottom + alpha:
                break
            if best[i - 1] + 1 < best[j]:
                best[j], prev[j] = best[i - 1] + 1, i - 1

    runs = []
    j = n
    while j > 0:
        i = prev[j]
        chunk = ys[i:j]
        runs.append((i, j - 1, max(chunk) - alpha, min(chunk) + alpha))
        j = i
    runs.reverse()

    return _build(m, runs, alpha, work)


def step_distance(
    f: StepApproximation,
    g: StepApproximation,
    normalized: bool = True
) -> float:
    """公共定义域 D 上的 ∫|f-g| dt；normalized 时除以 |D|（平均音高差）"""
    if f.unit != g.unit:
        raise UnitMismatchError(f"音高单位不同: {f.unit} vs {g.unit}")
    lo, hi = max(f.start, g.start), min(f.end, g.end)
    if hi < lo:
        raise ValueError(f"定义域不相交: [{f.start}, {f.end}] vs [{g.start}, {g.end}]")
    if hi == lo:
        if normalized:
            raise ValueError("公共定义域长度为0，无法归一化")
        return 0.0

    cuts = {lo, hi}
    for s in f.steps + g.steps:
        for t in (s.t_start, s.t_end):
            if lo < t < hi:
                cuts.add(t)
    cuts = sorted(cuts)

    total = math.fsum(
        abs(f.evaluate((a + b) / 2) - g.evaluate((a + b) / 2)) * (b - a)
        for a, b in zip(cuts, cuts[1:])
    )
    return total / (hi - lo) if normalized else total


def encode_melody(a: StepApproximation) -> List[Tuple[float, float]]:
    """旋律编码：(时长, 音高) 向量"""
    return [(s.duration, s.value) for s in a.steps]
