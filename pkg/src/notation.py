"""记谱模块 - 节奏型与旋律的领域类型、解析与序列化

节奏文件语法（UTF-8）::

    # 注释行
    format: onset_list      # binary | onset_list | grid
    n: 12                   # onset_list 必需（缺省12），其余格式由字符串长度决定
    solea = 3,6,8,10,12     # 名称 = 节奏

onset_list 在文本中为1起始编号（与记谱惯例一致），内部统一为0起始。
grid 格式中 'x' 为重音拍，'.' 为弱拍，每个字符对应一拍。
"""

import io
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from .errors import NotationError

DEFAULT_CYCLE = 12


class RhythmFormat(str, Enum):
    BINARY = "binary"
    ONSET_LIST = "onset_list"
    GRID = "grid"


class PitchUnit(str, Enum):
    HZ = "hz"
    CENTS = "cents"


# ============ 节奏类型 ============

@dataclass(frozen=True)
class RhythmPattern:
    """n拍循环中的重音位置（0起始，严格递增）"""
    n: int
    onsets: Tuple[int, ...]
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        onsets = tuple(int(p) for p in self.onsets)
        object.__setattr__(self, "onsets", onsets)

        if int(self.n) != self.n or self.n < 1:
            raise NotationError(f"拍数必须为正整数: {self.n}")
        if not onsets:
            raise NotationError("节奏没有重音")
        if len(set(onsets)) != len(onsets):
            raise NotationError(f"重复的重音位置: {onsets}")
        for p in onsets:
            if not 0 <= p < self.n:
                raise NotationError(f"重音位置 {p} 超出范围 [0, {self.n})")
        if list(onsets) != sorted(onsets):
            raise NotationError(f"重音位置必须递增: {onsets}")

    @property
    def k(self) -> int:
        return len(self.onsets)

    def accents(self) -> np.ndarray:
        """二进制重音向量"""
        vec = np.zeros(self.n, dtype=np.int8)
        vec[list(self.onsets)] = 1
        return vec

    def rotate(self, shift: int) -> "RhythmPattern":
        """整体平移（循环旋转）"""
        moved = sorted((p + shift) % self.n for p in self.onsets)
        return RhythmPattern(self.n, tuple(moved), self.name)

    def with_name(self, name: Optional[str]) -> "RhythmPattern":
        return RhythmPattern(self.n, self.onsets, name)

    def label(self) -> str:
        return self.name or format_rhythm(self, RhythmFormat.BINARY)


@dataclass(frozen=True)
class GapProfile:
    """相邻重音之间的循环间隔（拍）"""
    gaps: Tuple[int, ...]

    def __post_init__(self):
        gaps = tuple(int(g) for g in self.gaps)
        object.__setattr__(self, "gaps", gaps)
        if not gaps:
            raise NotationError("间隔序列为空")
        if any(g < 1 for g in gaps):
            raise NotationError(f"间隔必须 ≥ 1: {gaps}")

    @property
    def n(self) -> int:
        return sum(self.gaps)

    @property
    def k(self) -> int:
        return len(self.gaps)

    @property
    def max_gap(self) -> int:
        return max(self.gaps)

    def multiset(self) -> Tuple[int, ...]:
        """降序排列的间隔多重集"""
        return tuple(sorted(self.gaps, reverse=True))

    def rotate(self, i: int) -> "GapProfile":
        i %= len(self.gaps)
        return GapProfile(self.gaps[i:] + self.gaps[:i])

    def __str__(self) -> str:
        return "".join(str(g) if g < 10 else f"({g})" for g in self.gaps)


def gap_profile(p: RhythmPattern) -> GapProfile:
    """以第一个重音为起点的循环间隔序列"""
    on = p.onsets
    gaps = [on[i + 1] - on[i] for i in range(len(on) - 1)]
    gaps.append(p.n - on[-1] + on[0])
    return GapProfile(tuple(gaps))


# 标准12拍弗拉门戈节奏（0起始）
CANONICAL_PATTERNS: Dict[str, RhythmPattern] = {
    "solea": RhythmPattern(12, (2, 5, 7, 9, 11), "solea"),
    "buleria": RhythmPattern(12, (2, 6, 7, 9, 11), "buleria"),
    "seguiriya": RhythmPattern(12, (0, 2, 4, 7, 10), "seguiriya"),
    "guajira": RhythmPattern(12, (0, 3, 6, 8, 10), "guajira"),
    "fandango": RhythmPattern(12, (0, 3, 6, 9), "fandango"),
}


def canonical_patterns() -> List[RhythmPattern]:
    """按表格顺序返回五种标准节奏"""
    return list(CANONICAL_PATTERNS.values())


# ============ 节奏解析 / 序列化 ============

def parse_rhythm(
    text: str,
    format: Union[RhythmFormat, str] = RhythmFormat.BINARY,
    n: Optional[int] = None,
    name: Optional[str] = None
) -> RhythmPattern:
    """解析单个节奏字符串"""
    fmt = RhythmFormat(format)
    text = text.strip()
    if not text:
        raise NotationError("空节奏字符串")

    if fmt is RhythmFormat.BINARY:
        bad = set(text) - {"0", "1"}
        if bad:
            raise NotationError(f"二进制节奏含非法字符: {''.join(sorted(bad))}")
        onsets = [i for i, c in enumerate(text) if c == "1"]
        length = len(text)
    elif fmt is RhythmFormat.GRID:
        bad = set(text) - {"x", "X", "."}
        if bad:
            raise NotationError(f"网格节奏含非法字符: {''.join(sorted(bad))}")
        onsets = [i for i, c in enumerate(text) if c in "xX"]
        length = len(text)
    else:
        length = n if n is not None else DEFAULT_CYCLE
        onsets = []
        for token in re.split(r"[,\s]+", text):
            if not token:
                continue
            try:
                pos = int(token)
            except ValueError:
                raise NotationError(f"非法的重音编号: {token!r}")
            if not 1 <= pos <= length:
                raise NotationError(f"重音编号 {pos} 超出范围 1..{length}")
            onsets.append(pos - 1)
        if len(set(onsets)) != len(onsets):
            raise NotationError(f"重复的重音编号: {text}")
        onsets.sort()

    if n is not None and n != length:
        raise NotationError(f"节奏长度 {length} 与指定拍数 {n} 不一致")
    if not onsets:
        raise NotationError("节奏没有重音")

    return RhythmPattern(length, tuple(onsets), name)


def format_rhythm(p: RhythmPattern, format: Union[RhythmFormat, str] = RhythmFormat.BINARY) -> str:
    """序列化为指定格式（parse_rhythm 的逆操作）"""
    fmt = RhythmFormat(format)
    if fmt is RhythmFormat.BINARY:
        return "".join("1" if a else "0" for a in p.accents())
    if fmt is RhythmFormat.GRID:
        return "".join("x" if a else "." for a in p.accents())
    return ",".join(str(o + 1) for o in p.onsets)


def read_rhythm_file(
    text: str,
    default_format: Optional[Union[RhythmFormat, str]] = None,
    default_n: Optional[int] = None
) -> List[RhythmPattern]:
    """解析节奏文件，错误信息包含行号；文件头缺省时使用 default_format / default_n"""
    fmt: Optional[RhythmFormat] = RhythmFormat(default_format) if default_format else None
    n: Optional[int] = default_n
    patterns: List[RhythmPattern] = []
    seen = set()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if "=" in line:
            if fmt is None:
                raise NotationError("节奏出现在 'format:' 头之前", line=lineno)
            name, body = (part.strip() for part in line.split("=", 1))
            if not name:
                raise NotationError("缺少节奏名称", line=lineno)
            if name in seen:
                raise NotationError(f"重复的节奏名称: {name}", line=lineno)
            try:
                patterns.append(parse_rhythm(body, fmt, n, name))
            except NotationError as e:
                raise NotationError(str(e), line=lineno) from e
            seen.add(name)
            continue

        if ":" in line:
            key, value = (part.strip() for part in line.split(":", 1))
            key = key.lower()
            if patterns:
                raise NotationError(f"头字段 '{key}' 必须位于所有节奏之前", line=lineno)
            if key == "format":
                try:
                    fmt = RhythmFormat(value.lower())
                except ValueError:
                    raise NotationError(f"未知格式: {value}", line=lineno)
            elif key == "n":
                try:
                    n = int(value)
                except ValueError:
                    raise NotationError(f"非法的拍数: {value}", line=lineno)
                if n < 1:
                    raise NotationError(f"拍数必须为正: {n}", line=lineno)
            else:
                raise NotationError(f"未知头字段: {key}", line=lineno)
            continue

        raise NotationError(f"无法识别的行: {raw.strip()!r}", line=lineno)

    if not patterns:
        raise NotationError("文件中没有节奏")
    return patterns


def write_rhythm_file(
    patterns: Sequence[RhythmPattern],
    format: Union[RhythmFormat, str] = RhythmFormat.ONSET_LIST
) -> str:
    """写出节奏文件"""
    fmt = RhythmFormat(format)
    if not patterns:
        raise NotationError("没有可写出的节奏")
    cycles = {p.n for p in patterns}
    lines = [f"format: {fmt.value}"]
    if len(cycles) == 1:
        lines.append(f"n: {cycles.pop()}")
    elif fmt is RhythmFormat.ONSET_LIST:
        raise NotationError("onset_list 文件要求所有节奏拍数相同")
    for i, p in enumerate(patterns):
        lines.append(f"{p.name or f'pattern{i + 1}'} = {format_rhythm(p, fmt)}")
    return "\n".join(lines) + "\n"


# ============ 旋律类型 ============

@dataclass(frozen=True)
class TimedPitchSequence:
    """旋律：按时间排列的 (t, f) 点列"""
    points: Tuple[Tuple[float, float], ...]
    unit: PitchUnit = PitchUnit.HZ
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        points = tuple((float(t), float(f)) for t, f in self.points)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "unit", PitchUnit(self.unit))
        if not points:
            raise NotationError("旋律为空")
        for t, f in points:
            if not (math.isfinite(t) and math.isfinite(f)):
                raise NotationError(f"非有限数值: ({t}, {f})")
        for (t0, _), (t1, _) in zip(points, points[1:]):
            if not t1 > t0:
                raise NotationError(f"时间非单调: {t0} → {t1}")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.points])

    @property
    def pitches(self) -> np.ndarray:
        return np.array([f for _, f in self.points])

    def transpose(self, c: float) -> "TimedPitchSequence":
        return TimedPitchSequence(tuple((t, f + c) for t, f in self.points), self.unit, self.name)

    def to_cents(self, reference_hz: float = 440.0) -> "TimedPitchSequence":
        """显式换算为相对参考频率的音分"""
        if self.unit is PitchUnit.CENTS:
            return self
        if reference_hz <= 0 or any(f <= 0 for _, f in self.points):
            raise NotationError("Hz 转 cents 要求频率为正")
        pts = tuple((t, 1200.0 * math.log2(f / reference_hz)) for t, f in self.points)
        return TimedPitchSequence(pts, PitchUnit.CENTS, self.name)


@dataclass(frozen=True)
class IntervalSequence:
    """旋律的音程表示 (Δt, Δf)"""
    intervals: Tuple[Tuple[float, float], ...]
    unit: PitchUnit = PitchUnit.HZ

    def __post_init__(self):
        intervals = tuple((float(dt), float(df)) for dt, df in self.intervals)
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "unit", PitchUnit(self.unit))
        if any(dt <= 0 for dt, _ in intervals):
            raise NotationError("时间间隔必须为正")

    def __len__(self) -> int:
        return len(self.intervals)


def to_intervals(m: TimedPitchSequence) -> IntervalSequence:
    """转为音程表示，长度为 n-1"""
    if len(m) < 2:
        raise NotationError("音程表示至少需要2个点")
    pts = m.points
    return IntervalSequence(
        tuple((b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])),
        m.unit
    )


def from_intervals(iv: IntervalSequence, anchor: Tuple[float, float]) -> TimedPitchSequence:
    """由起点和音程序列重建旋律"""
    t, f = float(anchor[0]), float(anchor[1])
    points = [(t, f)]
    for dt, df in iv.intervals:
        t, f = t + dt, f + df
        points.append((t, f))
    return TimedPitchSequence(tuple(points), iv.unit)


def contour_extrema(m: TimedPitchSequence) -> Dict[str, List[int]]:
    """旋律轮廓的局部峰值和谷值（平台取第一个点，端点不计）"""
    f = m.pitches
    # 合并相等的连续值
    runs: List[Tuple[int, float]] = []
    for i, v in enumerate(f):
        if not runs or v != runs[-1][1]:
            runs.append((i, v))

    peaks, valleys = [], []
    for j in range(1, len(runs) - 1):
        idx, v = runs[j]
        if v > runs[j - 1][1] and v > runs[j + 1][1]:
            peaks.append(idx)
        elif v < runs[j - 1][1] and v < runs[j + 1][1]:
            valleys.append(idx)
    return {"peaks": peaks, "valleys": valleys}


# ============ 音高轨迹 ============

def _is_number(value) -> bool:
    try:
        float(str(value).strip())
        return True
    except ValueError:
        return False


def parse_pitch_track(
    stream: Union[str, TextIO],
    unit: Union[PitchUnit, str] = PitchUnit.HZ,
    name: Optional[str] = None
) -> TimedPitchSequence:
    """解析 "time,pitch" CSV（可选表头）"""
    text = stream if isinstance(stream, str) else stream.read()
    if not text.strip():
        raise NotationError("音高轨迹为空")

    try:
        df = pd.read_csv(
            io.StringIO(text), header=None, dtype=str,
            skip_blank_lines=False, skipinitialspace=True
        )
    except pd.errors.ParserError as e:
        raise NotationError(f"CSV 格式错误: {e}")

    if df.shape[1] != 2:
        raise NotationError(f"每行应有2列 (time,pitch)，实际 {df.shape[1]} 列")

    # 行号从1开始；跳过空行
    df.index = range(1, len(df) + 1)
    df = df.dropna(how="all")
    if df.empty:
        raise NotationError("音高轨迹为空")

    first = df.index[0]
    if not (_is_number(df.at[first, 0]) and _is_number(df.at[first, 1])):
        df = df.drop(index=first)
    if df.empty:
        raise NotationError("音高轨迹为空（只有表头）")

    points = []
    last_t = None
    for lineno, row in df.iterrows():
        if pd.isna(row[0]) or pd.isna(row[1]):
            raise NotationError("缺少数值", line=lineno)
        try:
            t = float(str(row[0]).strip())
            f = float(str(row[1]).strip())
        except ValueError:
            raise NotationError(f"无法解析的数值: {row[0]!r},{row[1]!r}", line=lineno)
        if not (math.isfinite(t) and math.isfinite(f)):
            raise NotationError(f"无法解析的数值: {row[0]!r},{row[1]!r}", line=lineno)
        if last_t is not None and not t > last_t:
            raise NotationError(f"时间非单调: {last_t} → {t}", line=lineno)
        last_t = t
        points.append((t, f))

    return TimedPitchSequence(tuple(points), PitchUnit(unit), name)


def format_pitch_track(m: TimedPitchSequence) -> str:
    """写出为带表头的CSV"""
    df = pd.DataFrame(list(m.points), columns=["time", "pitch"])
    return df.to_csv(index=False, lineterminator="\n")


_ALPHA_RE = re.compile(r"^\s*([-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|[-+]?\.\d+)\s*([A-Za-z]*)\s*$")


def parse_alpha(text: str, default_unit: Union[PitchUnit, str] = PitchUnit.HZ) -> Tuple[float, PitchUnit]:
    """解析带单位的容差，如 "100cents"、"12hz"、"12" """
    match = _ALPHA_RE.match(str(text))
    if not match:
        raise NotationError(f"无法解析的容差: {text!r}")
    value, suffix = float(match.group(1)), match.group(2).lower()
    if not suffix:
        return value, PitchUnit(default_unit)
    if suffix in ("hz",):
        return value, PitchUnit.HZ
    if suffix in ("c", "cent", "cents"):
        return value, PitchUnit.CENTS
    raise NotationError(f"未知的音高单位: {suffix}")
