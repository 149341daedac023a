"""绘图模块 - 时值曲线、时钟多边形与分段叠加图（SVG）"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .config import PlotConfig
from .geometry import chronotonic, clock_coordinates, polygon
from .notation import RhythmPattern, TimedPitchSequence
from .segmentation import StepApproximation

logger = logging.getLogger(__name__)

# 固定哈希盐与元数据，保证同一输入输出字节相同
plt.rcParams["svg.hashsalt"] = "compas"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("已保存: %s", path)
    return path


def _figure(cfg: Optional[PlotConfig]):
    cfg = cfg or PlotConfig()
    return plt.subplots(figsize=(cfg.width, cfg.height), dpi=cfg.dpi)


def plot_chronotonic(patterns: Sequence[RhythmPattern], path, cfg: PlotConfig = None) -> Path:
    """多条时值曲线叠放"""
    fig, ax = _figure(cfg)
    for p in patterns:
        curve = chronotonic(p)
        xs = list(curve.breakpoints)
        ys = list(curve.heights) + [curve.heights[-1]]
        line, = ax.step(xs, ys, where="post", label=p.label())
        line.set_gid(f"curve-{p.label()}")
    n = patterns[0].n if patterns else 0
    ax.set_xlim(0, n)
    ax.set_ylim(0, None)
    ax.set_xlabel("拍")
    ax.set_ylabel("时值")
    ax.legend()
    return _save(fig, path)


def plot_polygon(p: RhythmPattern, path, cfg: PlotConfig = None) -> Path:
    """时钟图：n 个网格点与重音多边形"""
    poly = polygon(p)
    fig, ax = _figure(cfg)

    grid = clock_coordinates(range(p.n), p.n)
    ax.scatter(grid[:, 0], grid[:, 1], s=12, color="lightgray", zorder=1)

    verts = np.array(poly.vertices)
    closed = np.vstack([verts, verts[:1]])
    ax.plot(closed[:, 0], closed[:, 1], color="black", zorder=2)
    for i, (x, y) in enumerate(verts):
        dot, = ax.plot([x], [y], "o", color="black", zorder=3)
        dot.set_gid(f"onset-{i}")

    ax.set_title(f"{p.label()}  area={poly.area:.4f}")
    ax.set_aspect("equal")
    ax.set_xlim(-1.15, 1.15)
    ax.set_ylim(-1.15, 1.15)
    ax.axis("off")
    return _save(fig, path)


def plot_segmentation(m: TimedPitchSequence, a: StepApproximation, path, cfg: PlotConfig = None) -> Path:
    """音高轮廓与阶梯逼近的叠加"""
    fig, ax = _figure(cfg)
    contour, = ax.plot(m.times, m.pitches, "o-", color="gray", label="contour")
    contour.set_gid("contour")
    for i, s in enumerate(a.steps):
        bar, = ax.plot([s.t_start, s.t_end], [s.value, s.value], color="red", linewidth=2)
        bar.set_gid(f"step-{i}")
        ax.fill_between([s.t_start, s.t_end], s.value - a.alpha, s.value + a.alpha,
                        color="red", alpha=0.1)
    ax.set_xlabel("t")
    ax.set_ylabel(m.unit.value)
    ax.set_title(f"{m.name or ''}  α={a.alpha:g}  steps={len(a)}")
    return _save(fig, path)
