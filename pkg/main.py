"""
弗拉门戈节奏与旋律几何分析工具 - 主入口
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import coloredlogs

# 确保src目录在路径中
sys.path.insert(0, str(Path(__file__).parent))

from src.config import RunConfig, get_config, reload_config
from src.errors import (
    BudgetExceededError, CompasError, CycleMismatchError, TreeError
)

logger = logging.getLogger("compas")

EXIT_OK = 0
EXIT_SELFCHECK = 1
EXIT_INPUT = 2
EXIT_CYCLE = 3
EXIT_BUDGET = 4
EXIT_TREE = 5

# 标准节奏顺序 So, Bu, Se, Gu, Fa 下的表格（上三角，逐行）
TABLE_CHRONOTONIC = [6, 8, 4, 10, 12, 8, 14, 8, 6, 6]
TABLE_PERMUTATION = [1, 11, 7, 7, 12, 8, 8, 4, 4, 2]


def _read_text(path: str) -> str:
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def _write_text(path: str, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    print(f"✓ 已保存: {path}")


def _load_patterns(cfg: RunConfig):
    from src.notation import read_rhythm_file

    config = get_config()
    path = cfg.inputs[0] if cfg.inputs else config.paths.rhythm_file
    return read_rhythm_file(_read_text(path), cfg.format, cfg.n)


def _select_pattern(patterns, name: str):
    for p in patterns:
        if p.name == name:
            return p
    raise ValueError(f"找不到节奏: {name}（可选: {', '.join(p.label() for p in patterns)}）")


def cmd_distances(cfg: RunConfig) -> int:
    """节奏距离矩阵（带 Σ / Max 汇总行）"""
    from src.similarity import distance_matrix

    patterns = _load_patterns(cfg)
    matrix = distance_matrix(patterns, cfg.metric)

    print("=" * 50)
    print(f"距离矩阵: {cfg.metric}")
    print("=" * 50)
    print(matrix.to_text())
    print(f"与其他节奏最相似 (Σ 最小): {', '.join(matrix.nearest())}")
    print(f"最不相似 (Σ 最大): {', '.join(matrix.most_distant())}")

    violations = matrix.triangle_violations()
    if violations:
        logger.warning("三角不等式不成立: %s", violations[:5])

    if cfg.output:
        _write_text(cfg.output, matrix.to_csv())
        _write_text(str(Path(cfg.output).with_suffix(".txt")), matrix.to_text())
    return EXIT_OK


def cmd_regularity(cfg: RunConfig) -> int:
    """最优子多边形搜索"""
    from src.regularity import best_selection, characterize_optimal, is_optimal

    config = get_config()
    reg = config.regularity

    if cfg.pattern:
        p = _select_pattern(_load_patterns(cfg), cfg.pattern)
        report = is_optimal(p, cfg.criterion, reg.budget, reg.n_jobs, reg.tolerance)
        mark = "✓" if report.optimal else "✗"
        print(f"{mark} {p.label()} [{cfg.criterion}] 值={report.value:.6f} "
              f"最优={report.optimum:.6f} 差距={report.shortfall:.6f}")
        return EXIT_OK

    n = cfg.n or config.notation.default_n
    if cfg.k is None:
        raise ValueError("请指定 --k")
    k = cfg.k

    print("=" * 50)
    print(f"正则性: n={n}, k={k}, 准则={cfg.criterion}")
    print("=" * 50)

    try:
        result = best_selection(n, k, cfg.criterion, reg.budget, reg.n_jobs, reg.tolerance, progress=True)
    except BudgetExceededError as e:
        logger.warning("%s；改用结构刻画（未验证）", e)
        profile = characterize_optimal(n, k, cfg.criterion)
        print(f"  最优间隔多重集: {{{','.join(map(str, profile.multiset))}}}")
        print(f"  最大间隔: {profile.max_gap}")
        print(f"  准则取值: {profile.value}")
        print(f"  状态: {profile.status}")
        return EXIT_OK

    print(f"  子集总数: {result.total}")
    print(f"  最优解个数: {result.count}")
    print(f"  最优值: {result.value}")
    for ms, count in result.multisets.items():
        print(f"  间隔多重集 {{{','.join(map(str, ms))}}}: {count} 个")

    if cfg.output:
        lines = [" ".join(str(o + 1) for o in s) for s in result.optimizers]
        _write_text(cfg.output, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_segment(cfg: RunConfig) -> int:
    """旋律分段"""
    import pandas as pd

    from src.errors import UnitMismatchError
    from src.notation import parse_alpha, parse_pitch_track
    from src.plotting import plot_segmentation
    from src.segmentation import segment_greedy

    config = get_config()
    path = cfg.inputs[0] if cfg.inputs else config.paths.debla_file
    unit = cfg.unit or config.notation.pitch_unit
    melody = parse_pitch_track(_read_text(path), unit, Path(path).stem)

    alpha, alpha_unit = parse_alpha(cfg.alpha if cfg.alpha is not None else str(config.segmentation.alpha), unit)
    if alpha_unit is not melody.unit:
        raise UnitMismatchError(f"容差单位 {alpha_unit.value} 与轨迹单位 {melody.unit.value} 不同")

    approx = segment_greedy(melody, alpha)
    df = pd.DataFrame(
        [(s.t_start, s.t_end, s.value) for s in approx.steps],
        columns=["t_start", "t_end", "value"]
    )
    text = df.to_csv(index=False, lineterminator="\n", float_format="%.6f")

    print(f"{melody.name}: {len(melody)} 个点 → {len(approx)} 段 (α={alpha:g} {alpha_unit.value})")
    if cfg.output:
        _write_text(cfg.output, text)
    else:
        print(text, end="")
    if cfg.svg:
        plot_segmentation(melody, approx, cfg.svg, config.plot)
    return EXIT_OK


def cmd_tree(cfg: RunConfig) -> int:
    """距离矩阵 → 邻接树（Newick）"""
    from src.phylo import neighbor_joining, to_newick
    from src.similarity import DistanceMatrix, distance_matrix

    config = get_config()
    if cfg.matrix:
        matrix = DistanceMatrix.read_csv(_read_text(cfg.matrix))
    else:
        matrix = distance_matrix(_load_patterns(cfg), cfg.metric)

    tree = neighbor_joining(matrix)
    newick = to_newick(tree, config.phylo.decimals)
    for where, length in tree.clamped:
        print(f"  ✗ 负枝长 {length:.6f} 截断为0: {{{where}}}")

    if cfg.output:
        _write_text(cfg.output, newick + "\n")
    else:
        print(newick)
    return EXIT_OK


def cmd_plot(cfg: RunConfig) -> int:
    """绘制时钟多边形或时值曲线"""
    from src.plotting import plot_chronotonic, plot_polygon

    config = get_config()
    patterns = _load_patterns(cfg)

    if cfg.pattern:
        p = _select_pattern(patterns, cfg.pattern)
        path = cfg.svg or config.ensure_output_dir() / f"{p.label()}_polygon.svg"
        plot_polygon(p, path, config.plot)
    else:
        path = cfg.svg or config.ensure_output_dir() / "chronotonic.svg"
        plot_chronotonic(patterns, path, config.plot)
    return EXIT_OK


def _check_table(title: str, matrix, expected: List[int]) -> bool:
    n = matrix.size
    got = [int(matrix.values[i, j]) for i in range(n) for j in range(i + 1, n)]
    ok = got == expected
    print(f"{'✓' if ok else '✗'} {title}")
    if not ok:
        print(f"  期望: {expected}")
        print(f"  实际: {got}")
    print(f"  Σ:   {' '.join(str(int(v)) for v in matrix.column_sums)}")
    print(f"  Max: {' '.join(str(int(v)) for v in matrix.column_max)}")
    return ok


def cmd_selfcheck(cfg: RunConfig) -> int:
    """复现两张距离表"""
    from src.notation import canonical_patterns
    from src.similarity import distance_matrix

    patterns = canonical_patterns()
    print("=" * 50)
    print("自检: 标准节奏距离表")
    print("=" * 50)
    ok = _check_table("时值距离表", distance_matrix(patterns, "chronotonic"), TABLE_CHRONOTONIC)
    ok &= _check_table("置换距离表", distance_matrix(patterns, "permutation"), TABLE_PERMUTATION)
    # 原表 seguiriya 一列 Σ 印作 34，各项之和为 31
    print("  注: 置换距离表 seguiriya 列 Σ 按各项重新求和为 31")
    print("=" * 50)
    return EXIT_OK if ok else EXIT_SELFCHECK


def cmd_corpus(cfg: RunConfig) -> int:
    """合成语料：分段 + 步函数距离 + 邻接法"""
    from src.corpus import run_trials
    from src.errors import UnitMismatchError
    from src.notation import PitchUnit, parse_alpha

    config = get_config()
    alpha, alpha_unit = parse_alpha(cfg.alpha if cfg.alpha is not None else "50", PitchUnit.CENTS)
    if alpha_unit is not PitchUnit.CENTS:
        raise UnitMismatchError(f"合成语料以 cents 为单位，容差单位为 {alpha_unit.value}")
    report = run_trials(
        trials=cfg.trials, alpha=alpha, seed=cfg.seed,
        n_jobs=config.regularity.n_jobs, progress=True
    )
    print(f"两族分开: {report.separated}/{report.trials} ({report.rate:.0%})，α={alpha:g} cents")
    return EXIT_OK


def cmd_info(cfg: RunConfig) -> int:
    """显示系统信息"""
    from src import __version__
    from src.regularity import RegularityCriterion
    from src.similarity import Metric

    config = get_config()

    print("=" * 50)
    print(f"弗拉门戈节奏几何分析 v{__version__} - 系统信息")
    print("=" * 50)

    print(f"\n【配置信息】")
    print(f"  配置文件: {config.config_path}")
    print(f"  输出目录: {config.paths.output_dir}")
    print(f"  默认拍数: {config.notation.default_n}")
    print(f"  音高单位: {config.notation.pitch_unit}")
    print(f"  分段容差: {config.segmentation.alpha}")
    print(f"  穷举预算: {config.regularity.budget}")

    print(f"\n【距离】 {', '.join(m.value for m in Metric)}")
    print(f"【准则】 {', '.join(c.value for c in RegularityCriterion)}")

    print(f"\n【数据文件】")
    for path in (config.paths.rhythm_file, config.paths.debla_file):
        mark = "✓" if Path(path).exists() else "✗"
        print(f"  {mark} {path}")

    print("=" * 50)
    return EXIT_OK


COMMANDS = {
    'distances': cmd_distances,
    'regularity': cmd_regularity,
    'segment': cmd_segment,
    'tree': cmd_tree,
    'plot': cmd_plot,
    'selfcheck': cmd_selfcheck,
    'corpus': cmd_corpus,
    'info': cmd_info,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="弗拉门戈节奏与旋律几何分析工具",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  python main.py selfcheck                                  # 复现两张距离表
  python main.py distances --metric permutation -o out.csv  # 距离矩阵
  python main.py regularity --n 12 --k 5 --criterion max-area
  python main.py segment --alpha 12hz data/melodies/debla.csv
  python main.py tree --metric chronotonic -o tree.nwk
  python main.py plot --pattern fandango --svg fandango.svg
  python main.py corpus --trials 20 --seed 0
        """
    )

    parser.add_argument('--config', type=str, default='configs/config.yaml',
                        help='配置文件路径')
    parser.add_argument('--run-config', type=str, help='运行配置文件（覆盖命令行参数）')
    parser.add_argument('--save-run', type=str, help='把本次运行参数保存到文件')

    subparsers = parser.add_subparsers(dest='command', help='可用命令')

    def rhythm_inputs(p):
        p.add_argument('inputs', nargs='*', help='节奏文件（缺省为内置标准节奏）')
        p.add_argument('--format', type=str, choices=['binary', 'onset_list', 'grid'],
                       help='文件头缺省时的节奏格式')
        p.add_argument('--n', type=int, help='拍数')

    # ===== distances =====
    p_dist = subparsers.add_parser('distances', help='节奏距离矩阵')
    rhythm_inputs(p_dist)
    p_dist.add_argument('--metric', type=str, default='chronotonic',
                        choices=['chronotonic', 'permutation', 'hamming'])
    p_dist.add_argument('--output', '-o', type=str, help='CSV 输出路径')

    # ===== regularity =====
    p_reg = subparsers.add_parser('regularity', help='最优子多边形搜索')
    rhythm_inputs(p_reg)
    p_reg.add_argument('--k', type=int, help='重音数')
    p_reg.add_argument('--criterion', type=str, default='max-area',
                       choices=['max-area', 'max-perimeter', 'min-sum-ears', 'min-max-ear', 'min-max-gap'])
    p_reg.add_argument('--pattern', type=str, help='判断该节奏是否最优')
    p_reg.add_argument('--output', '-o', type=str, help='最优子集输出路径')

    # ===== segment =====
    p_seg = subparsers.add_parser('segment', help='旋律分段')
    p_seg.add_argument('inputs', nargs='*', help='音高轨迹 CSV（缺省为内置 debla）')
    p_seg.add_argument('--alpha', type=str, help='容差，如 12hz / 100cents')
    p_seg.add_argument('--unit', type=str, choices=['hz', 'cents'], help='轨迹的音高单位')
    p_seg.add_argument('--output', '-o', type=str, help='分段 CSV 输出路径')
    p_seg.add_argument('--svg', type=str, help='叠加图输出路径')

    # ===== tree =====
    p_tree = subparsers.add_parser('tree', help='邻接树 (Newick)')
    rhythm_inputs(p_tree)
    p_tree.add_argument('--metric', type=str, default='chronotonic',
                        choices=['chronotonic', 'permutation', 'hamming'])
    p_tree.add_argument('--matrix', type=str, help='直接读取距离矩阵 CSV')
    p_tree.add_argument('--output', '-o', type=str, help='Newick 输出路径')

    # ===== plot =====
    p_plot = subparsers.add_parser('plot', help='绘制 SVG')
    rhythm_inputs(p_plot)
    p_plot.add_argument('--pattern', type=str, help='绘制该节奏的时钟多边形')
    p_plot.add_argument('--svg', type=str, help='SVG 输出路径')

    # ===== selfcheck =====
    subparsers.add_parser('selfcheck', help='复现标准节奏距离表')

    # ===== corpus =====
    p_corpus = subparsers.add_parser('corpus', help='合成语料建树试验')
    p_corpus.add_argument('--trials', type=int, default=20, help='试验次数')
    p_corpus.add_argument('--seed', type=int, default=0, help='随机种子')
    p_corpus.add_argument('--alpha', type=str, help='分段容差 (cents)')

    # ===== info =====
    subparsers.add_parser('info', help='显示系统信息')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # 设置配置
    config = reload_config(args.config)
    coloredlogs.install(level=config.logging.level, fmt="%(asctime)s %(name)s %(levelname)s %(message)s")

    cfg = RunConfig.from_args(args)
    if args.run_config:
        cfg = cfg.overlay(args.run_config)
    if args.save_run:
        cfg.save(args.save_run)

    if cfg.command not in COMMANDS:
        parser.print_help()
        return EXIT_INPUT

    try:
        return COMMANDS[cfg.command](cfg)
    except CycleMismatchError as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_CYCLE
    except BudgetExceededError as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_BUDGET
    except TreeError as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_TREE
    except (CompasError, ValueError, OSError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
