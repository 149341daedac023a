"""系统发生树模块 - 邻接法（neighbor-joining）建树与 Newick 导出

树为无根树，从最后剩下三个簇的中心节点开始存储。
负的枝长截断为0，并记录在 PhyloTree.clamped 中。
"""

import logging
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

import dendropy
import numpy as np

from .errors import TreeError
from .similarity import DistanceMatrix

logger = logging.getLogger(__name__)

DEFAULT_DECIMALS = 6
TIE_TOLERANCE = 1e-9

_UNQUOTED = re.compile(r"^[^\s()\[\]':;,]+$")


@dataclass(eq=False)
class TreeNode:
    name: Optional[str] = None
    length: float = 0.0
    children: List["TreeNode"] = field(default_factory=list)

    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator["TreeNode"]:
        """前序遍历"""
        yield self
        for child in self.children:
            yield from child.walk()

    def leaf_names(self) -> List[str]:
        return [n.name for n in self.walk() if n.is_leaf()]


@dataclass(frozen=True, eq=False)
class PhyloTree:
    root: TreeNode
    labels: Tuple[str, ...]
    clamped: Tuple[Tuple[str, float], ...] = ()
    metric: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        names = self.root.leaf_names()
        if any(not name for name in names):
            raise TreeError("叶节点缺少标签")
        if len(set(names)) != len(names):
            raise TreeError(f"叶标签重复: {sorted(names)}")
        if set(names) != set(self.labels):
            raise TreeError(f"叶标签 {sorted(names)} 与矩阵标签 {sorted(self.labels)} 不一致")
        for node in self.root.walk():
            if node is not self.root and node.length < 0:
                raise TreeError(f"负的枝长: {node.length}")

    def leaves(self) -> List[str]:
        return self.root.leaf_names()

    def splits(self, include_trivial: bool = True) -> Dict[FrozenSet[str], float]:
        """每条边对应的二分划及其枝长；取不含首个标签（按字典序）的一侧"""
        anchor = min(self.labels)
        everything = frozenset(self.labels)
        result: Dict[FrozenSet[str], float] = {}

        def visit(node: TreeNode) -> FrozenSet[str]:
            below = frozenset(node.leaf_names())
            for child in node.children:
                side = frozenset(child.leaf_names())
                key = everything - side if anchor in side else side
                if include_trivial or 1 < len(side) < len(everything) - 1:
                    result[key] = result.get(key, 0.0) + child.length
                visit(child)
            return below

        visit(self.root)
        return result

    def path_lengths(self) -> DistanceMatrix:
        """树上叶节点两两之间的路径长度"""
        adjacency: Dict[int, List[Tuple[TreeNode, float]]] = {}
        for node in self.root.walk():
            adjacency.setdefault(id(node), [])
            for child in node.children:
                adjacency[id(node)].append((child, child.length))
                adjacency.setdefault(id(child), []).append((node, child.length))

        leaves = {n.name: n for n in self.root.walk() if n.is_leaf()}
        index = {name: i for i, name in enumerate(self.labels)}
        values = np.zeros((len(self.labels), len(self.labels)))
        for name, start in leaves.items():
            dist = {id(start): 0.0}
            queue = deque([start])
            while queue:
                node = queue.popleft()
                for other, length in adjacency[id(node)]:
                    if id(other) not in dist:
                        dist[id(other)] = dist[id(node)] + length
                        queue.append(other)
            for other_name, other in leaves.items():
                values[index[name], index[other_name]] = dist[id(other)]

        values = (values + values.T) / 2
        return DistanceMatrix(self.labels, values, self.metric)


# ============ 邻接法 ============

def _attach(parent: TreeNode, child: TreeNode, length: float, clamped: List[Tuple[str, float]]):
    if length < 0:
        where = ",".join(sorted(child.leaf_names()))
        logger.warning("枝长为负 (%.6g)，已截断为0: {%s}", length, where)
        clamped.append((where, float(length)))
        length = 0.0
    child.length = float(length)
    parent.children.append(child)


def neighbor_joining(d: DistanceMatrix) -> PhyloTree:
    """标准邻接法；Q 值并列时取下标最小的一对"""
    n = d.size
    if n < 3:
        raise TreeError(f"邻接法至少需要3个标签，实际 {n}")
    D = np.array(d.values, dtype=float)
    if not np.allclose(D, D.T, atol=1e-12):
        raise TreeError("距离矩阵不对称")

    nodes = [TreeNode(name=label) for label in d.labels]
    clamped: List[Tuple[str, float]] = []

    while len(nodes) > 3:
        m = len(nodes)
        r = D.sum(axis=1)
        Q = (m - 2) * D - r[:, None] - r[None, :]
        np.fill_diagonal(Q, np.inf)
        best = Q.min()
        candidates = [(i, j) for i, j in np.argwhere(Q <= best + TIE_TOLERANCE) if i < j]
        i, j = (int(x) for x in candidates[0])

        li = D[i, j] / 2 + (r[i] - r[j]) / (2 * (m - 2))
        lj = D[i, j] - li
        joined = TreeNode()
        _attach(joined, nodes[i], li, clamped)
        _attach(joined, nodes[j], lj, clamped)

        du = (D[i, :] + D[j, :] - D[i, j]) / 2
        D[i, :] = du
        D[:, i] = du
        D[i, i] = 0.0
        D = np.delete(np.delete(D, j, axis=0), j, axis=1)
        nodes[i] = joined
        del nodes[j]

    # 剩余三个簇连到中心节点
    center = TreeNode()
    for a in range(3):
        b, c = [x for x in range(3) if x != a]
        _attach(center, nodes[a], (D[a, b] + D[a, c] - D[b, c]) / 2, clamped)

    return PhyloTree(center, d.labels, tuple(clamped), d.metric)


# ============ Newick ============

def _quote(name: str) -> str:
    if _UNQUOTED.match(name):
        return name
    return "'" + name.replace("'", "''") + "'"


def to_newick(t: PhyloTree, decimals: int = DEFAULT_DECIMALS) -> str:
    """带枝长的 Newick 文本；子节点按其最小叶标签排序"""

    def render(node: TreeNode) -> str:
        if node.is_leaf():
            body = _quote(node.name)
        else:
            children = sorted(node.children, key=lambda c: min(c.leaf_names()))
            body = "(" + ",".join(render(c) for c in children) + ")"
        if node is t.root:
            return body
        return f"{body}:{node.length + 0.0:.{decimals}f}"

    return render(t.root) + ";"


def _from_dendropy(node) -> TreeNode:
    length = node.edge.length if node.edge is not None and node.edge.length is not None else 0.0
    if node.is_leaf():
        name = node.taxon.label if node.taxon is not None else node.label
        return TreeNode(name=name, length=float(length))
    return TreeNode(
        name=node.label,
        length=float(length),
        children=[_from_dendropy(c) for c in node.child_nodes()]
    )


def parse_newick(text: str, metric: Optional[str] = None) -> PhyloTree:
    """读取 Newick 文本（单棵树）"""
    if not text or not text.strip():
        raise TreeError("Newick 文本为空")
    try:
        tree = dendropy.Tree.get(data=text, schema="newick", preserve_underscores=True)
    except Exception as e:
        raise TreeError(f"Newick 解析失败: {e}") from e

    root = _from_dendropy(tree.seed_node)
    root.length = 0.0
    return PhyloTree(root, tuple(root.leaf_names()), (), metric)
